"""OpenQASM 2.0 export of the preparation and broadcast circuits, plus a
reader for the same subset so exported files can be re-simulated."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .gates import BELL_PAIR_PREP, CLUSTER_PLUS_PREP, CLUSTER_PREP, Gate, h
from .linalg import apply_unitary, ket, measure_projective

_NAMES = {"h": "h", "x": "x", "y": "y", "z": "z", "cx": "cx", "cz": "cz", "p": "u1"}
_FROM_QASM = {v: k for k, v in _NAMES.items()}


@dataclass(frozen=True)
class Measure:
    qubit: int
    creg: str


@dataclass(frozen=True)
class Conditional:
    creg: str
    value: int
    gate: Gate


@dataclass
class Program:
    n_qubits: int
    cregs: dict[str, int] = field(default_factory=dict)
    ops: list = field(default_factory=list)

    @property
    def unitary_prefix(self) -> list[Gate]:
        """Gates before the first measurement or conditional."""
        out = []
        for op in self.ops:
            if not isinstance(op, Gate):
                break
            out.append(op)
        return out


def _bell_broadcast() -> Program:
    # Sender measures qubits 0 and 2 in the +/- basis; receivers hold 1 and 3.
    ops = list(BELL_PAIR_PREP) + [h(0), h(2)]
    ops += [Measure(0, "c0"), Measure(2, "c1")]
    ops += [Conditional("c0", 1, Gate("z", (1,))), Conditional("c1", 1, Gate("z", (3,)))]
    return Program(4, {"c0": 1, "c1": 1}, ops)


def _cluster_broadcast() -> Program:
    # +|1111> cluster; sender measures qubits 0 and 1 in the +/- basis.
    ops = list(CLUSTER_PLUS_PREP) + [h(0), h(1)]
    ops += [Measure(0, "c0"), Measure(1, "c1")]
    ops += [Conditional("c0", 1, Gate("z", (2,))), Conditional("c1", 1, Gate("z", (3,)))]
    return Program(4, {"c0": 1, "c1": 1}, ops)


CIRCUITS = {
    "fig1a": lambda: Program(4, {}, list(BELL_PAIR_PREP)),
    "fig1b": lambda: Program(4, {}, list(CLUSTER_PREP)),
    "fig3a": _cluster_broadcast,
    "fig3b": _bell_broadcast,
}


def _gate_text(g: Gate) -> str:
    name = _NAMES[g.name]
    if g.param is not None:
        name = f"{name}({g.param!r})"
    return f"{name} " + ",".join(f"q[{q}]" for q in g.qubits) + ";"


def to_qasm(program: Program) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{program.n_qubits}];"]
    lines += [f"creg {name}[{size}];" for name, size in program.cregs.items()]
    for op in program.ops:
        if isinstance(op, Gate):
            lines.append(_gate_text(op))
        elif isinstance(op, Measure):
            lines.append(f"measure q[{op.qubit}] -> {op.creg}[0];")
        else:
            lines.append(f"if({op.creg}=={op.value}) " + _gate_text(op.gate))
    return "\n".join(lines) + "\n"


def export_qasm(circuit_id: str) -> str:
    try:
        build = CIRCUITS[circuit_id]
    except KeyError:
        raise ValueError(f"unknown circuit {circuit_id!r}; expected one of {sorted(CIRCUITS)}") from None
    return to_qasm(build())


_GATE_RE = re.compile(r"^(\w+)(?:\(([^)]*)\))?\s+(.+);$")
_QUBIT_RE = re.compile(r"q\[(\d+)\]")


def _parse_gate(text: str) -> Gate:
    m = _GATE_RE.match(text)
    if not m or m.group(1) not in _FROM_QASM:
        raise ValueError(f"unsupported statement: {text!r}")
    qubits = tuple(int(q) for q in _QUBIT_RE.findall(m.group(3)))
    param = float(m.group(2)) if m.group(2) is not None else None
    return Gate(_FROM_QASM[m.group(1)], qubits, param)


def parse_qasm(text: str) -> Program:
    """Read back the OpenQASM 2.0 subset written by :func:`to_qasm`."""
    program: Optional[Program] = None
    cregs: dict[str, int] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("//") or line.startswith("OPENQASM") or line.startswith("include"):
            continue
        if m := re.match(r"^qreg q\[(\d+)\];$", line):
            program = Program(int(m.group(1)), cregs)
            continue
        if m := re.match(r"^creg (\w+)\[(\d+)\];$", line):
            cregs[m.group(1)] = int(m.group(2))
            continue
        if program is None:
            raise ValueError("qreg must be declared before any operation")
        if m := re.match(r"^measure q\[(\d+)\] -> (\w+)\[0\];$", line):
            program.ops.append(Measure(int(m.group(1)), m.group(2)))
        elif m := re.match(r"^if\((\w+)==(\d+)\)\s+(.+)$", line):
            program.ops.append(Conditional(m.group(1), int(m.group(2)), _parse_gate(m.group(3))))
        else:
            program.ops.append(_parse_gate(line))
    if program is None:
        raise ValueError("no qreg declaration found")
    return program


def run_program(program: Program) -> list[tuple[dict[str, int], float, np.ndarray]]:
    """Enumerate every measurement branch of a program.

    Returns ``(classical register values, probability, final state vector)``
    with measured qubits left collapsed in place.
    """
    branches = [({name: 0 for name in program.cregs}, 1.0, ket("0" * program.n_qubits))]
    z0, z1 = ket("0"), ket("1")
    for op in program.ops:
        nxt = []
        for regs, prob, psi in branches:
            if isinstance(op, Gate):
                nxt.append((regs, prob, apply_unitary(psi, op.matrix, op.qubits)))
            elif isinstance(op, Measure):
                for k, p, post in measure_projective(psi, [op.qubit], [z0, z1]):
                    if p > 0:
                        nxt.append(({**regs, op.creg: k}, prob * p, post))
            else:
                if regs[op.creg] == op.value:
                    psi = apply_unitary(psi, op.gate.matrix, op.gate.qubits)
                nxt.append((regs, prob, psi))
        branches = nxt
    return branches
