from pathlib import Path

import numpy as np
import pytest

from qbroadcast.channels import bell, cluster_yan
from qbroadcast.gates import p, run_statevector
from qbroadcast.linalg import partial_trace
from qbroadcast.qasm import CIRCUITS, Program, export_qasm, parse_qasm, run_program, to_qasm

GOLDEN = Path(__file__).parent / "golden"
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


@pytest.mark.parametrize("circuit", sorted(CIRCUITS))
def test_matches_golden_file(circuit):
    assert export_qasm(circuit).encode() == (GOLDEN / f"{circuit}.qasm").read_bytes()


def test_unknown_circuit():
    with pytest.raises(ValueError, match="unknown circuit"):
        export_qasm("fig9")


@pytest.mark.parametrize("circuit,expected", [
    ("fig1a", np.kron(bell(), bell())),
    ("fig1b", cluster_yan()),
])
def test_preparation_round_trip(circuit, expected):
    program = parse_qasm((GOLDEN / f"{circuit}.qasm").read_text())
    assert program.n_qubits == 4
    psi = run_statevector(program.ops, 4)
    np.testing.assert_allclose(psi, expected, atol=1e-12)


@pytest.mark.parametrize("circuit,receivers", [("fig3a", (2, 3)), ("fig3b", (1, 3))])
def test_broadcast_round_trip(circuit, receivers):
    program = parse_qasm((GOLDEN / f"{circuit}.qasm").read_text())
    branches = run_program(program)
    assert len(branches) == 4
    assert sum(p for _, p, _ in branches) == pytest.approx(1, abs=1e-12)
    for regs, p, psi in branches:
        assert p == pytest.approx(0.25, abs=1e-12)
        for q in receivers:
            np.testing.assert_allclose(partial_trace(psi, [q]), np.outer(PLUS, PLUS), atol=1e-12)


def test_text_round_trip():
    for circuit in CIRCUITS:
        text = export_qasm(circuit)
        program = parse_qasm(text)
        assert to_qasm(program) == text


def test_parse_rejects_unknown_gate():
    with pytest.raises(ValueError, match="unsupported"):
        parse_qasm("OPENQASM 2.0;\nqreg q[1];\nccx q[0];\n")


def test_parse_needs_qreg():
    with pytest.raises(ValueError):
        parse_qasm("OPENQASM 2.0;\nh q[0];\n")


def test_phase_gate_round_trip():
    text = to_qasm(Program(1, {}, [p(0.5, 0)]))
    assert "u1(0.5) q[0];" in text
    assert parse_qasm(text).ops[0].param == 0.5
