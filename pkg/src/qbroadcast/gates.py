"""Gate matrices and a minimal gate-list circuit model."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .linalg import apply_unitary, conjugate_by, ket

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
CZ = np.diag([1, 1, 1, -1]).astype(complex)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def phase(phi: float) -> np.ndarray:
    """P(phi) = diag(1, exp(i phi))."""
    return np.diag([1.0, np.exp(1j * phi)]).astype(complex)


def pauli_word(word: str) -> np.ndarray:
    """Single-qubit operator for a product of Paulis written as an operator
    product, e.g. ``"ZX"`` is Z @ X (X acts first). ``""`` and ``"I"`` give
    the identity."""
    out = I2
    for letter in word:
        out = out @ PAULIS[letter]
    return out


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    param: Optional[float] = None

    @property
    def matrix(self) -> np.ndarray:
        if self.name == "p":
            return phase(self.param)
        return _FIXED[self.name]


_FIXED = {"h": H, "x": X, "y": Y, "z": Z, "cx": CNOT, "cz": CZ, "id": I2}


def h(q: int) -> Gate:
    return Gate("h", (q,))


def cx(control: int, target: int) -> Gate:
    return Gate("cx", (control, target))


def cz(a: int, b: int) -> Gate:
    return Gate("cz", (a, b))


def p(phi: float, q: int) -> Gate:
    return Gate("p", (q,), float(phi))


# Two Bell pairs (0,1) and (2,3): four gates.
BELL_PAIR_PREP = (h(0), cx(0, 1), h(2), cx(2, 3))
# Four-qubit cluster state with a -|1111> term: five gates.
CLUSTER_PREP = (h(0), h(1), cx(0, 2), cx(1, 3), cz(0, 1))
# Cluster state with +|1111>, i.e. Bell pairs on (0,2) and (1,3).
CLUSTER_PLUS_PREP = (h(0), h(1), cx(0, 2), cx(1, 3))

PREP_CIRCUITS = {
    "bell-pair": BELL_PAIR_PREP,
    "cluster": CLUSTER_PREP,
}


def run_statevector(gates: Iterable[Gate], n: int, psi: Optional[np.ndarray] = None) -> np.ndarray:
    psi = ket("0" * n) if psi is None else np.asarray(psi, dtype=complex)
    for g in gates:
        psi = apply_unitary(psi, g.matrix, g.qubits)
    return psi


def run_density(
    gates: Iterable[Gate],
    n: int,
    rho: Optional[np.ndarray] = None,
    after_gate: Optional[Callable[[np.ndarray, Gate], np.ndarray]] = None,
) -> np.ndarray:
    """Evolve a density matrix through ``gates``.

    ``after_gate(rho, gate)`` is called after every gate; noise injection
    hooks in here.
    """
    if rho is None:
        rho = np.zeros((2**n, 2**n), dtype=complex)
        rho[0, 0] = 1.0
    for g in gates:
        rho = conjugate_by(rho, g.matrix, g.qubits)
        if after_gate is not None:
            rho = after_gate(rho, g)
    return rho


def circuit_width(gates: Sequence[Gate]) -> int:
    return 1 + max(q for g in gates for q in g.qubits)
