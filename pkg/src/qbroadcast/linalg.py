"""Dense linear algebra for small multi-qubit registers.

States are plain numpy arrays: a pure state is a 1-D complex vector of
length ``2**n`` and a mixed state is a ``2**n x 2**n`` density matrix.

Bit ordering: qubit 0 is the leftmost ket label, i.e. the most significant
bit of the amplitude index. ``|01>`` on two qubits is index 1.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

# Structural checks (orthonormality, hermiticity).
ATOL_STRUCT = 1e-10
# Equality assertions on computed quantities.
ATOL_EQ = 1e-9
# Results of accumulated arithmetic (products of many operators).
ATOL_ACCUM = 1e-8


def n_qubits_of(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def ket(bits: str) -> np.ndarray:
    """Computational basis state from a bit string, e.g. ``ket("01")``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2) if bits else 0] = 1.0
    return v


def normalize(psi: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return psi / norm


def density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def as_density(state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    return density(state) if state.ndim == 1 else state


def tensor(*states: np.ndarray) -> np.ndarray:
    """Kronecker product; the first argument occupies the leading qubits."""
    out = np.ones(1, dtype=complex) if states[0].ndim == 1 else np.ones((1, 1), dtype=complex)
    for s in states:
        out = np.kron(out, np.asarray(s, dtype=complex))
    return out


def _check_targets(targets: Sequence[int], n: int) -> list[int]:
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits: {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise ValueError(f"qubit index {t} out of range for {n} qubits")
    return targets


def _check_op(op: np.ndarray, k: int) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator of shape {op.shape} does not act on {k} qubit(s)")
    return op


def _contract(t: np.ndarray, op: np.ndarray, axes: list[int]) -> np.ndarray:
    # t has one axis of size 2 per qubit; apply op to the listed axes.
    k = len(axes)
    op_t = op.reshape([2] * (2 * k))
    out = np.tensordot(op_t, t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def embed_operator(op: np.ndarray, targets: Sequence[int], n: int) -> np.ndarray:
    """Full ``2**n`` matrix acting as ``op`` on ``targets`` and identity elsewhere.

    ``targets[0]`` is the most significant qubit of ``op``'s own index, so
    ``embed_operator(CNOT, [2, 0], 3)`` is a CNOT controlled by qubit 2.
    """
    targets = _check_targets(targets, n)
    op = _check_op(op, len(targets))
    eye = np.eye(2**n, dtype=complex).reshape([2] * (2 * n))
    return _contract(eye, op, targets).reshape(2**n, 2**n)


def apply_unitary(psi: np.ndarray, op: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    n = n_qubits_of(len(psi))
    targets = _check_targets(targets, n)
    op = _check_op(op, len(targets))
    out = _contract(np.asarray(psi, dtype=complex).reshape([2] * n), op, targets)
    return out.reshape(-1)


def conjugate_by(rho: np.ndarray, op: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """``op rho op^dagger`` with ``op`` acting on ``targets``."""
    n = n_qubits_of(len(rho))
    targets = _check_targets(targets, n)
    op = _check_op(op, len(targets))
    t = np.asarray(rho, dtype=complex).reshape([2] * (2 * n))
    t = _contract(t, op, targets)
    t = _contract(t, op.conj(), [n + q for q in targets])
    return t.reshape(2**n, 2**n)


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on ``keep`` (in the given order)."""
    rho = as_density(rho)
    n = n_qubits_of(len(rho))
    if len(keep) == 0:
        raise ValueError("keep must name at least one qubit")
    keep = _check_targets(keep, n)
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape([2] * (2 * n))
    t = t.transpose(keep + drop + [n + q for q in keep] + [n + q for q in drop])
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    return np.einsum("ijkj->ik", t.reshape(dk, dd, dk, dd))


def _check_basis(basis: Sequence[np.ndarray], k: int) -> np.ndarray:
    b = np.array([np.asarray(v, dtype=complex) for v in basis])
    if b.shape != (2**k, 2**k):
        raise ValueError(f"basis must hold {2**k} vectors of length {2**k}")
    gram = b.conj() @ b.T
    if not np.allclose(gram, np.eye(2**k), atol=ATOL_STRUCT, rtol=0):
        dev = np.max(np.abs(gram - np.eye(2**k)))
        raise ValueError(f"measurement basis is not orthonormal (deviation {dev:.3g})")
    return b


def measure_projective(
    psi: np.ndarray,
    targets: Sequence[int],
    basis: Sequence[np.ndarray],
    keep_measured: bool = True,
) -> list[tuple[int, float, np.ndarray]]:
    """Enumerate every outcome of a projective measurement on ``targets``.

    Returns ``(outcome, probability, post_state)`` for each basis vector.
    The post state is renormalized; with ``keep_measured=False`` the measured
    qubits are discarded and only the remaining register is returned.
    Zero-probability outcomes are still listed, with a zero vector.
    """
    psi = np.asarray(psi, dtype=complex)
    n = n_qubits_of(len(psi))
    targets = _check_targets(targets, n)
    b = _check_basis(basis, len(targets))
    rest = [q for q in range(n) if q not in targets]
    t = psi.reshape([2] * n).transpose(targets + rest).reshape(2 ** len(targets), -1)
    branches = []
    for k, vec in enumerate(b):
        amp = vec.conj() @ t
        prob = float(np.vdot(amp, amp).real)
        amp = amp / np.sqrt(prob) if prob > 0 else amp
        if keep_measured:
            full = np.multiply.outer(vec, amp).reshape([2] * n)
            post = full.transpose(np.argsort(targets + rest)).reshape(-1)
        else:
            post = amp.reshape(-1)
        branches.append((k, prob, post))
    return branches


def measure_density(
    rho: np.ndarray,
    targets: Sequence[int],
    basis: Sequence[np.ndarray],
) -> list[tuple[int, float, np.ndarray]]:
    """Mixed-state counterpart of :func:`measure_projective`.

    The measured qubits are always discarded from the returned states.
    """
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits_of(len(rho))
    targets = _check_targets(targets, n)
    b = _check_basis(basis, len(targets))
    rest = [q for q in range(n) if q not in targets]
    dk, dr = 2 ** len(targets), 2 ** len(rest)
    t = rho.reshape([2] * (2 * n))
    t = t.transpose(targets + rest + [n + q for q in targets] + [n + q for q in rest])
    t = t.reshape(dk, dr, dk, dr)
    branches = []
    for k, vec in enumerate(b):
        block = np.einsum("i,iajb,j->ab", vec.conj(), t, vec)
        prob = float(np.trace(block).real)
        if prob > 0:
            block = block / prob
        branches.append((k, prob, block))
    return branches


def hermitian_sqrt(m: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues down to ``-1e-10`` are treated as numerical noise and
    clamped to zero, as are positive eigenvalues below the rounding floor of
    the eigensolver (``d * eps * max|w|``): their square roots would
    otherwise inject errors of order ``sqrt(eps)``.
    """
    m = np.asarray(m, dtype=complex)
    if not np.allclose(m, m.conj().T, atol=ATOL_STRUCT, rtol=0):
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh(m)
    if w.min() < -ATOL_STRUCT:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {w.min():.3g})")
    floor = len(w) * np.finfo(float).eps * max(abs(w).max(), 1.0)
    w = np.sqrt(np.where(w > floor, w, 0.0))
    return (v * w) @ v.conj().T


def is_density_matrix(rho: np.ndarray, atol: float = ATOL_EQ) -> bool:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        return False
    if abs(np.trace(rho) - 1) > atol:
        return False
    return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -ATOL_STRUCT)
