"""Fidelity, resource accounting and transcript aggregation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .linalg import ATOL_STRUCT, as_density, hermitian_sqrt


def _pure_vector(rho: np.ndarray) -> Optional[np.ndarray]:
    # Tr(rho^2) == sum |rho_ij|^2 for Hermitian rho.
    purity = float(np.sum(np.abs(rho) ** 2))
    if abs(purity - 1) > ATOL_STRUCT:
        return None
    w, v = np.linalg.eigh(rho)
    return v[:, -1]


def fidelity_sqrt(sigma: np.ndarray, rho: np.ndarray) -> float:
    """Tr[sqrt(sqrt(sigma) rho sqrt(sigma))]**2 evaluated through matrix square roots."""
    s = hermitian_sqrt(sigma)
    inner = s @ rho @ s
    inner = (inner + inner.conj().T) / 2
    return float(np.real(np.trace(hermitian_sqrt(inner))) ** 2)


def fidelity_pure(psi: np.ndarray, rho: np.ndarray) -> float:
    """<psi|rho|psi> for a normalized pure state."""
    psi = np.asarray(psi, dtype=complex)
    return float(np.real(np.vdot(psi, as_density(rho) @ psi)))


def uhlmann_fidelity(sigma: np.ndarray, rho: np.ndarray) -> float:
    """Squared Uhlmann fidelity ``Tr[sqrt(sqrt(sigma) rho sqrt(sigma))]**2``.

    Either argument may be a state vector. When one side is pure (rank one
    within 1e-10) this reduces to ``<psi|rho|psi>``, which is used directly.
    """
    sigma, rho = as_density(sigma), as_density(rho)
    if sigma.shape != rho.shape:
        raise ValueError(f"dimension mismatch: {sigma.shape} vs {rho.shape}")
    for a, b in ((sigma, rho), (rho, sigma)):
        psi = _pure_vector(a)
        if psi is not None:
            return fidelity_pure(psi, b)
    return fidelity_sqrt(sigma, rho)


@dataclass(frozen=True)
class ResourceCount:
    m: int
    n: int
    bell_pairs: int


def resource_count(m: int, n: int) -> ResourceCount:
    """Bell pairs needed to send an ``m``-coefficient state to ``n`` receivers:
    ceil(log2(m**n)), computed exactly on integers."""
    m, n = int(m), int(n)
    if m < 2:
        raise ValueError("a state needs at least two coefficients")
    if n < 1:
        raise ValueError("need at least one receiver")
    # ceil(log2 x) == bit_length(x - 1) for integers x >= 1.
    return ResourceCount(m, n, (m**n - 1).bit_length())


@dataclass(frozen=True)
class ReceiverFidelity:
    per_branch: tuple[float, ...]
    average: float


def _target_vector(target) -> np.ndarray:
    return np.asarray(getattr(target, "vector", target), dtype=complex)


def receiver_fidelities(transcript, target, success_only: bool = False, receivers=None) -> dict:
    """Per-receiver branch fidelities and their probability-weighted mean.

    ``target`` is a single target (anything with a ``vector`` attribute, or
    a state vector) or a mapping from receiver to target. With
    ``success_only`` the mean is taken over success branches, renormalized
    by their total probability; failed branches report ``nan``.
    """
    branches = transcript.branches
    present = sorted({r for b in branches for r in b.outputs})
    if receivers is None:
        receivers = present
    out = {}
    for r in receivers:
        if r not in present:
            raise KeyError(f"receiver {r} does not appear in the transcript")
        t = target[r] if isinstance(target, Mapping) else target
        psi = _target_vector(t)
        per_branch, weight, acc = [], 0.0, 0.0
        for b in branches:
            if success_only and not b.success:
                per_branch.append(float("nan"))
                continue
            f = uhlmann_fidelity(psi, b.outputs[r])
            per_branch.append(f)
            weight += b.probability
            acc += b.probability * f
        if success_only:
            avg = acc / weight if weight > 0 else float("nan")
        else:
            avg = acc
        out[r] = ReceiverFidelity(tuple(per_branch), avg)
    return out
