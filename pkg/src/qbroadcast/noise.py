"""Single-qubit Kraus channels and the two ways of attaching them to a run.

``TRANSMITTED`` applies a channel once to each travelling (receiver-owned)
qubit after the resource state has been prepared. ``PER_GATE`` applies it
to every qubit a gate touches, right after that gate; two-qubit gates get
the channel independently on both qubits.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .gates import I2, X, Y, Z, Gate, run_density
from .linalg import conjugate_by, n_qubits_of

COMPLETENESS_ATOL = 1e-12


class NoiseKind(str, enum.Enum):
    BIT_FLIP = "bit_flip"
    DEPOLARIZING = "depolarizing"
    AMPLITUDE_DAMPING = "amplitude_damping"
    PHASE_DAMPING = "phase_damping"


class NoiseMode(str, enum.Enum):
    TRANSMITTED = "transmitted"
    PER_GATE = "per_gate"


@dataclass(frozen=True)
class NoiseChannel:
    kind: str
    p: float
    kraus: tuple[np.ndarray, ...] = field(repr=False)

    def __call__(self, rho: np.ndarray, target: int) -> np.ndarray:
        return apply_kraus(rho, self, target)


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    return p


def bit_flip(p: float) -> NoiseChannel:
    """Flip with probability ``p``: K0 = sqrt(1-p) I, K1 = sqrt(p) X."""
    p = _check_p(p)
    return NoiseChannel(NoiseKind.BIT_FLIP.value, p, (np.sqrt(1 - p) * I2, np.sqrt(p) * X))


def depolarizing(p: float) -> NoiseChannel:
    """rho -> (1 - 3p/4) rho + (p/4)(X rho X + Y rho Y + Z rho Z)."""
    p = _check_p(p)
    s = np.sqrt(p) / 2
    return NoiseChannel(
        NoiseKind.DEPOLARIZING.value, p, (np.sqrt(1 - 3 * p / 4) * I2, s * X, s * Y, s * Z)
    )


def amplitude_damping(p: float) -> NoiseChannel:
    p = _check_p(p)
    k0 = np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
    return NoiseChannel(NoiseKind.AMPLITUDE_DAMPING.value, p, (k0, k1))


def phase_damping(p: float) -> NoiseChannel:
    p = _check_p(p)
    return NoiseChannel(
        NoiseKind.PHASE_DAMPING.value,
        p,
        (
            np.sqrt(1 - p) * I2,
            np.sqrt(p) * np.diag([1, 0]).astype(complex),
            np.sqrt(p) * np.diag([0, 1]).astype(complex),
        ),
    )


CHANNELS = {
    NoiseKind.BIT_FLIP.value: bit_flip,
    NoiseKind.DEPOLARIZING.value: depolarizing,
    NoiseKind.AMPLITUDE_DAMPING.value: amplitude_damping,
    NoiseKind.PHASE_DAMPING.value: phase_damping,
}


def make_channel(kind: str, p: float) -> NoiseChannel:
    try:
        factory = CHANNELS[NoiseKind(kind).value]
    except ValueError:
        raise ValueError(f"unknown noise kind {kind!r}; expected one of {sorted(CHANNELS)}") from None
    return factory(p)


@dataclass(frozen=True)
class CompletenessReport:
    ok: bool
    max_deviation: float

    def __bool__(self) -> bool:
        return self.ok


def validate_completeness(channel: NoiseChannel, atol: float = COMPLETENESS_ATOL) -> CompletenessReport:
    """Check sum_i K_i^dagger K_i == I entrywise."""
    if len(channel.kraus) == 0:
        return CompletenessReport(False, 1.0)
    total = sum(k.conj().T @ k for k in channel.kraus)
    dev = float(np.max(np.abs(total - np.eye(total.shape[0]))))
    return CompletenessReport(dev <= atol, dev)


def apply_kraus(rho: np.ndarray, channel: NoiseChannel, target: int) -> np.ndarray:
    report = validate_completeness(channel)
    if not report:
        raise ValueError(f"Kraus set is not trace preserving (deviation {report.max_deviation:.3g})")
    return sum(conjugate_by(rho, k, [target]) for k in channel.kraus)


@dataclass(frozen=True)
class NoiseSpec:
    """Where and how a channel is attached.

    ``scope`` is a tuple of qubit indices in ``TRANSMITTED`` mode (``None``
    lets the caller pick its receiver-owned qubits) and a tuple of gate
    names in ``PER_GATE`` mode (``None`` means every gate).
    """

    channel: NoiseChannel
    mode: NoiseMode = NoiseMode.TRANSMITTED
    scope: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", NoiseMode(self.mode))
        if self.scope is not None:
            object.__setattr__(self, "scope", tuple(self.scope))
            if self.mode is NoiseMode.TRANSMITTED and not all(isinstance(q, (int, np.integer)) for q in self.scope):
                raise ValueError("transmitted-qubit scope must list qubit indices")
            if self.mode is NoiseMode.PER_GATE and not all(isinstance(g, str) for g in self.scope):
                raise ValueError("per-gate scope must list gate names")

    @classmethod
    def of(cls, kind: str, p: float, mode: str = "transmitted", scope=None) -> "NoiseSpec":
        return cls(make_channel(kind, p), NoiseMode(mode), scope)


def apply_transmitted(rho: np.ndarray, spec: NoiseSpec, qubits: Sequence[int]) -> np.ndarray:
    """Apply the channel once to each of ``qubits`` (or to ``spec.scope``)."""
    n = n_qubits_of(len(rho))
    targets = spec.scope if spec.scope is not None else tuple(qubits)
    for q in targets:
        if not 0 <= q < n:
            raise ValueError(f"noise scope names qubit {q} but the register has {n}")
    for q in targets:
        rho = apply_kraus(rho, spec.channel, q)
    return rho


def gate_noise_hook(spec: NoiseSpec):
    def hook(rho: np.ndarray, gate: Gate) -> np.ndarray:
        if spec.scope is not None and gate.name not in spec.scope:
            return rho
        for q in gate.qubits:
            rho = apply_kraus(rho, spec.channel, q)
        return rho

    return hook


def inject(
    gates: Iterable[Gate],
    n: int,
    spec: Optional[NoiseSpec],
    transmitted: Sequence[int] = (),
    rho: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Run ``gates`` on ``n`` qubits with noise attached according to ``spec``.

    In transmitted mode the channel hits ``transmitted`` (or ``spec.scope``)
    once the circuit has finished.
    """
    gates = list(gates)
    if spec is None:
        return run_density(gates, n, rho)
    if spec.mode is NoiseMode.PER_GATE:
        return run_density(gates, n, rho, after_gate=gate_noise_hook(spec))
    out = run_density(gates, n, rho)
    return apply_transmitted(out, spec, transmitted)
