"""Fidelity of the two resource-preparation circuits under noise."""
from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channels import bell, cluster_yan
from .gates import PREP_CIRCUITS
from .linalg import tensor
from .metrics import fidelity_pure
from .noise import CHANNELS, NoiseMode, NoiseSpec, inject, make_channel

CSV_HEADER = "noise_type,mode,p,channel,fidelity"

# Receiver-owned qubits of each prepared resource.
TRAVELLING = {"bell-pair": (1, 3), "cluster": (2, 3)}


def ideal_state(channel: str) -> np.ndarray:
    if channel == "bell-pair":
        return tensor(bell("phi+"), bell("phi+"))
    if channel == "cluster":
        return cluster_yan()
    raise ValueError(f"unknown channel {channel!r}; expected 'bell-pair' or 'cluster'")


def prep_fidelity(channel: str, kind: str, p: float, mode: str = "per_gate") -> float:
    """Fidelity between the noisy and the ideal output of a preparation circuit."""
    psi = ideal_state(channel)
    spec = NoiseSpec(make_channel(kind, p), NoiseMode(mode))
    rho = inject(PREP_CIRCUITS[channel], 4, spec, transmitted=TRAVELLING[channel])
    return fidelity_pure(psi, rho)


@dataclass(frozen=True)
class SweepConfig:
    noise_types: tuple[str, ...] = tuple(CHANNELS)
    mode: str = "per_gate"
    start: float = 0.0
    stop: float = 0.5
    step: float = 0.05
    channels: tuple[str, ...] = ("bell-pair", "cluster")

    def __post_init__(self):
        if not 0.0 <= self.start <= self.stop <= 1.0:
            raise ValueError("grid must satisfy 0 <= start <= stop <= 1")
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        NoiseMode(self.mode)
        for kind in self.noise_types:
            make_channel(kind, 0.0)
        for c in self.channels:
            ideal_state(c)

    def grid(self) -> list[float]:
        # Rounded so that 0.1 + 0.05 prints as 0.15 in every run.
        count = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [round(self.start + k * self.step, 12) for k in range(count)]


def run_sweep(config: SweepConfig, workers: Optional[int] = None) -> list[tuple[str, str, float, str, float]]:
    """Rows ``(noise_type, mode, p, channel, fidelity)`` in grid order."""
    jobs = [
        (kind, config.mode, p, channel)
        for kind in config.noise_types
        for p in config.grid()
        for channel in config.channels
    ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        fids = list(pool.map(lambda j: prep_fidelity(j[3], j[0], j[2], j[1]), jobs))
    return [job + (f,) for job, f in zip(jobs, fids)]


def format_csv(rows: Sequence[tuple]) -> str:
    out = io.StringIO(newline="")
    out.write(CSV_HEADER + "\n")
    for kind, mode, p, channel, f in rows:
        out.write(f"{kind},{mode},{p:.12g},{channel},{f:.12g}\n")
    return out.getvalue()
