"""Entangled resource states and who holds which qubit."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Optional, Sequence

import numpy as np

from .gates import CLUSTER_PLUS_PREP, CLUSTER_PREP, run_statevector
from .linalg import ATOL_STRUCT, n_qubits_of, partial_trace, tensor

SQRT1_2 = 1 / math.sqrt(2)


@dataclass(frozen=True, order=True)
class Party:
    role: str
    index: int = 0

    def __post_init__(self):
        if self.role not in ("sender", "receiver", "controller"):
            raise ValueError(f"unknown role {self.role!r}")
        if self.role != "controller" and self.index < 1:
            raise ValueError("party indices start at 1")

    def __str__(self) -> str:
        if self.role == "controller":
            return "controller"
        return f"{self.role}{self.index}"


def sender(k: int = 1) -> Party:
    return Party("sender", k)


def receiver(k: int) -> Party:
    return Party("receiver", k)


CONTROLLER = Party("controller")


@dataclass(frozen=True)
class BroadcastChannel:
    """A pre-shared resource state.

    ``factors`` are the independent blocks whose tensor product is the full
    state; ``state`` is only built on first access, so large product
    channels can be described without allocating ``2**n`` amplitudes.
    ``ownership[q]`` is the party holding qubit ``q``.
    """

    factors: tuple[np.ndarray, ...]
    ownership: tuple[Party, ...]
    probabilistic: bool = False

    @property
    def n_qubits(self) -> int:
        return len(self.ownership)

    @cached_property
    def state(self) -> np.ndarray:
        return tensor(*self.factors)

    def qubits_of(self, party: Party) -> list[int]:
        return [q for q, owner in enumerate(self.ownership) if owner == party]

    @property
    def receivers(self) -> list[Party]:
        return sorted({p for p in self.ownership if p.role == "receiver"})


def _checked(psi: np.ndarray, n: int, what: str) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or len(psi) != 2**n:
        raise ValueError(f"{what} must be a {n}-qubit state vector")
    if abs(np.linalg.norm(psi) - 1) > ATOL_STRUCT:
        raise ValueError(f"{what} is not normalized")
    return psi


def _maximally_mixed_marginals(psi: np.ndarray) -> bool:
    n = n_qubits_of(len(psi))
    half = np.eye(2) / 2
    return all(np.allclose(partial_trace(psi, [q]), half, atol=ATOL_STRUCT) for q in range(n))


BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")


def bell(kind: str = "phi+") -> np.ndarray:
    """Bell states, with phi+ = (|00> + |11>)/sqrt(2) and psi+ = (|01> + |10>)/sqrt(2)."""
    kind = kind.lower()
    v = np.zeros(4, dtype=complex)
    if kind == "phi+":
        v[[0, 3]] = SQRT1_2, SQRT1_2
    elif kind == "phi-":
        v[[0, 3]] = SQRT1_2, -SQRT1_2
    elif kind == "psi+":
        v[[1, 2]] = SQRT1_2, SQRT1_2
    elif kind == "psi-":
        v[[1, 2]] = SQRT1_2, -SQRT1_2
    else:
        raise ValueError(f"unknown Bell state {kind!r}; expected one of {BELL_KINDS}")
    return v


def nonmax_bell(a: float, b: complex) -> np.ndarray:
    """a|00> + b|11>."""
    if abs(a * a + abs(b) ** 2 - 1) > ATOL_STRUCT:
        raise ValueError("a**2 + |b|**2 must equal 1")
    v = np.zeros(4, dtype=complex)
    v[0], v[3] = a, b
    return v


def ghz(a: float = SQRT1_2, b: complex = SQRT1_2) -> np.ndarray:
    """a|000> + b|111>; the default is the maximally entangled GHZ state."""
    if abs(a * a + abs(b) ** 2 - 1) > ATOL_STRUCT:
        raise ValueError("a**2 + |b|**2 must equal 1")
    v = np.zeros(8, dtype=complex)
    v[0], v[7] = a, b
    return v


def cluster_yan() -> np.ndarray:
    """(|0000> + |0101> + |1010> - |1111>)/2."""
    v = np.zeros(16, dtype=complex)
    v[[0b0000, 0b0101, 0b1010]] = 0.5
    v[0b1111] = -0.5
    return v


def cluster_plus() -> np.ndarray:
    """(|0000> + |0101> + |1010> + |1111>)/2, equal to Bell pairs on (0,2) and (1,3)."""
    v = np.zeros(16, dtype=complex)
    v[[0b0000, 0b0101, 0b1010, 0b1111]] = 0.5
    return v


def faithful_broadcast_state() -> np.ndarray:
    """(|0001> + |0110> + |1011> + |1100>)/2, an alternative four-qubit
    broadcast resource. No protocol here uses it."""
    v = np.zeros(16, dtype=complex)
    v[[0b0001, 0b0110, 0b1011, 0b1100]] = 0.5
    return v


def cluster_from_circuit(sign: int = -1) -> np.ndarray:
    return run_statevector(CLUSTER_PREP if sign < 0 else CLUSTER_PLUS_PREP, 4)


def cluster_channel(state: Optional[np.ndarray] = None) -> BroadcastChannel:
    """Sender keeps qubits 0 and 1; qubits 2 and 3 go to receivers 1 and 2."""
    state = cluster_yan() if state is None else _checked(state, 4, "cluster state")
    return BroadcastChannel((state,), (sender(1), sender(1), receiver(1), receiver(2)))


def channel_general(parts: Sequence[np.ndarray]) -> BroadcastChannel:
    """Product of two-qubit links; the first qubit of link i stays with the
    sender, the second goes to receiver i."""
    if len(parts) == 0:
        raise ValueError("need at least one link")
    parts = tuple(_checked(p, 2, f"link {i + 1}") for i, p in enumerate(parts))
    owners = []
    for i in range(len(parts)):
        owners += [sender(1), receiver(i + 1)]
    probabilistic = not all(_maximally_mixed_marginals(p) for p in parts)
    return BroadcastChannel(parts, tuple(owners), probabilistic)


def bell_links(m: int, kind: str = "phi+") -> BroadcastChannel:
    """``m`` identical Bell links without materializing the product state."""
    if m < 1:
        raise ValueError("need at least one receiver")
    link = bell(kind)
    owners = []
    for i in range(m):
        owners += [sender(1), receiver(i + 1)]
    return BroadcastChannel((link,) * m, tuple(owners))


def channel_joint(parts: Sequence[np.ndarray]) -> BroadcastChannel:
    """Product of three-qubit blocks for two senders: per block the first
    qubit is sender 1's, the second sender 2's, the third receiver i's."""
    if len(parts) == 0:
        raise ValueError("need at least one block")
    parts = tuple(_checked(p, 3, f"block {i + 1}") for i, p in enumerate(parts))
    owners = []
    for i in range(len(parts)):
        owners += [sender(1), sender(2), receiver(i + 1)]
    probabilistic = not all(_maximally_mixed_marginals(p) for p in parts)
    return BroadcastChannel(parts, tuple(owners), probabilistic)


def _controller_qubits(m: int) -> int:
    return max(1, math.ceil(math.log2(m)))


def channel_controlled(channels: Sequence) -> BroadcastChannel:
    """(1/sqrt(m)) sum_k |chi_k>|k>, with the index register held by the controller.

    The ``m`` candidate channels must be pairwise distinct. The controller
    register has ``ceil(log2 m)`` qubits (one qubit for ``m = 2``) and ``|k>``
    is its computational basis.
    """
    states = [c.state if isinstance(c, BroadcastChannel) else np.asarray(c, dtype=complex) for c in channels]
    m = len(states)
    if m < 2:
        raise ValueError("a controlled channel needs at least two candidate channels")
    dim = len(states[0])
    n = n_qubits_of(dim)
    for i, s in enumerate(states):
        _checked(s, n, f"candidate channel {i + 1}")
    for i in range(m):
        for j in range(i + 1, m):
            if abs(abs(np.vdot(states[i], states[j])) - 1) < ATOL_STRUCT:
                raise ValueError(f"candidate channels {i + 1} and {j + 1} coincide")
    a = _controller_qubits(m)
    total = np.zeros(dim * 2**a, dtype=complex)
    for k, s in enumerate(states):
        anc = np.zeros(2**a, dtype=complex)
        anc[k] = 1.0
        total += np.kron(s, anc)
    total /= math.sqrt(m)
    first = channels[0]
    if isinstance(first, BroadcastChannel):
        owners = first.ownership
    else:
        owners = tuple(sender(1) if q % 2 == 0 else receiver(q // 2 + 1) for q in range(n))
    return BroadcastChannel((total,), tuple(owners) + (CONTROLLER,) * a)


def channel_multidirectional(
    n: int, pair_states: Optional[Mapping[tuple[int, int], np.ndarray]] = None
) -> BroadcastChannel:
    """One link per ordered pair (i, j), i != j, in lexicographic order.

    In link (i, j) party i holds the first qubit (as sender) and party j
    the second (as receiver). Missing ``pair_states`` default to phi+.
    """
    if n < 2:
        raise ValueError("multi-directional broadcasting needs at least two parties")
    pairs = ordered_pairs(n)
    if pair_states is None:
        pair_states = {pair: bell("phi+") for pair in pairs}
    if set(pair_states) != set(pairs):
        missing = sorted(set(pairs) - set(pair_states))
        extra = sorted(set(pair_states) - set(pairs))
        raise ValueError(f"pair states must cover every ordered pair; missing {missing}, extra {extra}")
    factors, owners = [], []
    for i, j in pairs:
        factors.append(_checked(pair_states[(i, j)], 2, f"link {(i, j)}"))
        owners += [sender(i), receiver(j)]
    return BroadcastChannel(tuple(factors), tuple(owners))


def ordered_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
