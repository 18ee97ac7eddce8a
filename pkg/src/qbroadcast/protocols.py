"""Broadcasting protocols for known single-qubit states.

Every protocol is executed by exhaustive branch enumeration on density
matrices: each measurement outcome is followed with its exact probability.
Protocols built on a product of independent links (Bell pairs, GHZ blocks)
are simulated one link at a time and the per-link branch lists are combined
as a Cartesian product, which is exact because links share no entanglement
and all operations and noise act locally on a link.

Corrections are Pauli words written as operator products (``"ZX"`` means
Z after X). Receiver states are compared with targets via fidelity, so
global phases are irrelevant throughout.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Hashable, Mapping, Optional, Sequence

import numpy as np

from . import channels as ch
from .channels import CONTROLLER, Party, receiver, sender
from .gates import CLUSTER_PLUS_PREP, CLUSTER_PREP, Gate, cx, h, p as p_gate, pauli_word
from .linalg import (
    ATOL_EQ,
    ATOL_STRUCT,
    conjugate_by,
    density,
    measure_density,
    partial_trace,
    tensor,
)
from .metrics import uhlmann_fidelity
from .noise import NoiseMode, NoiseSpec, apply_transmitted, inject

REAL_POLAR = "real_polar"
EQUATORIAL = "equatorial"
GENERAL = "general"
TARGET_KINDS = (REAL_POLAR, EQUATORIAL, GENERAL)

# Candidate receiver corrections, in order of preference.
CORRECTION_WORDS = ("I", "Z", "X", "ZX")


class UnsupportedTargetError(ValueError):
    pass


class CorrectionError(ValueError):
    """No Pauli correction completes the protocol for this target class."""


@dataclass(frozen=True)
class KnownQubit:
    """cos(theta)|0> + exp(i phi) sin(theta)|1>, tagged by class.

    Real-polar states have phi = 0; equatorial states have theta = pi/4.
    """

    kind: str
    theta: float = math.pi / 4
    phi: float = 0.0

    def __post_init__(self):
        if self.kind not in TARGET_KINDS:
            raise ValueError(f"unknown target class {self.kind!r}")
        if self.kind == REAL_POLAR and self.phi != 0.0:
            raise ValueError("real-polar targets carry no phase")
        if self.kind == EQUATORIAL and not math.isclose(self.theta, math.pi / 4):
            raise ValueError("equatorial targets have theta = pi/4")

    @classmethod
    def real_polar(cls, theta: float) -> "KnownQubit":
        return cls(REAL_POLAR, float(theta), 0.0)

    @classmethod
    def equatorial(cls, phi: float) -> "KnownQubit":
        return cls(EQUATORIAL, math.pi / 4, float(phi))

    @classmethod
    def general(cls, theta: float, phi: float) -> "KnownQubit":
        return cls(GENERAL, float(theta), float(phi))

    @classmethod
    def from_amplitudes(cls, alpha: float, beta: float) -> "KnownQubit":
        """Real-polar target alpha|0> + beta|1> with real amplitudes."""
        if isinstance(alpha, complex) or isinstance(beta, complex):
            raise TypeError("amplitudes must be real")
        if abs(alpha * alpha + beta * beta - 1) > ATOL_STRUCT:
            raise ValueError("alpha**2 + beta**2 must equal 1")
        return cls.real_polar(math.atan2(beta, alpha))

    @property
    def alpha(self) -> complex:
        return complex(math.cos(self.theta))

    @property
    def beta(self) -> complex:
        return math.sin(self.theta) * complex(math.cos(self.phi), math.sin(self.phi))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)


@dataclass(frozen=True)
class Message:
    source: Party
    dest: Party
    bits: str


@dataclass(frozen=True)
class Correction:
    party: Party
    pauli: str
    triggered_by: tuple[Message, ...]


@dataclass(frozen=True)
class Branch:
    """One measurement history.

    ``outcomes`` holds one bit string per measurement in the order they
    were made; ``outputs`` maps each receiving port to its final density
    matrix after corrections.
    """

    outcomes: tuple[str, ...]
    probability: float
    messages: tuple[Message, ...]
    corrections: tuple[Correction, ...]
    outputs: Mapping[Hashable, np.ndarray]
    success: bool = True

    @property
    def label(self) -> str:
        return "".join(self.outcomes)


@dataclass(frozen=True)
class Transcript:
    protocol: str
    branches: tuple[Branch, ...]
    resources: Mapping[str, int]
    info: Mapping[str, object] = field(default_factory=dict)

    @property
    def total_probability(self) -> float:
        return float(sum(b.probability for b in self.branches))

    @property
    def success_probability(self) -> float:
        return float(sum(b.probability for b in self.branches if b.success))

    @property
    def ports(self) -> list:
        return sorted({k for b in self.branches for k in b.outputs})

    def bits_to(self, party: Party) -> int:
        """Classical bits delivered to ``party`` (identical in every branch)."""
        counts = {sum(len(m.bits) for m in b.messages if m.dest == party) for b in self.branches}
        if len(counts) != 1:
            raise ValueError(f"classical cost to {party} varies between branches")
        return counts.pop()

    def average_output(self, port, success_only: bool = False) -> np.ndarray:
        rho, weight = 0, 0.0
        for b in self.branches:
            if success_only and not b.success:
                continue
            rho = rho + b.probability * b.outputs[port]
            weight += b.probability
        return rho / weight

    def outcome_distribution(self) -> dict[str, float]:
        dist: dict[str, float] = {}
        for b in self.branches:
            dist[b.label] = dist.get(b.label, 0.0) + b.probability
        return dist


@dataclass(frozen=True)
class CorrectionRule:
    """Maps an outcome label to one Pauli word per receiving port."""

    protocol: str
    target: str
    table: Mapping[str, tuple[str, ...]]

    def __getitem__(self, label: str) -> tuple[str, ...]:
        return self.table[label]


# ---------------------------------------------------------------------------
# Measurement bases


def rsp_basis(target: np.ndarray, link: Optional[np.ndarray] = None) -> list[np.ndarray]:
    """Sender basis for one link a|00> + b|11>.

    Outcome 0 leaves the receiver exactly in ``target``. For phi+ and a
    real target this is {alpha|0> + beta|1>, beta|0> - alpha|1>}.
    """
    alpha, beta = np.asarray(target, dtype=complex)
    a, b = (1 / math.sqrt(2), 1 / math.sqrt(2)) if link is None else (link[0], link[3])
    v0 = np.array([np.conj(alpha / a), np.conj(beta / b)])
    v0 /= np.linalg.norm(v0)
    v1 = np.array([np.conj(v0[1]), -np.conj(v0[0])])
    return [v0, v1]


def yan_basis(alpha: float, beta: float) -> list[np.ndarray]:
    """Two-qubit sender basis of the four-qubit cluster scheme (real amplitudes only)."""
    for x in (alpha, beta):
        if isinstance(x, complex) or np.iscomplexobj(x):
            raise TypeError("the cluster-scheme basis is only orthonormal for real amplitudes")
    a, b = float(alpha), float(beta)
    if abs(a * a + b * b - 1) > ATOL_STRUCT:
        raise ValueError("alpha**2 + beta**2 must equal 1")
    return [
        np.array([a * a, a * b, a * b, -b * b], dtype=complex),
        np.array([a * b, -a * a, b * b, a * b], dtype=complex),
        np.array([a * b, b * b, -a * a, a * b], dtype=complex),
        np.array([b * b, -a * b, -a * b, -a * a], dtype=complex),
    ]


def equatorial_basis(chi: float) -> list[np.ndarray]:
    """{(|0> + e^{i chi}|1>)/sqrt2, (|0> - e^{i chi}|1>)/sqrt2}."""
    e = complex(math.cos(chi), math.sin(chi))
    s = 1 / math.sqrt(2)
    return [np.array([s, s * e]), np.array([s, -s * e])]


BELL_BASIS = [ch.bell(k) for k in ch.BELL_KINDS]

# Receiver-side Pauli turning phi+ into each Bell state, (I x P)|phi+>.
BELL_FRAME = {"phi+": "I", "phi-": "Z", "psi+": "X", "psi-": "ZX"}


# ---------------------------------------------------------------------------
# Raw (uncorrected) link simulations. Each returns a list of
# (outcome bits, probability, [receiver density matrices]).

Raw = list[tuple[tuple[str, ...], float, list[np.ndarray]]]


def _local_noise(noise: Optional[NoiseSpec], offset: int, width: int) -> Optional[NoiseSpec]:
    # Restrict a transmitted-mode scope given in whole-channel qubit indices to one link.
    if noise is None or noise.mode is NoiseMode.PER_GATE or noise.scope is None:
        return noise
    local = tuple(q - offset for q in noise.scope if offset <= q < offset + width)
    if not local:
        return None
    return NoiseSpec(noise.channel, noise.mode, local)


def _prepare(
    ideal: np.ndarray,
    gates: Sequence[Gate],
    n: int,
    noise: Optional[NoiseSpec],
    travelling: Sequence[int],
    shift: int = 0,
) -> np.ndarray:
    """Density matrix of a freshly distributed resource.

    ``gates`` prepare ``ideal`` from |0...0> and are only simulated when
    per-gate noise is requested. ``shift`` offsets a
    link-local transmitted scope when extra qubits precede the link.
    """
    if noise is None:
        return density(ideal)
    if noise.mode is NoiseMode.PER_GATE:
        return inject(gates, n, noise)
    if noise.scope is not None:
        noise = NoiseSpec(noise.channel, noise.mode, tuple(q + shift for q in noise.scope))
    return apply_transmitted(density(ideal), noise, travelling)


def _bell_prep(kind: str, offset: int = 0) -> tuple[Gate, ...]:
    a, b = offset, offset + 1
    frame = {"phi+": (), "phi-": ("z",), "psi+": ("x",), "psi-": ("x", "z")}[kind]
    return (h(a), cx(a, b)) + tuple(Gate(g, (b,)) for g in frame)


def _link_prep(link, offset: int = 0) -> tuple[np.ndarray, Optional[tuple[Gate, ...]]]:
    # A link is a Bell-state name or an explicit two-qubit vector (no circuit known).
    if link is None:
        link = "phi+"
    if isinstance(link, str):
        return ch.bell(link), _bell_prep(link, offset)
    return np.asarray(link, dtype=complex), None


def _require_circuit(gates, noise: Optional[NoiseSpec]):
    if gates is None and noise is not None and noise.mode is NoiseMode.PER_GATE:
        raise ValueError("per-gate noise needs a preparation circuit for the link state")


def _rsp_raw(target: np.ndarray, noise: Optional[NoiseSpec], link=None, basis: Optional[list] = None) -> Raw:
    state, gates = _link_prep(link)
    _require_circuit(gates, noise)
    rho = _prepare(state, gates, 2, noise, [1])
    basis = rsp_basis(target, state) if basis is None else basis
    return [((str(k),), prob, [post]) for k, prob, post in measure_density(rho, [0], basis)]


def _teleport_raw(target: np.ndarray, noise: Optional[NoiseSpec], input_gates: Sequence[Gate] = (),
                  input_state: Optional[np.ndarray] = None, link=None) -> Raw:
    # Qubit 0 carries the locally prepared state, qubits 1 and 2 form the link.
    state, link_gates = _link_prep(link, offset=1)
    _require_circuit(link_gates, noise)
    start = np.asarray(target if input_state is None else input_state, dtype=complex)
    ideal_in = start
    for g in input_gates:
        ideal_in = g.matrix @ ideal_in
    if noise is not None and noise.mode is NoiseMode.PER_GATE:
        gates = [Gate(g.name, (0,), g.param) for g in input_gates] + list(link_gates)
        init = tensor(start, np.array([1, 0, 0, 0], dtype=complex))
        rho = inject(gates, 3, noise, rho=density(init))
    else:
        rho = _prepare(tensor(ideal_in, state), (), 3, noise, [2], shift=1)
    return [
        ((format(k, "02b"),), prob, [post])
        for k, prob, post in measure_density(rho, [0, 1], BELL_BASIS)
    ]


def _cluster_raw(alpha: float, beta: float, noise: Optional[NoiseSpec]) -> Raw:
    rho = _prepare(ch.cluster_yan(), CLUSTER_PREP, 4, noise, [2, 3])
    out = []
    for k, prob, post in measure_density(rho, [0, 1], yan_basis(alpha, beta)):
        out.append(((format(k, "02b"),), prob, [partial_trace(post, [0]), partial_trace(post, [1])]))
    return out


def _cluster_plus_raw(chi: float, noise: Optional[NoiseSpec]) -> Raw:
    rho = _prepare(ch.cluster_plus(), CLUSTER_PLUS_PREP, 4, noise, [2, 3])
    single = equatorial_basis(chi)
    basis = [np.kron(u, v) for u in single for v in single]
    out = []
    for k, prob, post in measure_density(rho, [0, 1], basis):
        out.append(((format(k, "02b"),), prob, [partial_trace(post, [0]), partial_trace(post, [1])]))
    return out


def _joint_raw(theta: float, phi: float, noise: Optional[NoiseSpec], adaptive: bool = True,
               block: Optional[np.ndarray] = None) -> Raw:
    block = ch.ghz() if block is None else block
    if noise is not None and noise.mode is NoiseMode.PER_GATE and not np.allclose(block, ch.ghz()):
        raise ValueError("per-gate noise is only modelled for GHZ blocks")
    rho = _prepare(block, (h(0), cx(0, 1), cx(1, 2)), 3, noise, [2])
    c, s = math.cos(theta), math.sin(theta)
    first = [np.array([c, s], dtype=complex), np.array([s, -c], dtype=complex)]
    out = []
    for k1, p1, mid in measure_density(rho, [0], first):
        chi = phi if (adaptive and k1 == 1) else -phi
        for k2, p2, post in measure_density(mid, [0], equatorial_basis(chi)):
            out.append(((str(k1), str(k2)), p1 * p2, [post]))
    return out


# ---------------------------------------------------------------------------
# Correction derivation


def _word_for(rho: np.ndarray, target: np.ndarray) -> Optional[str]:
    for word in CORRECTION_WORDS:
        u = pauli_word(word)
        if uhlmann_fidelity(target, u @ rho @ u.conj().T) > 1 - ATOL_EQ:
            return word
    return None


def _derive_table(raw_for: Callable[[KnownQubit], Raw], samples: Sequence[KnownQubit]) -> dict:
    # A word is kept for an outcome only if it restores the target for every sample.
    table: dict[str, list] = {}
    for target in samples:
        for outcomes, prob, states in raw_for(target):
            label = "".join(outcomes)
            words = table.setdefault(label, [list(CORRECTION_WORDS) for _ in states])
            for slot, rho in enumerate(states):
                if prob < ATOL_EQ:
                    continue
                words[slot] = [
                    w for w in words[slot]
                    if uhlmann_fidelity(target.vector, pauli_word(w) @ rho @ pauli_word(w).conj().T) > 1 - ATOL_EQ
                ]
    return {label: tuple(ws[0] if ws else None for ws in words) for label, words in table.items()}


_SAMPLES = {
    REAL_POLAR: tuple(KnownQubit.real_polar(t) for t in (0.37, 1.13, 2.29, 3.9, 5.5)),
    EQUATORIAL: tuple(KnownQubit.equatorial(f) for f in (0.41, 1.9, 3.3, 5.1)),
    GENERAL: tuple(KnownQubit.general(t, f) for t, f in ((0.37, 0.8), (1.13, 2.2), (2.29, 4.4), (0.9, 5.9))),
}


def _raw_factory(protocol: str) -> Callable[[KnownQubit], Raw]:
    if protocol == "bell-rsp":
        return lambda t: _rsp_raw(t.vector, None)
    if protocol == "teleport":
        return lambda t: _teleport_raw(t.vector, None)
    if protocol == "cluster":
        return lambda t: _cluster_raw(t.alpha.real, t.beta.real, None)
    if protocol == "cluster-fig3a":
        return lambda t: _cluster_plus_raw(-t.phi, None)
    if protocol == "joint":
        return lambda t: _joint_raw(t.theta, t.phi, None, adaptive=True)
    if protocol == "joint-nonadaptive":
        return lambda t: _joint_raw(t.theta, t.phi, None, adaptive=False)
    raise ValueError(f"unknown protocol {protocol!r}")


@lru_cache(maxsize=None)
def _class_table(protocol: str, kind: str) -> tuple:
    return tuple(sorted(_derive_table(_raw_factory(protocol), _SAMPLES[kind]).items()))


def derive_corrections(protocol: str, target) -> CorrectionRule:
    """Pauli corrections for every outcome of a deterministic protocol.

    ``target`` is either a class name (the rule must work for every member,
    checked on a fixed set of sample states) or a specific
    :class:`KnownQubit`. Raises :class:`CorrectionError` when some outcome
    admits no Pauli correction, e.g. general states under one-bit RSP.
    """
    if isinstance(target, KnownQubit):
        table = _derive_table(_raw_factory(protocol), [target])
        name = target.kind
    else:
        if target not in TARGET_KINDS:
            raise ValueError(f"unknown target class {target!r}")
        table = dict(_class_table(protocol, target))
        name = target
    missing = sorted(label for label, words in table.items() if None in words)
    if missing:
        raise CorrectionError(
            f"{protocol} has no Pauli correction for {name} targets on outcome(s) {missing}"
        )
    return CorrectionRule(protocol, name, table)


def _partial_rule(protocol: str, kind: str) -> dict:
    return dict(_class_table(protocol, kind))


# ---------------------------------------------------------------------------
# Branch assembly


def _apply_word(rho: np.ndarray, word: str) -> np.ndarray:
    return conjugate_by(rho, pauli_word(word), [0])


def _combine(parts: Sequence[list[Branch]]) -> tuple[Branch, ...]:
    out = []
    for combo in itertools.product(*parts):
        outputs = {}
        for b in combo:
            outputs.update(b.outputs)
        out.append(
            Branch(
                outcomes=tuple(o for b in combo for o in b.outcomes),
                probability=float(np.prod([b.probability for b in combo])),
                messages=tuple(m for b in combo for m in b.messages),
                corrections=tuple(c for b in combo for c in b.corrections),
                outputs=outputs,
                success=all(b.success for b in combo),
            )
        )
    return tuple(out)


def _single_link_branches(raw: Raw, src: Party, dst: Party, port, rule: Optional[dict]) -> list[Branch]:
    # Branches of a one-receiver link where the sender announces its outcome.
    branches = []
    for outcomes, prob, (rho,) in raw:
        label = "".join(outcomes)
        msg = Message(src, dst, label)
        word = None if rule is None else rule.get(label, (None,))[0]
        if word is None:
            branches.append(Branch(outcomes, prob, (msg,), (), {port: rho}, success=False))
        else:
            corr = Correction(dst, word, (msg,))
            branches.append(Branch(outcomes, prob, (msg,), (corr,), {port: _apply_word(rho, word)}))
    return branches


def _check_m(m: int):
    if m < 1:
        raise ValueError("need at least one receiver")


# ---------------------------------------------------------------------------
# Protocols


def run_cluster_broadcast(target: KnownQubit, noise: Optional[NoiseSpec] = None,
                          variant: str = "cluster") -> Transcript:
    """Two-receiver broadcast over a four-qubit cluster state.

    ``variant="cluster"`` uses the -|1111> cluster state with the two-qubit
    measurement basis built from the real amplitudes; only real-polar
    targets are admissible. ``variant="fig3a"`` uses the +|1111> cluster
    state, which is a pair of Bell links, measured qubit-wise in an
    equatorial basis; receiver i applies Z when bit i of the outcome is 1.
    """
    if variant == "cluster":
        if target.kind != REAL_POLAR:
            raise UnsupportedTargetError("the cluster scheme needs a real-polar target")
        rule = _partial_rule("cluster", REAL_POLAR)
        raw = _cluster_raw(target.alpha.real, target.beta.real, noise)
    elif variant == "fig3a":
        if not math.isclose(abs(target.alpha), abs(target.beta), abs_tol=1e-12):
            raise UnsupportedTargetError("the fig3a circuit needs |alpha| == |beta|")
        chi = -float(np.angle(target.beta / target.alpha))
        rule = _partial_rule("cluster-fig3a", EQUATORIAL)
        raw = _cluster_plus_raw(chi, noise)
    else:
        raise ValueError(f"unknown cluster variant {variant!r}")
    alice, receivers = sender(1), [receiver(1), receiver(2)]
    branches = []
    for outcomes, prob, states in raw:
        label = "".join(outcomes)
        msgs = tuple(Message(alice, r, label) for r in receivers)
        words = rule[label]
        corrs = tuple(Correction(r, w, (msg,)) for r, w, msg in zip(receivers, words, msgs))
        outputs = {r: _apply_word(rho, w) for r, w, rho in zip(receivers, words, states)}
        branches.append(Branch(outcomes, prob, msgs, corrs, outputs))
    return Transcript(
        f"cluster-{variant}" if variant != "cluster" else "cluster",
        tuple(branches),
        {"bell_pairs": 0, "cluster_states": 1},
        {"target": target, "rule": rule},
    )


def run_bell_rsp_broadcast(target: KnownQubit, m: int, mode: str = "rsp",
                           noise: Optional[NoiseSpec] = None) -> Transcript:
    """Broadcast to ``m`` receivers over ``m`` phi+ links.

    ``mode="rsp"`` costs one classical bit per receiver and is deterministic
    for real-polar and equatorial targets; a general target then succeeds
    only on outcome 0. ``mode="teleport"`` costs two bits per receiver and
    works for every target.
    """
    _check_m(m)
    if mode not in ("rsp", "teleport"):
        raise ValueError(f"unknown mode {mode!r}")
    alice = sender(1)
    parts = []
    for i in range(1, m + 1):
        local = _local_noise(noise, 2 * (i - 1), 2)
        if mode == "rsp":
            rule = _partial_rule("bell-rsp", target.kind)
            raw = _rsp_raw(target.vector, local)
        else:
            rule = _partial_rule("teleport", target.kind)
            raw = _teleport_raw(target.vector, local)
        parts.append(_single_link_branches(raw, alice, receiver(i), receiver(i), rule))
    return Transcript(f"bell-{mode}", _combine(parts), {"bell_pairs": m}, {"target": target, "mode": mode})


def run_probabilistic_broadcast(target: KnownQubit, links: Sequence[tuple[float, complex]],
                                noise: Optional[NoiseSpec] = None) -> Transcript:
    """One-bit broadcast over non-maximally entangled links a|00> + b|11>.

    Outcome 0 of the sender's measurement always leaves the exact target.
    Outcome 1 is a success only if a Pauli correction restores the target,
    which the sender can decide because it knows both the state and the channel.
    """
    if target.kind != REAL_POLAR:
        raise UnsupportedTargetError("probabilistic broadcast takes real-polar targets")
    if not links:
        raise ValueError("need at least one link")
    alice = sender(1)
    parts = []
    for i, (a, b) in enumerate(links, start=1):
        if abs(b) == 0:
            raise ValueError(f"link {i} is not entangled (b == 0)")
        if a < abs(b) - ATOL_STRUCT:
            raise ValueError(f"link {i} must satisfy a >= |b|")
        link = ch.nonmax_bell(a, b)
        if np.allclose(link, ch.bell("phi+")):
            link = "phi+"
        ideal = _rsp_raw(target.vector, None, link)
        rule = {}
        for outcomes, prob, (rho,) in ideal:
            rule["".join(outcomes)] = ("I",) if outcomes == ("0",) else (_word_for(rho, target.vector),)
        raw = _rsp_raw(target.vector, _local_noise(noise, 2 * (i - 1), 2), link)
        parts.append(_single_link_branches(raw, alice, receiver(i), receiver(i), rule))
    return Transcript(
        "probabilistic",
        _combine(parts),
        {"bell_pairs": len(links)},
        {"target": target, "links": tuple(links)},
    )


def run_joint_broadcast(theta: float, phi: float, m: int, noise: Optional[NoiseSpec] = None,
                        adaptive: bool = True) -> Transcript:
    """Two senders, one knowing theta and the other phi, over ``m`` GHZ blocks.

    Sender 1 measures in {cos|0> + sin|1>, sin|0> - cos|1>} and tells
    sender 2 the result; sender 2 then measures in an equatorial basis
    whose phase sign depends on that bit. With ``adaptive=False`` sender 2
    ignores the bit and only half the branches can be corrected.
    """
    _check_m(m)
    target = KnownQubit.general(theta, phi)
    protocol = "joint" if adaptive else "joint-nonadaptive"
    rule = _partial_rule(protocol, GENERAL)
    s1, s2 = sender(1), sender(2)
    parts = []
    for i in range(1, m + 1):
        bob = receiver(i)
        raw = _joint_raw(theta, phi, _local_noise(noise, 3 * (i - 1), 3), adaptive)
        branches = []
        for outcomes, prob, (rho,) in raw:
            k1, k2 = outcomes
            to_s2 = Message(s1, s2, k1)
            m1, m2 = Message(s1, bob, k1), Message(s2, bob, k2)
            word = rule["".join(outcomes)][0]
            if word is None:
                branches.append(Branch(outcomes, prob, (to_s2, m1, m2), (), {bob: rho}, success=False))
            else:
                corr = Correction(bob, word, (m1, m2))
                branches.append(Branch(outcomes, prob, (to_s2, m1, m2), (corr,), {bob: _apply_word(rho, word)}))
        parts.append(branches)
    return Transcript(
        protocol,
        _combine(parts),
        {"bell_pairs": 0, "ghz_states": m},
        {"target": target, "adaptive": adaptive},
    )


def run_phase_chain(theta: float, phases: Sequence[float], m: int,
                    noise: Optional[NoiseSpec] = None) -> Transcript:
    """n = len(phases) + 1 senders encode a state in sequence, then the last
    one teleports it to ``m`` receivers.

    Sender 1 prepares ``m`` copies of cos|0> + sin|1>; sender j + 1 applies
    P(phases[j]) to every copy; sender n teleports copy i to receiver i
    over its own phi+ link. Only sender n shares entanglement.
    """
    if len(phases) == 0:
        raise ValueError("a phase chain needs at least two senders")
    _check_m(m)
    n = len(phases) + 1
    total = float(sum(phases))
    target = KnownQubit.general(theta, total)
    start = np.array([math.cos(theta), math.sin(theta)], dtype=complex)
    gates = [p_gate(f, 0) for f in phases]
    rule = _partial_rule("teleport", GENERAL)
    last = sender(n)
    parts = []
    for i in range(1, m + 1):
        local = _local_noise(noise, 2 * (i - 1), 2)
        raw = _teleport_raw(target.vector, local, input_gates=gates, input_state=start)
        parts.append(_single_link_branches(raw, last, receiver(i), receiver(i), rule))
    return Transcript(
        "phase-chain",
        _combine(parts),
        {"bell_pairs": m},
        {"target": target, "senders": n, "phases": tuple(phases)},
    )


def draw_controller_secrets(m: int, seed) -> tuple[str, ...]:
    rng = np.random.default_rng(seed)
    return tuple(ch.BELL_KINDS[k] for k in rng.integers(0, 4, size=m))


def _reduce_word(word: str) -> str:
    # Canonical representative of a Pauli product, up to global phase.
    u = pauli_word(word)
    for w in CORRECTION_WORDS:
        if abs(abs(np.trace(pauli_word(w).conj().T @ u)) - 2) < ATOL_STRUCT:
            return w
    raise AssertionError(word)


def run_controlled_broadcast(target: KnownQubit, m: int, disclose: bool, seed=None,
                             noise: Optional[NoiseSpec] = None) -> Transcript:
    """Broadcast over Bell links whose identities only the controller knows.

    The controller draws each link uniformly from the four Bell states. The
    sender acts as if every link were phi+. Without disclosure a receiver
    cannot tell which of the four frames it holds, so its state is the
    uniform mixture over them. After disclosure each receiver undoes its
    link's Bell frame as well.
    """
    _check_m(m)
    mode = "teleport" if target.kind == GENERAL else "rsp"
    secrets = draw_controller_secrets(m, seed)
    rule = _partial_rule("bell-rsp" if mode == "rsp" else "teleport", target.kind)
    alice = sender(1)
    parts = []
    for i, secret in enumerate(secrets, start=1):
        bob = receiver(i)
        local = _local_noise(noise, 2 * (i - 1), 2)
        runs = {}
        for kind in ch.BELL_KINDS:
            if kind != secret and disclose:
                continue
            if mode == "rsp":
                runs[kind] = _rsp_raw(target.vector, local, link=kind, basis=rsp_basis(target.vector))
            else:
                runs[kind] = _teleport_raw(target.vector, local, link=kind)
        branches = []
        for idx, (outcomes, prob, _) in enumerate(runs[secret]):
            label = "".join(outcomes)
            msg = Message(alice, bob, label)
            base = rule[label][0]
            if disclose:
                reveal = Message(CONTROLLER, bob, format(ch.BELL_KINDS.index(secret), "02b"))
                word = _reduce_word(base + BELL_FRAME[secret])
                rho = runs[secret][idx][2][0]
                branches.append(
                    Branch(outcomes, prob, (msg, reveal), (Correction(bob, word, (msg, reveal)),),
                           {bob: _apply_word(rho, word)})
                )
            else:
                mixed = sum(_apply_word(runs[k][idx][2][0], base) for k in ch.BELL_KINDS) / 4
                branches.append(
                    Branch(outcomes, prob, (msg,), (Correction(bob, base, (msg,)),), {bob: mixed}, success=False)
                )
        parts.append(branches)
    return Transcript(
        "controlled",
        _combine(parts),
        {"bell_pairs": m},
        {"target": target, "secrets": secrets, "disclosed": disclose, "seed": seed, "mode": mode},
    )


def run_multidirectional(n: int, targets: Mapping[tuple[int, int], KnownQubit],
                         noise: Optional[NoiseSpec] = None) -> Transcript:
    """Every party broadcasts to every other over its own phi+ link.

    Outputs are keyed by the ordered pair ``(i, j)``: party j's copy of
    party i's state. Real-polar and equatorial targets use one-bit RSP,
    general targets teleportation.
    """
    if n < 2:
        raise ValueError("multi-directional broadcasting needs at least two parties")
    pairs = ch.ordered_pairs(n)
    if set(targets) != set(pairs):
        raise ValueError("targets must cover every ordered pair (i, j), i != j")
    parts = []
    for idx, (i, j) in enumerate(pairs):
        t = targets[(i, j)]
        local = _local_noise(noise, 2 * idx, 2)
        if t.kind == GENERAL:
            raw, rule = _teleport_raw(t.vector, local), _partial_rule("teleport", GENERAL)
        else:
            raw, rule = _rsp_raw(t.vector, local), _partial_rule("bell-rsp", t.kind)
        parts.append(_single_link_branches(raw, sender(i), receiver(j), (i, j), rule))
    return Transcript(
        "multidirectional",
        _combine(parts),
        {"bell_pairs": len(pairs)},
        {"targets": dict(targets), "parties": n},
    )


def sample_outcomes(transcript: Transcript, shots: int, seed=None) -> dict[str, int]:
    """Emulate ``shots`` runs by sampling branches with their exact probabilities."""
    rng = np.random.default_rng(seed)
    labels = [b.label for b in transcript.branches]
    probs = np.array([b.probability for b in transcript.branches])
    counts = rng.multinomial(shots, probs / probs.sum())
    hist: dict[str, int] = {}
    for label, c in zip(labels, counts):
        hist[label] = hist.get(label, 0) + int(c)
    return dict(sorted(hist.items()))
