"""Brute-force reference computations used to freeze expected values.

Nothing here imports the package under test: operators are built from
explicit Kronecker products and every branch is enumerated on the full
register.
"""
import itertools

import numpy as np

I = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)
PAULI = [I, X, Y, Z]


def kron(*ops):
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def single(op, q, n):
    return kron(*[op if k == q else I for k in range(n)])


def controlled(u, c, t, n):
    return single(P0, c, n) + single(P1, c, n) @ single(u, t, n)


def cz(a, b, n):
    return controlled(Z, a, b, n)


def reduced(psi_or_rho, keep, n):
    """Reduced state on ``keep`` by explicit summation over the rest."""
    rho = psi_or_rho if psi_or_rho.ndim == 2 else np.outer(psi_or_rho, psi_or_rho.conj())
    d = len(keep)
    out = np.zeros((2**d, 2**d), dtype=complex)
    rest = [q for q in range(n) if q not in keep]
    for i_bits in itertools.product((0, 1), repeat=d):
        for j_bits in itertools.product((0, 1), repeat=d):
            s = 0
            for r_bits in itertools.product((0, 1), repeat=len(rest)):
                bi = [0] * n
                bj = [0] * n
                for q, b in zip(keep, i_bits):
                    bi[q] = b
                for q, b in zip(keep, j_bits):
                    bj[q] = b
                for q, b in zip(rest, r_bits):
                    bi[q] = b
                    bj[q] = b
                s += rho[int("".join(map(str, bi)), 2), int("".join(map(str, bj)), 2)]
            out[int("".join(map(str, i_bits)), 2), int("".join(map(str, j_bits)), 2)] = s
    return out


def overlap_fidelity(psi, rho):
    return float(np.real(psi.conj() @ rho @ psi))


def kraus_sum(rho, ks):
    return sum(k @ rho @ k.conj().T for k in ks)


def best_pauli_fidelity(rho, psi):
    return max(overlap_fidelity(psi, p @ rho @ p.conj().T) for p in PAULI)


def projector_branches(psi, measured_ops):
    """Enumerate outcomes of commuting projective measurements on a pure state.

    ``measured_ops`` is a list, per measurement, of full-register projectors.
    Returns (outcome tuple, probability, normalized post state).
    """
    out = []
    for combo in itertools.product(*[range(len(m)) for m in measured_ops]):
        v = psi
        for ops, k in zip(measured_ops, combo):
            v = ops[k] @ v
        p = float(np.vdot(v, v).real)
        out.append((combo, p, v / np.sqrt(p) if p > 0 else v))
    return out


def rank_one(v):
    return np.outer(v, v.conj())


def bell_rsp_oracle(alpha, beta, m):
    """Full-register Bell-pair RSP to ``m`` receivers with real amplitudes.

    Qubits 2i (sender) and 2i+1 (receiver i). Returns
    [(outcomes, prob, [receiver states before correction])].
    """
    n = 2 * m
    phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    psi = kron(*[phi] * m)
    b0 = np.array([alpha, beta], dtype=complex)
    b1 = np.array([beta, -alpha], dtype=complex)
    meas = [[single(rank_one(b0), 2 * i, n), single(rank_one(b1), 2 * i, n)] for i in range(m)]
    return [
        (combo, p, [reduced(v, [2 * i + 1], n) for i in range(m)])
        for combo, p, v in projector_branches(psi, meas)
    ]


def probabilistic_oracle(theta, links):
    """Success probability of one-bit RSP over links a|00> + b|11>.

    The sender's outcome-0 vector is proportional to (alpha/a, beta/b)
    (conjugated), which leaves the receiver exactly in the target; a branch
    counts as a success if some Pauli turns every receiver state into the
    target.
    """
    alpha, beta = np.cos(theta), np.sin(theta)
    target = np.array([alpha, beta], dtype=complex)
    m = len(links)
    n = 2 * m
    psi = kron(*[np.array([a, 0, 0, b], dtype=complex) for a, b in links])
    meas = []
    for i, (a, b) in enumerate(links):
        v0 = np.conj(np.array([alpha / a, beta / b], dtype=complex))
        v0 /= np.linalg.norm(v0)
        v1 = np.array([np.conj(v0[1]), -np.conj(v0[0])])
        meas.append([single(rank_one(v0), 2 * i, n), single(rank_one(v1), 2 * i, n)])
    success = 0.0
    for combo, p, v in projector_branches(psi, meas):
        if p < 1e-15:
            continue
        if all(best_pauli_fidelity(reduced(v, [2 * i + 1], n), target) > 1 - 1e-9 for i in range(m)):
            success += p
    return success


def prep_circuit_fidelity(which, kraus_ops, mode="per_gate"):
    """Noisy fidelity of the four-qubit preparation circuits on 16x16 matrices."""
    n = 4
    cx = lambda c, t: controlled(X, c, t, n)
    if which == "bell-pair":
        steps = [(single(H, 0, n), [0]), (cx(0, 1), [0, 1]), (single(H, 2, n), [2]), (cx(2, 3), [2, 3])]
        travelling = [1, 3]
    else:
        steps = [
            (single(H, 0, n), [0]),
            (single(H, 1, n), [1]),
            (cx(0, 2), [0, 2]),
            (cx(1, 3), [1, 3]),
            (cz(0, 1, n), [0, 1]),
        ]
        travelling = [2, 3]
    psi = np.zeros(16, dtype=complex)
    psi[0] = 1
    rho = np.outer(psi, psi.conj())
    for u, touched in steps:
        psi = u @ psi
        rho = u @ rho @ u.conj().T
        if mode == "per_gate":
            for q in touched:
                rho = kraus_sum(rho, [single(k, q, n) for k in kraus_ops])
    if mode == "transmitted":
        for q in travelling:
            rho = kraus_sum(rho, [single(k, q, n) for k in kraus_ops])
    return overlap_fidelity(psi, rho)


def min_bits(m, n):
    """Smallest k with 2**k >= m**n, by counting."""
    target = m**n
    k, power = 0, 1
    while power < target:
        power *= 2
        k += 1
    return k
