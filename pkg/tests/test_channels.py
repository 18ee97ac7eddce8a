import math

import numpy as np
import pytest

from qbroadcast.channels import (
    BELL_KINDS,
    CONTROLLER,
    bell,
    bell_links,
    channel_controlled,
    channel_general,
    channel_joint,
    channel_multidirectional,
    cluster_channel,
    cluster_from_circuit,
    cluster_plus,
    cluster_yan,
    ghz,
    nonmax_bell,
    ordered_pairs,
    receiver,
    sender,
)
from qbroadcast.linalg import measure_projective, partial_trace, tensor

from . import oracles


def test_bell_states_are_orthonormal():
    m = np.array([bell(k) for k in BELL_KINDS])
    np.testing.assert_allclose(m @ m.conj().T, np.eye(4), atol=1e-15)


def test_bell_naming():
    np.testing.assert_allclose(bell("psi+"), np.array([0, 1, 1, 0]) / math.sqrt(2))
    with pytest.raises(ValueError):
        bell("omega")


def test_nonmax_marginal():
    np.testing.assert_allclose(partial_trace(nonmax_bell(0.8, 0.6), [1]), np.diag([0.64, 0.36]), atol=1e-15)


def test_nonmax_rejects_unnormalized():
    with pytest.raises(ValueError, match="equal 1"):
        nonmax_bell(0.8, 0.8)


def test_cluster_matches_preparation_circuit():
    # Circuit: H0, H1, CX(0,2), CX(1,3), CZ(0,1), built here from Kronecker products.
    n = 4
    u = (
        oracles.cz(0, 1, n)
        @ oracles.controlled(oracles.X, 1, 3, n)
        @ oracles.controlled(oracles.X, 0, 2, n)
        @ oracles.single(oracles.H, 1, n)
        @ oracles.single(oracles.H, 0, n)
    )
    psi0 = np.zeros(16, dtype=complex)
    psi0[0] = 1
    np.testing.assert_allclose(u @ psi0, cluster_yan(), atol=1e-15)
    np.testing.assert_allclose(cluster_from_circuit(), cluster_yan(), atol=1e-15)


def test_cluster_plus_is_two_bell_pairs():
    phi = bell("phi+")
    # qubits (0,2) and (1,3) share phi+: permute a (0,1)(2,3) product.
    joint = np.kron(phi, phi).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(16)
    np.testing.assert_allclose(cluster_plus(), joint, atol=1e-15)
    np.testing.assert_allclose(cluster_from_circuit(+1), cluster_plus(), atol=1e-15)


def test_cluster_plus_overlap_is_half():
    assert abs(np.vdot(cluster_plus(), cluster_yan())) == pytest.approx(0.5, abs=1e-15)


def test_cluster_ownership():
    ch = cluster_channel()
    assert ch.qubits_of(sender(1)) == [0, 1]
    assert ch.qubits_of(receiver(1)) == [2]
    assert ch.qubits_of(receiver(2)) == [3]
    assert not ch.probabilistic


def test_general_channel_ten_links_is_lazy():
    ch = channel_general([bell("phi+")] * 10)
    assert ch.n_qubits == 20
    assert ch.qubits_of(receiver(7)) == [13]
    assert len(ch.receivers) == 10
    assert "state" not in ch.__dict__


def test_bell_links_matches_general():
    a, b = bell_links(3), channel_general([bell()] * 3)
    assert a.ownership == b.ownership
    np.testing.assert_allclose(a.state, b.state)


def test_general_channel_flags_nonmaximal_links():
    assert channel_general([nonmax_bell(0.8, 0.6), bell()]).probabilistic
    assert not channel_general([bell(), bell("psi-")]).probabilistic


def test_general_channel_rejects_bad_links():
    with pytest.raises(ValueError):
        channel_general([])
    with pytest.raises(ValueError, match="2-qubit"):
        channel_general([ghz()])


def test_joint_blocks_have_maximally_mixed_marginals():
    ch = channel_joint([ghz(), ghz()])
    assert ch.qubits_of(sender(2)) == [1, 4]
    assert ch.qubits_of(receiver(2)) == [5]
    for q in range(3):
        np.testing.assert_allclose(partial_trace(ghz(), [q]), np.eye(2) / 2, atol=1e-15)
    assert not ch.probabilistic
    assert channel_joint([ghz(0.8, 0.6)]).probabilistic


class TestControlled:
    def test_two_candidates(self):
        ch = channel_controlled([bell_links(2, "phi+"), bell_links(2, "psi+")])
        assert ch.n_qubits == 5
        assert ch.qubits_of(CONTROLLER) == [4]
        assert np.linalg.norm(ch.state) == pytest.approx(1, abs=1e-12)

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_ancilla_measurement_selects_channel(self, m):
        cands = [bell(k) for k in BELL_KINDS[:m]]
        ch = channel_controlled(cands)
        a = ch.n_qubits - 2
        assert a == max(1, math.ceil(math.log2(m)))
        basis = [np.eye(2**a)[k] for k in range(2**a)]
        out = measure_projective(ch.state, list(range(2, 2 + a)), basis, keep_measured=False)
        for k, p, post in out:
            if k < m:
                assert p == pytest.approx(1 / m, abs=1e-12)
                assert abs(abs(np.vdot(post, cands[k])) - 1) < 1e-12
            else:
                assert p == pytest.approx(0, abs=1e-15)

    def test_rejects_duplicates_and_single(self):
        with pytest.raises(ValueError, match="coincide"):
            channel_controlled([bell(), bell()])
        with pytest.raises(ValueError, match="at least two"):
            channel_controlled([bell()])


class TestMultidirectional:
    @pytest.mark.parametrize("n,links", [(2, 2), (3, 6)])
    def test_link_count(self, n, links):
        ch = channel_multidirectional(n)
        assert len(ch.factors) == links == n * (n - 1)
        assert ch.qubits_of(sender(1))[0] == 0
        assert ch.qubits_of(receiver(2))[0] == 1

    def test_one_party_rejected(self):
        with pytest.raises(ValueError, match="at least two"):
            channel_multidirectional(1)

    def test_missing_pair_rejected(self):
        with pytest.raises(ValueError, match="missing"):
            channel_multidirectional(2, {(1, 2): bell()})

    def test_pairs_are_ordered(self):
        assert ordered_pairs(3) == [(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2)]

    def test_state_is_product(self):
        ch = channel_multidirectional(2)
        np.testing.assert_allclose(ch.state, tensor(bell(), bell()))
