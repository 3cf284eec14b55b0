import math

import numpy as np
import pytest
import scipy.linalg as sla

from mimome import (
    ChannelPair,
    build_precoder,
    default_rank_tol,
    gsvd,
    precoder_powers,
    reduce_to_parallel,
)

from conftest import random_pair_arrays

SHAPES = [(5, 5, 5), (5, 5, 3), (3, 5, 2), (4, 2, 3), (6, 3, 2), (2, 4, 4), (4, 4, 2)]


def nullity(m):
    return sla.null_space(m).shape[1]


def oracle_dims(hb, he):
    """Subspace dimensions from independent null-space computations.

    The rank-difference identities hold for every shape:
      k  = m_a - nullity([Hb; He])
      r  = nullity(He) - nullity(stack)   (Bob-only directions)
      nu = nullity(Hb) - nullity(stack)   (Eve-only directions)
    """
    m_a = hb.shape[1]
    n_stack = nullity(np.vstack([hb, he]))
    k = m_a - n_stack
    r = nullity(he) - n_stack
    nu = nullity(hb) - n_stack
    return k, r, k - r - nu, nu


def literal_dims(hb, he):
    """Definition-style dimensions via subspace intersections; these agree
    with the block structure only when Hb or He has full column rank."""
    def inter_dim(a_basis, b_basis):
        if a_basis.shape[1] == 0 or b_basis.shape[1] == 0:
            return 0
        ang = sla.subspace_angles(a_basis, b_basis)
        return int(np.sum(ang < 1e-8))

    m_a = hb.shape[1]
    row = lambda m: sla.orth(m.conj().T)
    null = lambda m: sla.null_space(m)
    r = inter_dim(null(he), row(hb)) if nullity(he) else 0
    nu = inter_dim(null(hb), row(he)) if nullity(hb) else 0
    return r, nu


@pytest.mark.parametrize("shape", SHAPES)
def test_reconstruction_and_invariants(rng, shape):
    m_a, m_b, m_e = shape
    for _ in range(15):
        hb, he = random_pair_arrays(rng, m_b, m_a, m_e)
        pair = ChannelPair(hb, he)
        g = gsvd(pair)

        hb_hat, he_hat = g.reconstruct()
        nb = np.linalg.norm(hb)
        ne = np.linalg.norm(he)
        assert np.linalg.norm(hb_hat - hb) <= 1e-8 * nb
        assert np.linalg.norm(he_hat - he) <= 1e-8 * ne

        # unitarity of all three factors
        for q in (g.psi_a, g.psi_b, g.psi_e):
            assert np.linalg.norm(q.conj().T @ q - np.eye(q.shape[1])) < 1e-10

        # gain pairing and the shared-block ordering of Definition 2
        assert np.max(np.abs(g.b ** 2 + g.e ** 2 - 1.0)) <= 1e-10
        sh = g.b[g.shared_slice]
        assert np.all(np.diff(sh) >= 0)
        assert np.all((sh > 0) & (sh < 1))
        assert np.all(g.b[: g.nu] == 0) and np.all(g.e[: g.nu] == 1)
        assert np.all(g.b[g.k - g.r:] == 1) and np.all(g.e[g.k - g.r:] == 0)
        assert np.all(g.omega > 0)

        # dimension accounting against the null-space oracle
        assert (g.k, g.r, g.s, g.nu) == oracle_dims(hb, he)
        assert g.null_dim == m_a - g.k


@pytest.mark.parametrize("shape", SHAPES)
def test_literal_subspace_dims_when_full_column_rank(rng, shape):
    """dim(null(He) ∩ row(Hb)) equals the Bob-only block size whenever one
    matrix has full column rank (it always does for these random shapes with
    m_b >= m_a or m_e >= m_a); the (4,2,3) shape shows the two notions can
    differ, so the literal check is gated."""
    m_a, m_b, m_e = shape
    hb, he = random_pair_arrays(rng, m_b, m_a, m_e)
    g = gsvd(ChannelPair(hb, he))
    full_rank = (np.linalg.matrix_rank(hb) == m_a
                 or np.linalg.matrix_rank(he) == m_a)
    r_lit, nu_lit = literal_dims(hb, he)
    if full_rank:
        assert (g.r, g.nu) == (r_lit, nu_lit)
    else:
        # rank-difference identities still hold regardless
        assert (g.k, g.r, g.s, g.nu) == oracle_dims(hb, he)


def test_structural_split_4_2_3(rng):
    """With m_b = 2 < m_a = 4 and m_e = 3, the stack has rank 4 a.s., the
    rank differences give r=1, s=1, nu=2, yet the literal intersections
    null(He) ∩ row(Hb) and null(Hb) ∩ row(He) are both trivial: the two
    notions agree only under full column rank."""
    hb, he = random_pair_arrays(rng, 2, 4, 3)
    g = gsvd(ChannelPair(hb, he))
    assert (g.k, g.r, g.s, g.nu) == (4, 1, 1, 2)
    r_lit, nu_lit = literal_dims(hb, he)
    assert r_lit == 0 and nu_lit < 2


def test_identity_vs_zero_eve():
    g = gsvd(ChannelPair(np.eye(3), np.zeros((2, 3))))
    assert (g.k, g.r, g.s, g.nu) == (3, 3, 0, 0)
    np.testing.assert_allclose(g.omega, np.ones(3), atol=1e-12)
    hb_hat, he_hat = g.reconstruct()
    np.testing.assert_allclose(hb_hat, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(he_hat, np.zeros((2, 3)), atol=1e-12)


def test_zero_bob_vs_identity_eve():
    g = gsvd(ChannelPair(np.zeros((3, 3)), np.eye(3)))
    assert (g.k, g.r, g.s, g.nu) == (3, 0, 0, 3)


def test_equal_channels_are_fully_shared(rng):
    h = random_pair_arrays(rng, 3, 3, 3)[0]
    g = gsvd(ChannelPair(h, h))
    assert (g.r, g.nu) == (0, 0) and g.s == g.k == 3
    np.testing.assert_allclose(g.b ** 2, 0.5 * np.ones(3), atol=1e-10)


def test_rank_one_stack(rng):
    u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    hb = np.outer(u, v)
    he = np.outer(2.0 * u, v)
    g = gsvd(ChannelPair(hb, he))
    assert g.k == 1 and g.null_dim == 3
    assert (g.k, g.r, g.s, g.nu) == oracle_dims(hb, he)


def test_rank_tol_validation(rng):
    hb, he = random_pair_arrays(rng, 3, 3, 3)
    pair = ChannelPair(hb, he)
    with pytest.raises(ValueError):
        gsvd(pair, rank_tol=0.0)
    with pytest.raises(ValueError):
        gsvd(pair, rank_tol=1.5)
    assert 0 < default_rank_tol(5, 5, 5) < 1e-8


def test_precoder_trace_and_diagonalization(rng):
    hb, he = random_pair_arrays(rng, 5, 5, 3)
    g = gsvd(ChannelPair(hb, he))
    bank = reduce_to_parallel(g)

    # normalized powers on the active channels
    p_norm = np.zeros(g.m_a)
    for ch in bank.active:
        p_norm[ch.index] = rng.uniform(0.5, 2.0)
    p_orig = p_norm.copy()
    for ch in bank.channels:
        p_orig[ch.index] /= ch.omega

    w = build_precoder(g, p_orig)
    assert abs(np.trace(w.conj().T @ w).real - p_norm.sum()) < 1e-10

    # the precoded channels are diagonal with per-channel SNRs b2*p'/w, e2*p'/w
    gb = (hb @ w).conj().T @ (hb @ w)
    ge = (he @ w).conj().T @ (he @ w)
    for ch in bank.channels:
        i = ch.index
        assert abs(gb[i, i].real - ch.b2 * p_norm[i] / ch.omega) < 1e-9
        assert abs(ge[i, i].real - ch.e2 * p_norm[i] / ch.omega) < 1e-9
    off_b = np.abs(gb - np.diag(np.diag(gb))).max()
    off_e = np.abs(ge - np.diag(np.diag(ge))).max()
    assert off_b < 1e-9 and off_e < 1e-9


def test_precoder_rejects_bad_powers(rng):
    hb, he = random_pair_arrays(rng, 3, 3, 3)
    g = gsvd(ChannelPair(hb, he))
    with pytest.raises(ValueError):
        build_precoder(g, np.array([1.0, -0.1, 0.0]))
    with pytest.raises(ValueError):
        build_precoder(g, np.ones(4))


def test_zero_power_gives_zero_precoder():
    g = gsvd(ChannelPair(np.eye(3), np.zeros((2, 3))))
    w = build_precoder(g, np.zeros(3))
    assert np.allclose(w, 0)
    w1 = build_precoder(g, np.ones(3))
    assert abs(np.trace(w1.conj().T @ w1).real - 3.0) < 1e-12


def test_bank_partition_and_pairing(rng):
    hb, he = random_pair_arrays(rng, 5, 5, 3)
    g = gsvd(ChannelPair(hb, he))
    bank = reduce_to_parallel(g)
    assert len(bank.eve_only) == g.nu
    assert len(bank.shared) == g.s
    assert len(bank.bob_only) == g.r
    assert bank.null_dim == g.null_dim
    assert bank.size == g.m_a
    indices = [c.index for c in bank.channels]
    assert indices == list(range(g.k))
    for ch in bank.shared:
        assert abs(ch.b2 + ch.e2 - 1.0) <= 1e-10


def test_five_by_five_by_five_all_shared(rng):
    hb, he = random_pair_arrays(rng, 5, 5, 5)
    bank = reduce_to_parallel(gsvd(ChannelPair(hb, he)))
    assert len(bank.bob_only) == 0 and len(bank.shared) == 5


def test_five_by_five_by_three_bob_floor(rng):
    hb, he = random_pair_arrays(rng, 5, 5, 3)
    bank = reduce_to_parallel(gsvd(ChannelPair(hb, he)))
    assert len(bank.bob_only) == 2 and len(bank.shared) == 3
    assert len(bank.eve_only) == 0
