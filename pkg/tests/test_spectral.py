from __future__ import annotations

import itertools

import numpy as np
import pytest

from cosetring.errors import AmbiguousRounding, CapExceeded, NotDissociated
from cosetring.groups import GroupFunction, annihilator, cyclic, dft, subgroup_closure
from cosetring.spectral import (
    additive_energy,
    additive_energy_fourier,
    algebra_norm,
    chang_cover,
    doubling_constant,
    is_dissociated,
    riesz_product,
    round_to_integers,
    span,
    spec,
)

import oracles


def test_algebra_norm_examples():
    G = cyclic(8)
    cosine = GroupFunction(G, np.cos(2 * np.pi * np.arange(8) / 8))
    assert abs(algebra_norm(cosine) - 1) < 1e-12
    f = GroupFunction.indicator(G, [0, 1])
    expect = np.abs(oracles.naive_dft(G.orders, f.values)).sum()
    assert abs(algebra_norm(f) - expect) < 1e-12
    assert abs(algebra_norm(f) - 1.2568348730314622) < 1e-12


def test_sup_bounded_by_algebra_norm():
    G = cyclic(2, 8)
    rng = np.random.default_rng(0)
    for _ in range(50):
        f = GroupFunction(G, rng.standard_normal(G.size))
        assert np.abs(f.values).max() <= algebra_norm(f) + 1e-9


def test_spec_of_subgroup_is_annihilator():
    G = cyclic(12)
    H = subgroup_closure(G, [3])
    f = GroupFunction(G, H.mask.astype(float))
    for rho in (0.1, 0.5, 1.0):
        assert spec(f, rho).members == annihilator(H).key()


def test_spec_by_direct_enumeration_and_monotone():
    G = cyclic(12)
    f = GroupFunction.indicator(G, [0, 1, 2])
    mags = np.abs(oracles.naive_dft(G.orders, f.values))
    expect = tuple(int(k) for k in np.flatnonzero(mags >= 0.25 * 3 / 12))
    assert spec(f, 0.25).members == expect
    assert set(spec(f, 0.5).members) <= set(spec(f, 0.25).members)


def test_spec_rho_one_boundary():
    G = cyclic(12)
    f = GroupFunction.indicator(G, [0, 1, 2])
    # only the trivial character attains |f^| = ||f||_1 for a nonnegative function
    assert spec(f, 1.0).members == (0,)
    g = GroupFunction(G, np.cos(2 * np.pi * np.arange(12) / 12))
    assert spec(g, 1.0).members == ()


def test_rounding_examples():
    G = cyclic(6)
    ints = GroupFunction(G, np.array([0, 1, -2, 3, 0, 1.0]))
    rep = round_to_integers(ints)
    assert rep.distance == 0 and np.array_equal(rep.rounded.values, ints.values)
    rep = round_to_integers(GroupFunction(G, np.full(6, 0.3)))
    assert np.all(rep.rounded.values == 0) and abs(rep.distance - 0.3) < 1e-15
    with pytest.raises(AmbiguousRounding):
        round_to_integers(GroupFunction(G, np.full(6, 0.5)))


def test_rounding_perturbed_subgroup():
    G = cyclic(12)
    H = subgroup_closure(G, [4])
    rng = np.random.default_rng(1)
    noise = rng.uniform(-0.01, 0.01, 12)
    rep = round_to_integers(GroupFunction(G, H.mask + noise))
    assert np.array_equal(rep.rounded.values, H.mask.astype(float))
    assert rep.distance <= 0.01 and abs(rep.distance - np.abs(noise).max()) < 1e-15


def test_dissociation_examples():
    G = cyclic(16)
    assert is_dissociated(G, [5]).dissociated
    res = is_dissociated(G, [1, 2, 3])
    assert not res.dissociated and res.witness == (1, 1, -1)
    assert is_dissociated(G, [1, 2, 4]).dissociated
    assert oracles.brute_dissociated([1, 2, 4], 16)
    assert not is_dissociated(G, [0]).dissociated


def test_dissociation_witness_replays():
    G = cyclic(64)
    rng = np.random.default_rng(2)
    for _ in range(100):
        A = [int(a) for a in rng.choice(64, size=5, replace=False)]
        res = is_dissociated(G, A)
        assert res.dissociated == oracles.brute_dissociated(A, 64)
        if not res.dissociated:
            assert any(res.witness)
            assert sum(e * a for e, a in zip(res.witness, A)) % 64 == 0


def test_dissociation_cap():
    with pytest.raises(CapExceeded):
        is_dissociated(cyclic(1 << 20), list(range(1, 18)))


def test_span_examples():
    assert span(cyclic(9), []) == frozenset({0})
    assert span(cyclic(9), [3]) == frozenset({0, 3, 6})
    s = span(cyclic(10), [1, 4])
    assert s == frozenset({0, 1, 3, 4, 5, 6, 7, 9})
    assert s == frozenset(oracles.brute_span([1, 4], 10))
    with pytest.raises(CapExceeded):
        span(cyclic(100), list(range(1, 18)))


def test_chang_cover_examples():
    G = cyclic(16)
    assert chang_cover(G, [3], 0.5, 1.0).members == (3,)
    assert chang_cover(G, [1, 2, 3], 0.5, 1.0).members == (1, 2)

    G2 = cyclic(2, 8)
    H = subgroup_closure(G2, [(1, 0)])
    gamma = spec(GroupFunction(G2, H.mask.astype(float)), 0.25).members
    assert gamma == annihilator(H).key()
    cover = chang_cover(G2, gamma, H.size / G2.size, 1.0)
    # a {-1,0,1}-span is not a subgroup closure, so one generator is not enough;
    # a dissociated set has 2^k distinct subset sums, hence k <= log2 |H-perp|
    assert cover.members == (1, 2, 4)
    assert 2 ** len(cover) <= len(gamma)
    assert set(gamma) <= span(G2, cover.members)
    assert is_dissociated(G2, cover.members).dissociated


def test_chang_cover_is_dissociated_and_covers():
    G = cyclic(64)
    rng = np.random.default_rng(3)
    for _ in range(30):
        gamma = [int(g) for g in rng.choice(64, size=12, replace=False)]
        cover = chang_cover(G, gamma, 0.1, 2.0)
        assert set(gamma) <= span(G, cover.members)
        assert oracles.brute_dissociated(list(cover.members), 64)


def test_riesz_empty_set():
    G = cyclic(8)
    rp = riesz_product(G, [])
    assert np.allclose(rp.p_hat.values, 1 / 8)
    assert np.allclose(rp.p.values, np.eye(8)[0])


def test_riesz_single_point_against_expansion():
    G = cyclic(8)
    rp = riesz_product(G, [1])
    k = np.arange(8)
    assert np.allclose(rp.p_hat.values * 8, 1 + np.cos(2 * np.pi * k / 8))
    assert np.all(rp.p_hat.values >= -1e-12)
    assert abs(rp.p_hat.values.sum() - 1) < 1e-12
    assert np.abs(rp.p.values - oracles.riesz_by_expansion([1], 8)).max() < 1e-12


def test_riesz_two_points():
    G = cyclic(10)
    rp = riesz_product(G, [1, 4])
    assert abs(rp.p_hat.values.sum() - 1) < 1e-9
    support = set(np.flatnonzero(np.abs(rp.p.values) > 1e-9).tolist())
    assert support <= span(G, [1, 4])
    assert np.abs(rp.p.values - oracles.riesz_by_expansion([1, 4], 10)).max() < 1e-12
    assert rp.p.values[1] >= 0.5 and rp.p.values[4] >= 0.5


def test_riesz_rejects_relations():
    with pytest.raises(NotDissociated):
        riesz_product(cyclic(16), [1, 2, 3])


def test_energy_examples():
    assert additive_energy(cyclic(8), [0]) == 1
    G = cyclic(12)
    H = subgroup_closure(G, [3])
    assert additive_energy(G, H.elements) == H.size**3
    assert additive_energy(cyclic(8), [0, 1, 2]) == oracles.brute_energy([0, 1, 2], 8) == 19


def test_energy_fourier_identity_and_cauchy_schwarz():
    G = cyclic(4, 8)
    rng = np.random.default_rng(4)
    for _ in range(30):
        A = rng.choice(G.size, size=int(rng.integers(1, 12)), replace=False)
        E = additive_energy(G, A)
        assert abs(E - additive_energy_fourier(G, A)) <= 1e-6 * E
        alpha = len(A) / G.size
        K = doubling_constant(G, A)
        fourth = E / G.size**3
        assert fourth >= alpha**3 / K - 1e-12


def test_spectrum_size_bound():
    G = cyclic(64)
    rng = np.random.default_rng(5)
    for _ in range(20):
        A = rng.choice(64, size=int(rng.integers(2, 30)), replace=False)
        f = GroupFunction.indicator(G, A)
        alpha = len(A) / 64
        K = doubling_constant(G, A)
        gamma = spec(f, 1 / (4 * np.sqrt(K)))
        assert len(gamma) <= 16 * K / alpha
