from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from cosetring.errors import ModulusTooSmall
from cosetring.lca import (
    FrequencySpec,
    Lattice,
    build_finite_model,
    commensurability_classes,
    commensurable,
    coset_intersection_count,
    is_prime,
    lattice_image,
    lattice_index,
    lattice_intersect,
    model_group,
    next_prime,
    norm_quadrature,
)


def spec_1d(rs, signs=None):
    signs = signs or [1] * len(rs)
    return FrequencySpec(1, (), tuple({"sign": s, "r": [r]} for s, r in zip(signs, rs)))


def test_primes():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert next_prime(10000) == 10007


def test_single_term_model_is_one():
    rep = build_finite_model(spec_1d([0]), 101)
    assert np.allclose(rep.model.values, 1.0)
    assert rep.norm_estimate == pytest.approx(1.0)
    assert norm_quadrature(spec_1d([0]), 64)[0] == 1.0


def test_two_term_model_matches_formula():
    N = 101
    rep = build_finite_model(spec_1d([0, 1]), N)
    x = np.arange(N)
    assert np.allclose(rep.model.values, 1 + np.exp(2j * np.pi * x / N), atol=1e-12)


def test_two_term_convergence_to_four_over_pi():
    spec = spec_1d([0, 1])
    q, err = norm_quadrature(spec, 1 << 14)
    assert abs(q - 4 / math.pi) <= 1e-3 and err <= 1e-3
    gaps = []
    for N in (101, 1009, 10007):
        est = build_finite_model(spec, N).norm_estimate
        gaps.append(abs(est - q))
    assert gaps[-1] <= 0.01 * q
    fitted = max(g * N for g, N in zip(gaps, (101, 1009, 10007)))
    assert all(g <= fitted / N + 1e-12 for g, N in zip(gaps, (101, 1009, 10007)))


def test_two_dim_product_spec():
    spec = FrequencySpec(2, (), tuple({"sign": 1, "r": list(v)} for v in itertools.product((0, 1), repeat=2)))
    q, _ = norm_quadrature(spec, 2048)
    assert abs(q - (4 / math.pi) ** 2) <= 1e-2


def test_finite_part_spec():
    # omega(h) alternates on Z/2, so |1 + omega(h) e(theta)| averages to 4/pi as well
    spec = FrequencySpec(1, (2,), ({"sign": 1, "omega": [0], "r": [0]}, {"sign": 1, "omega": [1], "r": [1]}))
    rep = build_finite_model(spec, 1009)
    assert model_group(spec, 1009).orders == (2, 1009)
    q, _ = norm_quadrature(spec, 4096)
    assert abs(rep.norm_estimate - q) < 0.01


def test_collisions_and_modulus_checks():
    with pytest.raises(ModulusTooSmall):
        build_finite_model(spec_1d([0, 3]), 3)
    with pytest.raises(ValueError):
        build_finite_model(spec_1d([0, 1]), 100)
    with pytest.raises(ValueError):
        spec_1d([1, 1])


def test_intersection_examples():
    two = Lattice.from_generators(1, [[2]])
    three = Lattice.from_generators(1, [[3]])
    assert lattice_intersect(two, three) == Lattice.from_generators(1, [[6]])
    L = Lattice.from_generators(2, [[3, 1], [0, 5]])
    assert lattice_intersect(L, L) == L


def test_intersection_box_oracle():
    A = Lattice.from_generators(2, [[2, 0], [0, 2]])
    B = Lattice.from_generators(2, [[1, 1], [1, -1]])
    inter = lattice_intersect(A, B)
    for v in itertools.product(range(-20, 21), repeat=2):
        assert inter.contains(v) == (A.contains(v) and B.contains(v))
    assert lattice_index(A, inter) == 1 and lattice_index(B, inter) == 2


def test_random_intersections_box_oracle():
    rng = np.random.default_rng(2)
    for _ in range(20):
        gens1 = rng.integers(-4, 5, (2, 2)).tolist()
        gens2 = rng.integers(-4, 5, (int(rng.integers(1, 3)), 2)).tolist()
        A = Lattice.from_generators(2, gens1)
        B = Lattice.from_generators(2, gens2)
        inter = lattice_intersect(A, B)
        assert lattice_intersect(B, A) == inter
        for v in itertools.product(range(-12, 13), repeat=2):
            assert inter.contains(v) == (A.contains(v) and B.contains(v))


def test_intersection_associative():
    rng = np.random.default_rng(3)
    for _ in range(10):
        Ls = [Lattice.from_generators(3, rng.integers(-3, 4, (3, 3)).tolist()) for _ in range(3)]
        left = lattice_intersect(lattice_intersect(Ls[0], Ls[1]), Ls[2])
        right = lattice_intersect(Ls[0], lattice_intersect(Ls[1], Ls[2]))
        assert left == right


def test_commensurability_examples():
    res = commensurability_classes([Lattice.from_generators(1, [[2]]), Lattice.from_generators(1, [[3]])])
    assert res.classes == [[0, 1]] and res.omegas[0] == Lattice.from_generators(1, [[6]])
    res = commensurability_classes([Lattice.from_generators(2, [[1, 0]]), Lattice.from_generators(2, [[0, 1]])])
    assert res.classes == [[0], [1]]
    Ls = [Lattice.from_generators(2, [v]) for v in ([1, 1], [2, 2], [1, -1])]
    res = commensurability_classes(Ls)
    assert res.classes == [[0, 1], [2]]
    assert res.omegas[0] == Lattice.from_generators(2, [[2, 2]])


def test_commensurability_is_equivalence():
    rng = np.random.default_rng(4)
    Ls = []
    for _ in range(8):
        k = int(rng.integers(1, 3))
        Ls.append(Lattice.from_generators(2, rng.integers(-3, 4, (k, 2)).tolist()))
    rel = [[commensurable(a, b) for b in Ls] for a in Ls]
    for i in range(len(Ls)):
        assert rel[i][i]
        for j in range(len(Ls)):
            assert rel[i][j] == rel[j][i]
            for k in range(len(Ls)):
                if rel[i][j] and rel[j][k]:
                    assert rel[i][k]


def test_noncommensurable_coset_intersections_are_small():
    for N in (31, 101):
        G = model_group(FrequencySpec(2, (), ({"sign": 1, "r": [0, 0]},)), N)
        H1 = lattice_image(G, Lattice.from_generators(2, [[1, 0]]))
        H2 = lattice_image(G, Lattice.from_generators(2, [[1, 1]]))
        for x1, x2 in ((0, 0), (5, 17), (3, 200)):
            # d' = 1, so intersections have size at most N^0 = 1
            assert coset_intersection_count(x1, H1, x2, H2) <= 1
