from __future__ import annotations

import math

import numpy as np
import pytest

from cosetring.decompose import (
    CosetDecomposition,
    CosetPiece,
    decompose,
    default_epsilon,
    inductive_step,
    verify_decomposition,
)
from cosetring.groups import GroupFunction, coset_indicator, cyclic, subgroup_closure
from cosetring.spectral import algebra_norm


def _f(G, vals):
    return GroupFunction(G, np.asarray(vals, dtype=float))


def test_step_on_coset_is_fixed_point():
    G = cyclic(12)
    H = subgroup_closure(G, [3])
    f = coset_indicator(1, H)
    res = inductive_step(f, default_epsilon(1), 1.0)
    assert res.branch == "coset-sum" and len(res.pieces) == 1
    assert res.subgroup == H
    assert np.allclose(res.f1.values, f.values) and np.allclose(res.f2.values, 0)


def test_step_nested_subgroups_z16():
    G = cyclic(16)
    H1 = subgroup_closure(G, [2])
    H2 = subgroup_closure(G, [4])
    f = _f(G, H1.mask.astype(int) + H2.mask.astype(int))
    M = math.ceil(algebra_norm(f))
    eps = default_epsilon(M)
    res = inductive_step(f, eps, M)
    assert np.allclose(res.f1.values + res.f2.values, f.values)
    assert res.checks["iii_f1"] and res.checks["iii_f2"] and res.checks["ii"]
    assert res.checks["norm_split_gap"] < 1e-9
    if res.branch == "coset-sum":
        assert res.subgroup in (H1, H2) or res.subgroup.size in (1, 2, 4, 8)
        labels = np.rint(res.f1.values)
        for rep in res.subgroup.coset_representatives():
            coset = np.asarray(G.add(int(rep), res.subgroup.elements))
            assert len(set(labels[coset])) == 1


def test_step_zero_function():
    G = cyclic(8)
    res = inductive_step(_f(G, np.zeros(8)), 0.01, 1.0)
    assert res.pieces == [] and not np.any(res.f1.values) and not np.any(res.f2.values)


def test_decompose_single_coset_z8():
    G = cyclic(8)
    D = decompose(_f(G, G.mask([0, 4])))
    assert D.certificate["exact"] and D.certificate["L"] == 1
    (p,) = D.pieces
    assert (p.sign, p.rep, p.subgroup.key()) == (1, 0, (0, 4))
    assert D.distinct_subgroups == 1


def test_decompose_two_subgroups_z8():
    G = cyclic(8)
    f = _f(G, G.mask([0, 2, 4, 6]).astype(int) + G.mask([0, 4]).astype(int))
    D = decompose(f)
    c = D.certificate
    assert c["exact"] and c["structured"]
    assert c["distinct_subgroups"] <= math.floor(algebra_norm(f) + 0.01)
    assert verify_decomposition(f, D)["exact"]


def test_decompose_non_coset_pair():
    G = cyclic(8)
    f = _f(G, G.mask([0, 1]))
    assert algebra_norm(f) == pytest.approx(1.2568348730314622, abs=1e-12)
    D = decompose(f)
    assert D.certificate["exact"] and D.certificate["L"] == 2
    assert D.distinct_subgroups == 1
    assert all(p.subgroup.size == 1 for p in D.pieces)


def test_decompose_rejects_non_integer():
    G = cyclic(8)
    with pytest.raises(ValueError):
        decompose(_f(G, np.full(8, 0.5)))


def test_decompose_zero():
    D = decompose(_f(cyclic(8), np.zeros(8)))
    assert D.pieces == [] and D.certificate["exact"]


def test_decompose_random_signed_cosets_exact():
    rng = np.random.default_rng(5)
    groups = [cyclic(16), cyclic(2, 8), cyclic(36), cyclic(4, 4, 2), cyclic(64)]
    for _ in range(25):
        G = groups[rng.integers(len(groups))]
        v = np.zeros(G.size, dtype=np.int64)
        for _ in range(int(rng.integers(1, 4))):
            H = subgroup_closure(G, [int(rng.integers(G.size))])
            v += int(rng.choice([-1, 1])) * np.asarray(coset_indicator(int(rng.integers(G.size)), H).values, dtype=np.int64)
        f = _f(G, v)
        D = decompose(f)
        rep = verify_decomposition(f, D)
        assert rep["exact"] and rep["subgroups_valid"]
        assert D.certificate["leaves"] <= D.certificate["leaf_bound"]


def test_decompose_random_integer_functions_exact():
    rng = np.random.default_rng(6)
    for _ in range(10):
        G = cyclic(int(rng.choice([8, 12, 16])))
        v = rng.integers(-2, 3, G.size)
        f = _f(G, v)
        D = decompose(f)
        assert verify_decomposition(f, D)["exact"]


def test_verify_detects_sign_flip():
    G = cyclic(12)
    H = subgroup_closure(G, [4])
    f = coset_indicator(0, H)
    good = CosetDecomposition(G, [CosetPiece(1, 0, H)])
    assert verify_decomposition(f, good)["exact"]
    bad = CosetDecomposition(G, [CosetPiece(-1, 0, H)])
    rep = verify_decomposition(f, bad)
    assert not rep["exact"]
    assert rep["first_mismatch"] == {"x": [0], "expected": 1, "got": -1}


def test_verify_order_independent():
    G = cyclic(2, 8)
    rng = np.random.default_rng(9)
    v = np.zeros(16, dtype=np.int64)
    for g in ([0, 2], [1, 4], [0, 1]):
        v += np.asarray(coset_indicator(int(rng.integers(16)), subgroup_closure(G, [tuple(g)])).values, dtype=np.int64)
    f = _f(G, v)
    D = decompose(f)
    for _ in range(10):
        perm = [D.pieces[i] for i in rng.permutation(len(D.pieces))]
        assert verify_decomposition(f, CosetDecomposition(G, perm))["exact"]
