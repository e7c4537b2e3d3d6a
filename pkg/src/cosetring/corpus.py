"""Seeded instance generators shared by the CLI and the acceptance suite.

All randomness flows from a single ``numpy.random.Generator``; the algorithms
themselves are deterministic.
"""

from __future__ import annotations

import numpy as np

from .groups import FiniteAbelianGroup, GroupFunction, coset_indicator, cyclic, subgroup_closure
from .spectral import algebra_norm

FOURIER_GROUPS = ((8,), (12,), (2, 8), (3, 9), (128,))
BOHR_GROUPS = ((64,), (128,), (256,), (512,), (1024,), (2048,), (2, 8), (16, 16), (3, 9), (32, 64), (4, 4, 4))
DECOMPOSE_GROUPS = ((8,), (12,), (16,), (24,), (32,), (64,), (128,), (256,), (512,), (2, 8), (4, 4), (3, 9), (2, 2, 16), (8, 64), (6, 6))


def rng_from(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def pick_group(rng: np.random.Generator, table=DECOMPOSE_GROUPS) -> FiniteAbelianGroup:
    return cyclic(*table[int(rng.integers(len(table)))])


def random_function(rng: np.random.Generator, G: FiniteAbelianGroup, complex_values: bool = True) -> GroupFunction:
    vals = rng.standard_normal(G.size)
    if complex_values:
        vals = vals + 1j * rng.standard_normal(G.size)
    return GroupFunction(G, vals)


def random_subgroup(rng: np.random.Generator, G: FiniteAbelianGroup, max_gens: int = 2):
    gens = [int(g) for g in rng.integers(0, G.size, int(rng.integers(1, max_gens + 1)))]
    return subgroup_closure(G, gens)


def random_bohr_params(rng: np.random.Generator, table=BOHR_GROUPS) -> tuple[FiniteAbelianGroup, list[int], list[float]]:
    G = pick_group(rng, table)
    k = int(rng.integers(1, 4))
    chars = [int(c) for c in rng.integers(1, G.size, k)]
    kappas = [float(x) for x in rng.uniform(0.25, 2.0, k)]
    return G, chars, kappas


def signed_coset_sum(rng: np.random.Generator, G: FiniteAbelianGroup, max_pieces: int = 3) -> tuple[np.ndarray, list]:
    """Integer vector sum_j s_j 1_{x_j + H_j} together with its pieces."""
    v = np.zeros(G.size, dtype=np.int64)
    pieces = []
    for _ in range(int(rng.integers(1, max_pieces + 1))):
        H = random_subgroup(rng, G)
        x = int(rng.integers(G.size))
        s = int(rng.choice([-1, 1]))
        v += s * np.asarray(coset_indicator(x, H).values, dtype=np.int64)
        pieces.append((s, x, H))
    return v, pieces


def perturbed_coset_sum(rng: np.random.Generator, G: FiniteAbelianGroup, max_pieces: int = 3, noise: float = 0.01):
    """Signed coset sum plus a real perturbation of sup norm at most ``noise``."""
    while True:
        v, pieces = signed_coset_sum(rng, G, max_pieces)
        if np.any(v):
            break
    pert = rng.uniform(-noise, noise, G.size)
    return GroupFunction(G, v.astype(float) + pert), pieces


def decompose_instance(rng: np.random.Generator, max_norm: float = 5.0, structured: bool = True, table=DECOMPOSE_GROUPS):
    """Integer f with ||f||_A <= max_norm.

    Structured instances are signed sums of at most 4 cosets; the others add up
    to three signed point masses to such a sum (each point mass has A-norm 1).
    """
    while True:
        G = pick_group(rng, table)
        v, pieces = signed_coset_sum(rng, G, 4 if structured else 2)
        if not structured:
            for _ in range(int(rng.integers(1, 4))):
                v[int(rng.integers(G.size))] += int(rng.choice([-1, 1]))
        if not np.any(v):
            continue
        f = GroupFunction(G, v.astype(float))
        if algebra_norm(f) <= max_norm + 1e-9:
            return f, pieces


def freiman_sets(rng: np.random.Generator, count_each: int = 10, max_size: int = 512) -> list[tuple[str, FiniteAbelianGroup, list[int]]]:
    """Subgroups, intervals (arithmetic progressions) and unions of two cosets."""
    table = [o for o in DECOMPOSE_GROUPS if int(np.prod(o)) <= max_size]
    out = []
    for _ in range(count_each):
        G = pick_group(rng, table)
        out.append(("subgroup", G, [int(x) for x in random_subgroup(rng, G).elements]))
    for _ in range(count_each):
        G = pick_group(rng, table)
        step = int(rng.integers(1, G.size))
        start = int(rng.integers(G.size))
        length = int(rng.integers(1, max(2, G.size // 3)))
        elems = sorted({int(G.add(start, G.scale(step, i))) for i in range(length)})
        out.append(("interval", G, elems))
    for _ in range(count_each):
        G = pick_group(rng, table)
        H = random_subgroup(rng, G)
        a, b = (int(x) for x in rng.integers(0, G.size, 2))
        elems = sorted(set(np.asarray(G.add(a, H.elements)).tolist()) | set(np.asarray(G.add(b, H.elements)).tolist()))
        out.append(("two-cosets", G, elems))
    return out


def connectedness_candidates(rng: np.random.Generator, count: int = 300, n: int = 64, max_size: int = 16) -> list[list[int]]:
    """Candidate sets in Z/n (0 excluded) biased toward additive structure."""
    out = []
    G = cyclic(n)
    for i in range(count):
        kind = i % 4
        if kind == 0:
            A = set(int(a) for a in rng.integers(1, n, int(rng.integers(2, max_size + 1))))
        elif kind == 1:
            H = random_subgroup(rng, G, 1)
            A = {int(h) for h in H.elements if h != 0}
        elif kind == 2:
            step = int(rng.integers(1, n))
            start = int(rng.integers(1, n))
            A = {int((start + step * j) % n) for j in range(int(rng.integers(2, max_size + 1)))}
        else:
            H = random_subgroup(rng, G, 1)
            shift = int(rng.integers(1, n))
            A = {int(h) for h in H.elements if h != 0} | {int((h + shift) % n) for h in H.elements}
        A.discard(0)
        A = sorted(A)[:max_size]
        if A:
            out.append(A)
    return out
