"""Fourier-combinatorial primitives: algebra norm, large spectrum, rounding,
dissociated sets and their spans, Chang covers, Riesz products and additive
energy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AmbiguousRounding, CapExceeded, NotDissociated
from .groups import DUAL, PRIMAL, FiniteAbelianGroup, GroupFunction, as_index, dft

DEFAULT_CAP = 16
SPEC_RTOL = 1e-12


def algebra_norm(f: GroupFunction) -> float:
    """||f||_A = sum_gamma |f^(gamma)|."""
    return float(np.abs(dft(f).values).sum())


def l1_norm(f: GroupFunction) -> float:
    return float(np.abs(f.values).mean())


@dataclass(frozen=True)
class SpectrumSet:
    rho: float
    base_norm: float
    members: tuple[int, ...]

    def __contains__(self, gamma: int) -> bool:
        return int(gamma) in set(self.members)

    def __len__(self) -> int:
        return len(self.members)


def spectrum_mask(fhat_abs: np.ndarray, threshold: float) -> np.ndarray:
    """Characters with |f^| >= threshold, erring toward inclusion by a relative 1e-12."""
    return fhat_abs >= threshold - SPEC_RTOL * max(abs(threshold), 1e-300)


def spec(f: GroupFunction, rho: float) -> SpectrumSet:
    """Spec_rho(f) = {gamma : |f^(gamma)| >= rho ||f||_1}."""
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")
    base = l1_norm(f)
    mags = np.abs(dft(f).values)
    members = np.flatnonzero(spectrum_mask(mags, rho * base))
    return SpectrumSet(float(rho), base, tuple(int(m) for m in members))


@dataclass(frozen=True)
class RoundingReport:
    rounded: GroupFunction
    distance: float


def distance_to_integers(values: np.ndarray) -> float:
    v = np.real(np.asarray(values))
    return float(np.abs(v - np.rint(v)).max(initial=0.0))


def round_to_integers(f: GroupFunction, tol: float = 1e-12) -> RoundingReport:
    """Nearest-integer rounding f_Z together with d(f, Z)."""
    v = np.asarray(f.values)
    if np.iscomplexobj(v):
        if np.abs(v.imag).max(initial=0.0) > 1e-9 * max(1.0, np.abs(v).max(initial=0.0)):
            raise ValueError("rounding requires a real-valued function")
        v = v.real
    r = np.rint(v)
    dist = float(np.abs(v - r).max(initial=0.0))
    if dist >= 0.5 - tol:
        raise AmbiguousRounding(f"d(f, Z) = {dist} is too close to 1/2")
    return RoundingReport(GroupFunction(f.group, r.astype(float), f.domain), dist)


# --------------------------------------------------------------- dissociation
def _as_indices(group: FiniteAbelianGroup, A: Iterable) -> list[int]:
    return [as_index(group, a) for a in A]


@dataclass(frozen=True)
class DissociationResult:
    dissociated: bool
    witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.dissociated


def _subset_sums(group: FiniteAbelianGroup, A: Sequence[int]) -> np.ndarray:
    """Array s with s[mask] = sum of the elements selected by the bitmask."""
    sums = np.zeros(1, dtype=np.int64)
    for a in A:
        sums = np.concatenate([sums, np.asarray(group.add(sums, a), dtype=np.int64)])
    return sums


def is_dissociated(group: FiniteAbelianGroup, A: Iterable, cap: int | None = DEFAULT_CAP) -> DissociationResult:
    """Decide whether only the trivial {-1,0,1}-combination of A vanishes.

    A nontrivial vanishing combination exists exactly when two distinct subsets
    of A have the same sum (put +1 on one difference, -1 on the other), so it
    suffices to compare the 2^m subset sums.
    """
    A = _as_indices(group, A)
    m = len(A)
    if cap is not None and m > cap:
        raise CapExceeded(f"|A| = {m} exceeds the dissociation cap {cap}")
    sums = _subset_sums(group, A)
    order = np.argsort(sums, kind="stable")
    s_sorted = sums[order]
    dup = np.flatnonzero(s_sorted[1:] == s_sorted[:-1])
    if dup.size == 0:
        return DissociationResult(True, None)
    # report the collision whose later mask is smallest (first found when scanning masks upward)
    best = None
    for k in dup:
        lo, hi = sorted((int(order[k]), int(order[k + 1])))
        if best is None or (hi, lo) < (best[1], best[0]):
            best = (lo, hi)
    # the earliest colliding mask pairs with the earliest previous mask of equal sum
    hi = best[1]
    same = np.flatnonzero(sums[:hi] == sums[hi])
    lo = int(same[0])
    eps = tuple(((lo >> i) & 1) - ((hi >> i) & 1) for i in range(m))
    return DissociationResult(False, eps)


def span_mask(group: FiniteAbelianGroup, A: Iterable, cap: int | None = DEFAULT_CAP) -> np.ndarray:
    """Indicator of <A> = {sum eps_i a_i : eps_i in {-1, 0, 1}}."""
    A = _as_indices(group, A)
    if cap is not None and len(A) > cap:
        raise CapExceeded(f"|A| = {len(A)} exceeds the span cap {cap}")
    mask = np.zeros(group.size, dtype=bool)
    mask[0] = True
    for a in A:
        mask = _extend_span(group, mask, a)
    return mask


def _extend_span(group: FiniteAbelianGroup, mask: np.ndarray, a: int) -> np.ndarray:
    cur = np.flatnonzero(mask)
    new = mask.copy()
    new[np.asarray(group.add(cur, a))] = True
    new[np.asarray(group.sub(cur, a))] = True
    return new


def span(group: FiniteAbelianGroup, A: Iterable, cap: int | None = DEFAULT_CAP) -> frozenset[int]:
    return frozenset(int(i) for i in np.flatnonzero(span_mask(group, A, cap)))


@dataclass(frozen=True)
class ChangCover:
    members: tuple[int, ...]
    size_bound: float
    exceeds_bound: bool

    def __len__(self) -> int:
        return len(self.members)


def chang_cover(
    group: FiniteAbelianGroup,
    gamma: Iterable,
    alpha: float,
    K: float,
    cap: int | None = DEFAULT_CAP,
) -> ChangCover:
    """Greedy dissociated Lambda inside Gamma whose span contains Gamma.

    Each element added lies outside the span of the previous ones, which keeps
    Lambda dissociated; the cardinality bound 32 K ln(1/alpha) is reported
    rather than assumed.
    """
    members = sorted(set(_as_indices(group, gamma)))
    if not members:
        raise ValueError("chang_cover needs a nonempty set")
    if not 0.0 < alpha <= 1.0 or K < 1.0:
        raise ValueError("need 0 < alpha <= 1 and K >= 1")
    lam: list[int] = []
    mask = np.zeros(group.size, dtype=bool)
    mask[0] = True
    for g in members:
        if mask[g]:
            continue
        lam.append(g)
        if cap is not None and len(lam) > cap:
            raise CapExceeded(f"Chang cover grew past the cap {cap}")
        mask = _extend_span(group, mask, g)
    bound = 32.0 * K * math.log(1.0 / alpha) if alpha < 1.0 else 0.0
    return ChangCover(tuple(lam), bound, len(lam) > bound)


# ---------------------------------------------------------------- Riesz products
@dataclass(frozen=True, eq=False)
class RieszProduct:
    points: tuple[int, ...]
    p: GroupFunction
    p_hat: GroupFunction


def riesz_coefficients(group: FiniteAbelianGroup, batch: np.ndarray) -> np.ndarray:
    """Fourier coefficients for a batch of point lists (shape (B, m)).

    Coefficient convention: p^(gamma) = |G|^{-1} prod_i (1 + cos(2 pi gamma(a_i))),
    which makes p(x) = sum over eps with sum eps_i a_i = x of 2^{-|eps|}.
    """
    batch = np.atleast_2d(np.asarray(batch, dtype=np.int64))
    B, m = batch.shape
    out = np.full((B, group.size), 1.0 / group.size)
    if m == 0:
        return out
    L = group.exponent
    cos_table = np.cos(2.0 * np.pi * np.arange(L) / L)
    for i in range(m):
        num = group.phase_numerators(group.elements(), batch[:, i])  # (|G|, B)
        out *= 1.0 + cos_table[num.T]
    return out


def riesz_product(group: FiniteAbelianGroup, A: Iterable, cap: int = DEFAULT_CAP) -> RieszProduct:
    pts = _as_indices(group, A)
    verdict = is_dissociated(group, pts, cap)
    if not verdict:
        raise NotDissociated(f"points {pts} satisfy the relation {verdict.witness}")
    coeffs = riesz_coefficients(group, np.asarray([pts], dtype=np.int64).reshape(1, len(pts)))[0]
    p_vals = group.idft(coeffs).real
    return RieszProduct(
        tuple(pts),
        GroupFunction(group, p_vals, PRIMAL),
        GroupFunction(group, coeffs, DUAL),
    )


# -------------------------------------------------------------- additive energy
def additive_energy(group: FiniteAbelianGroup, A: Iterable) -> int:
    """Number of (a1, a2, a3, a4) in A^4 with a1 + a2 = a3 + a4 (sum histogram)."""
    idx = np.unique(np.asarray(_as_indices(group, A), dtype=np.int64))
    if idx.size == 0:
        return 0
    if idx.size > 4096:
        raise CapExceeded("additive_energy supports |A| <= 4096")
    sums = np.asarray(group.add(idx[:, None], idx[None, :])).reshape(-1)
    hist = np.bincount(sums, minlength=group.size)
    return int(np.dot(hist, hist))


def additive_energy_fourier(group: FiniteAbelianGroup, A: Iterable) -> float:
    """|G|^3 sum_gamma |1_A^(gamma)|^4."""
    ind = group.mask(_as_indices(group, A)).astype(float)
    mags = np.abs(group.dft(ind))
    return float(group.size**3 * np.sum(mags**4))


def doubling_constant(group: FiniteAbelianGroup, A: Iterable) -> float:
    """K = |A + A| / |A|."""
    m = group.mask(_as_indices(group, A))
    n = int(m.sum())
    if n == 0:
        raise ValueError("empty set")
    return float(group.sumset_mask(m, m).sum()) / n
