"""Bourgain systems: nested families of symmetric sets indexed by rho in [0, 4].

Most systems are stored through a radius function ``r : G -> [0, inf]`` with
``X_rho = {x : r(x) <= rho}``; this covers subgroup systems (``r = 0`` on the
subgroup, ``inf`` elsewhere), Bohr systems (``r = max_j |1 - gamma_j(x)| / kappa_j``),
dilates (``r / lambda``), joins (pointwise max) and relabelled copies.  Because
the level sizes are step functions of rho, the doubling and regularity
inequalities can be checked exactly at their finitely many jump points.
Families that are not described by a radius (for instance deliberately broken
ones used to exercise the axiom checker) use :class:`FamilySystem`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionCertificateError,
    EmptyLevelSet,
    GroupMismatch,
    LevelDomainError,
    NotFound,
)
from .groups import DUAL, PRIMAL, FiniteAbelianGroup, GroupFunction, Subgroup, as_index

RHO_MAX = 4.0
LEVEL_RTOL = 1e-12
RATIO_TOL = 1e-9
DYADIC_GRID = tuple(2.0**k for k in range(-10, 3))


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not (0.0 <= rho <= RHO_MAX * (1 + LEVEL_RTOL)):
        raise LevelDomainError(f"level {rho} lies outside [0, 4]")
    return min(rho, RHO_MAX)


def _pow2(d: float) -> float:
    return 2.0 ** min(d, 1000.0)


class BourgainSystem:
    """Common interface; concrete systems implement the level-set primitives."""

    group: FiniteAbelianGroup
    dim: float
    kind: str
    params: dict

    # -- primitives implemented by subclasses
    def level_mask(self, rho: float) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def level_size(self, rho) -> np.ndarray | int:  # pragma: no cover - abstract
        raise NotImplementedError

    def level_size_left(self, rho) -> np.ndarray | int:  # pragma: no cover - abstract
        raise NotImplementedError

    def critical_points(self) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def level_key(self, rho: float):  # pragma: no cover - abstract
        raise NotImplementedError

    # -- derived quantities
    def level_set(self, rho: float) -> np.ndarray:
        return np.flatnonzero(self.level_mask(rho))

    @property
    def size(self) -> int:
        return int(self.level_size(1.0))

    @property
    def density(self) -> float:
        return self.size / self.group.size

    def _cache(self) -> dict:
        cache = self.__dict__.get("_measure_cache")
        if cache is None:
            cache = {}
            object.__setattr__(self, "_measure_cache", cache)
        return cache

    def describe(self) -> dict:
        return {"orders": list(self.group.orders), "kind": self.kind, "params": self.params, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class RadiusSystem(BourgainSystem):
    group: FiniteAbelianGroup
    radius: np.ndarray
    dim: float
    kind: str = "radius"
    params: dict = field(default_factory=dict)
    verify: bool = True

    def __post_init__(self) -> None:
        r = np.asarray(self.radius, dtype=float).reshape(-1)
        if r.shape[0] != self.group.size:
            raise ValueError("radius array has the wrong length")
        if np.any(r < 0) or np.any(np.isnan(r)):
            raise ValueError("radii must be nonnegative")
        r = r.copy()
        r.setflags(write=False)
        object.__setattr__(self, "radius", r)
        srt = np.sort(r)
        srt.setflags(write=False)
        object.__setattr__(self, "_sorted", srt)
        object.__setattr__(self, "dim", float(self.dim))
        if self.dim < 0:
            raise ValueError("dimension certificate must be nonnegative")
        if self.verify:
            verify_dimension(self)

    def level_mask(self, rho: float) -> np.ndarray:
        rho = _check_rho(rho)
        return self.radius <= rho * (1 + LEVEL_RTOL)

    def level_size(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = np.searchsorted(self._sorted, rho * (1 + LEVEL_RTOL), side="right")
        return int(out) if out.ndim == 0 else out

    def level_size_left(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = np.searchsorted(self._sorted, rho * (1 - LEVEL_RTOL), side="left")
        out = np.maximum(out, np.searchsorted(self._sorted, 0.0, side="right"))
        return int(out) if out.ndim == 0 else out

    def critical_points(self) -> np.ndarray:
        r = self._sorted
        r = r[np.isfinite(r) & (r > 0) & (r <= RHO_MAX * (1 + LEVEL_RTOL))]
        if r.size == 0:
            return r
        keep = np.concatenate([[True], np.diff(r) > LEVEL_RTOL * r[1:]])
        return r[keep]

    def level_key(self, rho: float):
        return int(self.level_size(_check_rho(rho)))


@dataclass(frozen=True, eq=False)
class FamilySystem(BourgainSystem):
    """Explicit step family: X_rho = sets[k] for thresholds[k] <= rho < thresholds[k+1]."""

    group: FiniteAbelianGroup
    thresholds: tuple[float, ...]
    masks: tuple[np.ndarray, ...]
    dim: float
    kind: str = "family"
    params: dict = field(default_factory=dict)
    verify: bool = True

    def __post_init__(self) -> None:
        th = np.asarray(self.thresholds, dtype=float)
        if th.size == 0 or th[0] != 0.0 or np.any(np.diff(th) <= 0):
            raise ValueError("thresholds must start at 0 and increase strictly")
        if len(self.masks) != th.size:
            raise ValueError("need one set per threshold")
        masks = []
        for m in self.masks:
            m = np.asarray(m, dtype=bool).reshape(-1)
            if m.shape[0] != self.group.size:
                raise ValueError("mask has the wrong length")
            m = m.copy()
            m.setflags(write=False)
            masks.append(m)
        object.__setattr__(self, "thresholds", tuple(float(t) for t in th))
        object.__setattr__(self, "masks", tuple(masks))
        object.__setattr__(self, "_sizes", np.asarray([int(m.sum()) for m in masks]))
        object.__setattr__(self, "dim", float(self.dim))
        if self.verify:
            verify_dimension(self)

    def _index(self, rho, left: bool = False):
        th = np.asarray(self.thresholds)
        rho = np.asarray(rho, dtype=float)
        if left:
            k = np.searchsorted(th, rho * (1 - LEVEL_RTOL), side="left") - 1
        else:
            k = np.searchsorted(th, rho * (1 + LEVEL_RTOL), side="right") - 1
        return np.maximum(k, 0)

    def level_mask(self, rho: float) -> np.ndarray:
        rho = _check_rho(rho)
        return self.masks[int(self._index(rho))]

    def level_size(self, rho):
        out = self._sizes[self._index(rho)]
        return int(out) if np.ndim(out) == 0 else out

    def level_size_left(self, rho):
        out = self._sizes[self._index(rho, left=True)]
        return int(out) if np.ndim(out) == 0 else out

    def critical_points(self) -> np.ndarray:
        th = np.asarray(self.thresholds[1:])
        return th[th <= RHO_MAX * (1 + LEVEL_RTOL)]

    def level_key(self, rho: float):
        return ("k", int(self._index(_check_rho(rho))))


def as_family(S: BourgainSystem, extra: Iterable[float] = ()) -> FamilySystem:
    pts = sorted({0.0, *(float(c) for c in S.critical_points()), *(float(e) for e in extra)})
    pts = [p for p in pts if p <= RHO_MAX]
    return FamilySystem(S.group, tuple(pts), tuple(S.level_mask(p) for p in pts), S.dim, S.kind, dict(S.params), verify=False)


# ------------------------------------------------------------------ doubling
def doubling_points(S: BourgainSystem) -> np.ndarray:
    """Every rho in [0, 1] at which either |X_rho| or |X_2rho| can change."""
    c = S.critical_points()
    pts = np.concatenate([[0.0, 1.0], c[c <= 1.0], c[c <= 2.0] / 2.0])
    return np.unique(pts)


def doubling_profile(S: BourgainSystem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    pts = doubling_points(S)
    return pts, np.asarray(S.level_size(pts)), np.asarray(S.level_size(2 * pts))


def verify_dimension(S: BourgainSystem) -> None:
    """Reject a system whose level sizes break |X_2rho| <= 2^d |X_rho| for rho <= 1."""
    pts, small, big = doubling_profile(S)
    bad = np.flatnonzero(big > _pow2(S.dim) * small * (1 + 1e-12))
    if bad.size:
        i = int(bad[0])
        raise DimensionCertificateError(
            f"|X_{2 * pts[i]:g}| = {big[i]} exceeds 2^{S.dim:g} * |X_{pts[i]:g}| = {_pow2(S.dim) * small[i]:g}"
        )


def empirical_dimension(S: BourgainSystem) -> float:
    """Smallest d for which the doubling inequality holds (exactly, via jump points)."""
    pts, small, big = doubling_profile(S)
    return float(max(0.0, np.log2(big / small).max()))


def with_dimension(S: BourgainSystem, d: float) -> BourgainSystem:
    """Same family with a weaker (larger) dimension certificate."""
    if d < S.dim:
        raise ValueError("a certificate can only be weakened")
    if isinstance(S, RadiusSystem):
        return RadiusSystem(S.group, S.radius, d, S.kind, dict(S.params), verify=False)
    return FamilySystem(S.group, S.thresholds, S.masks, d, S.kind, dict(S.params), verify=False)


# -------------------------------------------------------------- constructors
def subgroup_system(H: Subgroup) -> RadiusSystem:
    r = np.where(H.mask, 0.0, np.inf)
    return RadiusSystem(H.group, r, 0.0, "subgroup", {"generators": [list(H.group.coords(g)) for g in H.generators]})


def bohr_radius(group: FiniteAbelianGroup, chars: Sequence[int], kappas: Sequence[float]) -> np.ndarray:
    chars = np.asarray(chars, dtype=np.int64)
    kap = np.asarray(kappas, dtype=float)
    chords = group.chord(chars)  # (k, |G|)
    return (chords / kap[:, None]).max(axis=0)


def bohr_system(group: FiniteAbelianGroup, chars: Sequence, kappas: Sequence[float]) -> RadiusSystem:
    """X_rho = {x : |1 - gamma_j(x)| <= kappa_j rho for all j}, dimension 3k."""
    chars = [as_index(group, c) for c in chars]
    kappas = [float(k) for k in kappas]
    if not chars or len(chars) != len(kappas):
        raise ValueError("need k >= 1 characters and matching radii")
    if any(k <= 0 for k in kappas):
        raise ValueError("Bohr radii must be positive")
    r = bohr_radius(group, chars, kappas)
    params = {"characters": [list(group.coords(c)) for c in chars], "kappas": kappas}
    return RadiusSystem(group, r, 3.0 * len(chars), "bohr", params)


def bohr_size_bound(group: FiniteAbelianGroup, kappas: Sequence[float]) -> float:
    """8^-k prod kappa_j |G|."""
    return float(group.size * np.prod(np.asarray(kappas, dtype=float)) / 8.0 ** len(kappas))


def dilate(S: BourgainSystem, lam: float) -> BourgainSystem:
    """X'_rho = X_{lam rho}, same dimension certificate."""
    lam = float(lam)
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"dilation factor must lie in (0, 1], got {lam}")
    params = {"base": S.describe(), "lambda": lam}
    if isinstance(S, RadiusSystem):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(S.radius == 0, 0.0, S.radius / lam)
        kind = "subgroup" if S.kind == "subgroup" else "dilate"
        if kind == "subgroup":
            params = dict(S.params)
        return RadiusSystem(S.group, r, S.dim, kind, params)
    th = [t / lam for t in S.thresholds]
    return FamilySystem(S.group, tuple(th), S.masks, S.dim, "dilate", params)


def join(S: BourgainSystem, T: BourgainSystem) -> BourgainSystem:
    """Intersection system X_rho cap X'_rho with certificate 4(d + d')."""
    if S.group != T.group:
        raise GroupMismatch(f"{S.group} vs {T.group}")
    d = 4.0 * (S.dim + T.dim)
    params = {"left": S.describe(), "right": T.describe()}
    if isinstance(S, RadiusSystem) and isinstance(T, RadiusSystem):
        return RadiusSystem(S.group, np.maximum(S.radius, T.radius), d, "join", params)
    pts = sorted({0.0, *S.critical_points().tolist(), *T.critical_points().tolist()})
    pts = [p for p in pts if p <= RHO_MAX]
    masks = tuple(S.level_mask(p) & T.level_mask(p) for p in pts)
    return FamilySystem(S.group, tuple(pts), masks, d, "join", params)


def join_size_bound(S: BourgainSystem, T: BourgainSystem) -> float:
    """2^{-3(d+d')} mu(T) |S|."""
    return 2.0 ** (-3.0 * (S.dim + T.dim)) * T.density * S.size


def freiman_image(S: BourgainSystem, target: FiniteAbelianGroup, mapping: dict[int, int]) -> BourgainSystem:
    """Relabel the level sets of S through a supplied injective map defined on X_4.

    No isomorphism search is attempted; the relabelled family is re-checked
    against the axioms and rejected if any of them fails.
    """
    dom = S.level_set(RHO_MAX)
    missing = [int(x) for x in dom if int(x) not in mapping]
    if missing:
        raise ValueError(f"mapping is undefined on {missing[:5]}")
    images = [int(mapping[int(x)]) for x in dom]
    if len(set(images)) != len(images):
        raise ValueError("mapping is not injective on X_4")
    if isinstance(S, RadiusSystem):
        r = np.full(target.size, np.inf)
        r[np.asarray(images, dtype=np.int64)] = S.radius[dom]
        T: BourgainSystem = RadiusSystem(target, r, S.dim, "freiman", {"source": S.describe()})
    else:
        masks = []
        for m in S.masks:
            t = np.zeros(target.size, dtype=bool)
            t[[mapping[int(x)] for x in np.flatnonzero(m)]] = True
            masks.append(t)
        T = FamilySystem(target, S.thresholds, tuple(masks), S.dim, "freiman", {"source": S.describe()})
    report = check_axioms(T, covering=False)
    if not report.passed:
        raise DimensionCertificateError(f"relabelled system fails the axioms: {report.failures()}")
    return T


# ------------------------------------------------------------------- axioms
@dataclass
class AxiomReport:
    nesting: bool = True
    zero: bool = True
    symmetry: bool = True
    addition: bool = True
    doubling: bool = True
    counterexamples: dict = field(default_factory=dict)
    covering: list = field(default_factory=list)
    entropy: list = field(default_factory=list)
    grid: tuple = ()

    @property
    def covering_ok(self) -> bool:
        return all(c["count"] <= c["bound"] for c in self.covering)

    @property
    def entropy_ok(self) -> bool:
        return all(c["count"] <= c["bound"] * (1 + 1e-9) for c in self.entropy)

    @property
    def passed(self) -> bool:
        return self.nesting and self.zero and self.symmetry and self.addition and self.doubling

    def failures(self) -> list[str]:
        names = ["nesting", "zero", "symmetry", "addition", "doubling"]
        return [n for n in names if not getattr(self, n)]

    def to_dict(self) -> dict:
        return {
            "BS1_nesting": self.nesting,
            "BS2_zero": self.zero,
            "BS3_symmetry": self.symmetry,
            "BS4_addition": self.addition,
            "BS5_doubling": self.doubling,
            "passed": self.passed,
            "counterexamples": self.counterexamples,
            "covering": self.covering,
            "covering_ok": self.covering_ok,
            "entropy": self.entropy,
            "entropy_ok": self.entropy_ok,
            "grid": list(self.grid),
        }


def greedy_cover_count(group: FiniteAbelianGroup, target: np.ndarray, tile: np.ndarray) -> int:
    """Greedily cover ``target`` by translates x + tile with x ranging over target."""
    tile_idx = np.flatnonzero(tile)
    if tile_idx.size == 0:
        raise EmptyLevelSet("cannot cover with an empty set")
    remaining = target.copy()
    count = 0
    pos = 0
    n = group.size
    while True:
        nz = np.flatnonzero(remaining[pos:])
        if nz.size == 0:
            return count
        x = pos + int(nz[0])
        remaining[np.asarray(group.add(x, tile_idx))] = False
        count += 1
        pos = x
        if pos >= n:
            return count


def axiom_grid(S: BourgainSystem, extra: Iterable[float] = (), max_critical: int = 16) -> list[float]:
    crit = S.critical_points()
    if crit.size > max_critical:
        sel = np.linspace(0, crit.size - 1, max_critical).round().astype(int)
        crit = crit[sel]
    pts = {0.0, *DYADIC_GRID, *crit.tolist(), *(float(e) for e in extra)}
    return sorted(p for p in pts if 0.0 <= p <= RHO_MAX)


def check_axioms(S: BourgainSystem, grid: Sequence[float] | None = None, covering: bool = True) -> AxiomReport:
    G = S.group
    grid = axiom_grid(S) if grid is None else sorted(float(g) for g in grid)
    rep = AxiomReport(grid=tuple(grid))
    masks = {rho: S.level_mask(rho) for rho in grid}

    # BS1: consecutive grid levels are nested (transitivity covers the rest)
    for a, b in zip(grid, grid[1:]):
        extra = masks[a] & ~masks[b]
        if extra.any():
            rep.nesting = False
            rep.counterexamples["nesting"] = {"rho_small": a, "rho_big": b, "element": int(np.flatnonzero(extra)[0])}
            break

    # BS2
    zero_mask = S.level_mask(0.0)
    if not zero_mask[0]:
        rep.zero = False
        rep.counterexamples["zero"] = {"rho": 0.0}

    # BS3
    for rho in grid:
        m = masks[rho]
        asym = m & ~m[G.neg_table]
        if asym.any():
            rep.symmetry = False
            x = int(np.flatnonzero(asym)[0])
            rep.counterexamples["symmetry"] = {"rho": rho, "element": x, "negation": int(G.neg_table[x])}
            break

    # BS4
    done = False
    for i, a in enumerate(grid):
        for b in grid[i:]:
            if a + b > RHO_MAX * (1 + LEVEL_RTOL) or done:
                continue
            s = G.sumset_mask(masks[a], masks[b])
            outside = s & ~S.level_mask(min(a + b, RHO_MAX))
            if outside.any():
                rep.addition = False
                t = int(np.flatnonzero(outside)[0])
                xa = np.flatnonzero(masks[a])
                xb = np.asarray(G.sub(t, xa))
                hit = xa[masks[b][xb]][0]
                rep.counterexamples["addition"] = {
                    "rho": a,
                    "rho_prime": b,
                    "x": int(hit),
                    "y": int(G.sub(t, int(hit))),
                    "sum": t,
                }
                done = True

    # BS5, exactly at the jump points
    pts, small, big = doubling_profile(S)
    bad = np.flatnonzero(big > _pow2(S.dim) * small * (1 + 1e-12))
    if bad.size:
        rep.doubling = False
        i = int(bad[0])
        rep.counterexamples["doubling"] = {"rho": float(pts[i]), "size": int(small[i]), "size_double": int(big[i])}

    if covering:
        dens = S.density
        seen: dict = {}
        for rho in grid:
            if 0.0 < rho <= 0.5:
                key = ("cov", S.level_key(2 * rho), S.level_key(rho / 2))
                if key not in seen:
                    seen[key] = greedy_cover_count(G, S.level_mask(2 * rho), S.level_mask(rho / 2))
                rep.covering.append({"rho": rho, "count": seen[key], "bound": _pow2(4 * S.dim)})
            if 0.0 < rho <= 1.0 and dens > 0:
                key = ("ent", S.level_key(rho))
                if key not in seen:
                    seen[key] = greedy_cover_count(G, np.ones(G.size, dtype=bool), S.level_mask(rho))
                bound = (4.0 / rho) ** min(S.dim, 1000.0) / dens
                rep.entropy.append({"rho": rho, "count": seen[key], "bound": bound})
    return rep


# -------------------------------------------------------------- regularity
@dataclass(frozen=True)
class RegularityReport:
    lam: float
    max_violation: float
    kappa_grid: tuple[float, ...]
    jump_points_tested: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "max_violation": self.max_violation,
            "kappa_grid": list(self.kappa_grid),
            "jump_points_tested": self.jump_points_tested,
            "passed": self.passed,
        }


def regularity_violation(S: BourgainSystem, lam: float = 1.0, kappa_points: int = 41) -> RegularityReport:
    """Largest violation of 1 - 10d|k| <= |X_lam| / |X_(1+k)lam| <= 1 + 10d|k|.

    The check runs on an evenly spaced kappa grid and, to make it exact for
    step-function level sets, at every jump of |X_(1+k)lam|: for positive kappa
    at the jump itself, for negative kappa at the left limit.
    """
    d = S.dim
    K = 1.0 / (10.0 * d) if d > 0 else math.inf
    lo = max(-K, -1.0)
    hi = min(K, RHO_MAX / lam - 1.0)
    if math.isinf(K):
        grid = np.linspace(lo, hi, kappa_points)
    else:
        grid = np.clip(np.linspace(-K, K, kappa_points), lo, hi)
    base = S.level_size(lam)
    crit = S.critical_points()
    kj = crit / lam - 1.0
    pos = kj[(kj > 0) & (kj <= hi)]
    neg = kj[(kj < 0) & (kj >= lo)]

    kap = np.concatenate([grid, pos, neg])
    sizes = np.concatenate(
        [
            np.asarray(S.level_size(np.clip((1.0 + grid) * lam, 0.0, RHO_MAX))),
            np.asarray(S.level_size((1.0 + pos) * lam)),
            np.asarray(S.level_size_left((1.0 + neg) * lam)),
        ]
    ).astype(float)
    ratio = base / sizes
    slack = 10.0 * d * np.abs(kap)
    viol = np.maximum.reduce([np.zeros_like(ratio), (1.0 - slack) - ratio, ratio - (1.0 + slack)])
    mv = float(viol.max(initial=0.0))
    return RegularityReport(float(lam), mv, tuple(float(g) for g in grid), int(pos.size + neg.size), mv <= RATIO_TOL)


def is_regular(S: BourgainSystem, lam: float = 1.0) -> bool:
    return regularity_violation(S, lam).passed


def lambda_grid(step: float = 1e-3) -> np.ndarray:
    n = int(round(0.5 / step))
    return np.round(0.5 + np.arange(n + 1) * step, 12)


def regular_dilate_search(S: BourgainSystem, step: float = 1e-3) -> tuple[float, RegularityReport]:
    """First lambda in [1/2, 1] (scanning upward) for which lambda*S is regular."""
    best = None
    for lam in lambda_grid(step):
        rep = regularity_violation(S, float(lam))
        if rep.passed:
            return float(lam), rep
        if best is None or rep.max_violation < best.max_violation:
            best = rep
    raise NotFound("no regular dilate on the lambda grid", best.lam, best.max_violation)


def regularize(S: BourgainSystem, step: float = 1e-3) -> tuple[BourgainSystem, RegularityReport]:
    lam, rep = regular_dilate_search(S, step)
    return dilate(S, lam), rep


# --------------------------------------------------------------- measures
@dataclass(frozen=True, eq=False)
class SystemMeasure:
    rho: float
    beta: GroupFunction
    beta_hat: GroupFunction
    level_size: int
    support: np.ndarray

    def support_ok(self, S: BourgainSystem) -> bool:
        outer = S.level_mask(min(2 * self.rho, RHO_MAX))
        return bool(np.all(outer[self.support]))


def beta_measure(S: BourgainSystem, rho: float) -> SystemMeasure:
    """beta_rho = 1_X / mu(X) * 1_X / mu(X) with X = X_rho (mean one under E_x)."""
    rho = float(rho)
    if not 0.0 < rho <= 2.0 * (1 + LEVEL_RTOL):
        raise LevelDomainError(f"measures are defined for rho in (0, 2], got {rho}")
    cache = S._cache()
    key = ("beta", S.level_key(rho))
    hit = cache.get(key)
    if hit is not None:
        return SystemMeasure(rho, hit.beta, hit.beta_hat, hit.level_size, hit.support)
    G = S.group
    X = S.level_mask(rho)
    n = int(X.sum())
    if n == 0:
        raise EmptyLevelSet(f"X_{rho} is empty")
    counts = G.representation_counts(X, X)
    beta = G.size * counts.astype(float) / float(n * n)
    bh = G.dft(beta)
    if np.abs(bh.imag).max(initial=0.0) <= 1e-12:
        bh = bh.real
    m = SystemMeasure(rho, GroupFunction(G, beta, PRIMAL), GroupFunction(G, bh, DUAL), n, np.flatnonzero(counts))
    cache[key] = m
    return m


def psi_apply(S: BourgainSystem, f: GroupFunction) -> GroupFunction:
    """psi_S f = f * beta_1."""
    if f.group != S.group:
        raise GroupMismatch(f"{f.group} vs {S.group}")
    G = f.group
    bh = beta_measure(S, 1.0).beta_hat.values
    vals = G.idft(G.dft(f.values) * bh)
    if not np.iscomplexobj(f.values):
        vals = vals.real
    return GroupFunction(G, vals, PRIMAL)


# ------------------------------------------------------------- invariance
@dataclass
class InvarianceReport:
    kappa: float
    dim: float
    regular: bool
    l1_shift_max: float
    l1_shift_bound: float
    psi_shift_max: float | None
    psi_shift_bound: float | None
    spec_checks: list
    passed: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _shift_l1(G: FiniteAbelianGroup, values: np.ndarray, ys: np.ndarray, chunk: int = 256) -> np.ndarray:
    x = G.elements()
    out = np.empty(ys.size)
    for s in range(0, ys.size, chunk):
        yy = ys[s : s + chunk]
        idx = np.asarray(G.add(x[None, :], yy[:, None]))
        out[s : s + chunk] = np.abs(values[idx] - values[None, :]).mean(axis=1)
    return out


def _shift_sup(G: FiniteAbelianGroup, values: np.ndarray, ys: np.ndarray, chunk: int = 256) -> float:
    x = G.elements()
    best = 0.0
    for s in range(0, ys.size, chunk):
        yy = ys[s : s + chunk]
        idx = np.asarray(G.add(x[None, :], yy[:, None]))
        best = max(best, float(np.abs(values[idx] - values[None, :]).max(initial=0.0)))
    return best


def invariance_checks(
    S: BourgainSystem,
    kappa: float,
    f: GroupFunction | None = None,
    deltas: Sequence[float] = (0.1, 0.25, 0.5, 0.9),
    tol: float = 1e-9,
) -> InvarianceReport:
    """Shift-invariance of beta_1 and psi_S f over y in X_kappa, and the phase
    bound |1 - gamma(y)| <= 20 kappa d / delta on Spec_delta(beta_1)."""
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie in (0, 1)")
    G = S.group
    d = S.dim
    ys = S.level_set(kappa)
    m = beta_measure(S, 1.0)
    b = m.beta.values
    l1 = _shift_l1(G, b, ys)
    bound = 20.0 * d * kappa
    ok = bool(l1.max(initial=0.0) <= bound + tol)

    psi_max = psi_bound = None
    if f is not None:
        pv = np.real(psi_apply(S, f).values)
        psi_max = _shift_sup(G, pv, ys)
        psi_bound = bound * f.sup_norm()
        ok = ok and psi_max <= psi_bound + tol

    checks = []
    bh = np.abs(m.beta_hat.values)
    for delta in deltas:
        gam = np.flatnonzero(bh >= delta * (1 - 1e-12))
        worst = float(G.chord(gam, ys).max(initial=0.0)) if gam.size else 0.0
        lim = 20.0 * kappa * d / delta
        checks.append({"delta": float(delta), "spectrum_size": int(gam.size), "max_chord": worst, "bound": lim})
        ok = ok and worst <= lim + tol
    return InvarianceReport(
        float(kappa),
        d,
        is_regular(S),
        float(l1.max(initial=0.0)),
        bound,
        psi_max,
        psi_bound,
        checks,
        ok,
    )
