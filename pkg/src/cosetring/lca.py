"""Finite models of trigonometric-polynomial measures on H x T^d and the
commensurability splitting of subgroups of Z^d.

Frequencies live in H^ x Z^d.  The finite model replaces T^d by (Z/N)^d, so a
frequency (omega, r) becomes the character (omega, r mod N) of H x (Z/N)^d.
Lattices are handled exactly with Python integers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, ModulusTooSmall
from .groups import FiniteAbelianGroup, GroupFunction, Subgroup, cyclic, subgroup_closure

MODEL_SIZE_CAP = 1 << 24


# ------------------------------------------------------------ frequency specs
@dataclass(frozen=True)
class Term:
    sign: int
    omega: tuple[int, ...]
    r: tuple[int, ...]


@dataclass(frozen=True)
class FrequencySpec:
    d: int
    finite_orders: tuple[int, ...]
    terms: tuple[Term, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "finite_orders", tuple(int(n) for n in self.finite_orders))
        terms = []
        for t in self.terms:
            if not isinstance(t, Term):
                t = Term(int(t["sign"]), tuple(t.get("omega", ())), tuple(t["r"]))
            if t.sign not in (1, -1):
                raise ValueError("term signs must be +1 or -1")
            if len(t.r) != self.d or len(t.omega) != len(self.finite_orders):
                raise ValueError("term shape does not match (finite_orders, d)")
            omega = tuple(int(w) % n for w, n in zip(t.omega, self.finite_orders))
            terms.append(Term(t.sign, omega, tuple(int(v) for v in t.r)))
        keys = [(t.omega, t.r) for t in terms]
        if len(set(keys)) != len(keys):
            raise ValueError("frequency atoms must be distinct")
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def max_frequency(self) -> int:
        return max((abs(v) for t in self.terms for v in t.r), default=0)

    @classmethod
    def from_dict(cls, data: dict) -> "FrequencySpec":
        return cls(int(data["d"]), tuple(data.get("finite_orders", ())), tuple(data["terms"]))

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "finite_orders": list(self.finite_orders),
            "terms": [{"sign": t.sign, "omega": list(t.omega), "r": list(t.r)} for t in self.terms],
        }


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % p for p in range(3, math.isqrt(n) + 1, 2))


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(2, int(n))
    while not is_prime(n):
        n += 1
    return n


@dataclass(eq=False)
class ModelBuildReport:
    N: int
    group: FiniteAbelianGroup
    model: GroupFunction
    norm_estimate: float
    target_norm: float | None = None

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "orders": list(self.group.orders),
            "norm_estimate": self.norm_estimate,
            "target_norm": self.target_norm,
            "gap": None if self.target_norm is None else self.norm_estimate - self.target_norm,
        }


def model_group(spec: FrequencySpec, N: int) -> FiniteAbelianGroup:
    return cyclic(*spec.finite_orders, *([N] * spec.d))


def build_finite_model(spec: FrequencySpec, N: int | None = None, floor: int = 101) -> ModelBuildReport:
    """mu~(h, x) = sum_j sign_j omega_j(h) e(r_j . x / N) on H x (Z/N)^d."""
    if N is None:
        N = next_prime(max(floor, 2 * spec.max_frequency + 1))
    N = int(N)
    if not is_prime(N):
        raise ValueError(f"N = {N} must be prime")
    if N <= 2 * spec.max_frequency:
        raise ModulusTooSmall(f"N = {N} must exceed 2 max|r| = {2 * spec.max_frequency}")
    G = model_group(spec, N)
    if G.size > MODEL_SIZE_CAP:
        raise CapExceeded(f"model group has {G.size} elements (cap {MODEL_SIZE_CAP})")
    coeffs = np.zeros(G.size)
    seen: dict[int, Term] = {}
    for t in spec.terms:
        idx = G.index(tuple(t.omega) + tuple(v % N for v in t.r))
        if idx in seen:
            raise ModulusTooSmall(f"frequencies {seen[idx].r} and {t.r} collide mod {N}")
        seen[idx] = t
        coeffs[idx] = t.sign
    vals = G.idft(coeffs)
    model = GroupFunction(G, vals)
    return ModelBuildReport(N, G, model, float(np.abs(vals).mean()))


def norm_quadrature(spec: FrequencySpec, resolution: int = 1 << 14) -> tuple[float, float]:
    """Midpoint-rule value of E_h int_{T^d} |sum_j sign_j omega_j(h) e(r_j . theta)| dtheta.

    Returns (value, error_bound) where the bound uses the Lipschitz estimate
    |grad| <= 2 pi sum_j ||r_j||_1 and the half-cell width 1/(2R).
    """
    R = int(resolution)
    if R < 2 * spec.max_frequency + 1:
        raise ValueError("resolution must be at least 2 max|r| + 1")
    if R**spec.d > MODEL_SIZE_CAP:
        raise CapExceeded("quadrature grid too large")
    H = cyclic(*spec.finite_orders) if spec.finite_orders else None
    hs = H.elements() if H is not None else np.zeros(1, dtype=np.int64)
    theta = (np.arange(R) + 0.5) / R
    grids = np.meshgrid(*([theta] * spec.d), indexing="ij") if spec.d else []
    per_h = []
    for h in hs:
        total = np.zeros([R] * spec.d, dtype=complex) if spec.d else np.zeros((), dtype=complex)
        for t in spec.terms:
            phase = sum(rv * g for rv, g in zip(t.r, grids)) if spec.d else 0.0
            w = H.character_values(H.index(t.omega), int(h)) if H is not None else 1.0
            total = total + t.sign * w * np.exp(2j * np.pi * phase)
        per_h.append(math.fsum(np.abs(total).ravel()) / max(total.size, 1))
    value = math.fsum(per_h) / len(per_h)
    lip = 2 * math.pi * sum(sum(abs(v) for v in t.r) for t in spec.terms)
    return value, lip / (2 * R)


# ------------------------------------------------------------------ lattices
def _echelon(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Row Hermite normal form over the first ``ncols`` columns.

    Pivots are positive and entries above each pivot are reduced into
    [0, pivot).  Extra columns are carried along by the same unimodular
    row operations.
    """
    rows = [list(r) for r in rows]
    pivot_row = 0
    for c in range(ncols):
        # Euclid on column c among rows pivot_row..
        while True:
            live = [i for i in range(pivot_row, len(rows)) if rows[i][c] != 0]
            if len(live) <= 1:
                break
            i_min = min(live, key=lambda i: abs(rows[i][c]))
            for i in live:
                if i != i_min:
                    q = rows[i][c] // rows[i_min][c]
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[i_min])]
        live = [i for i in range(pivot_row, len(rows)) if rows[i][c] != 0]
        if not live:
            continue
        i = live[0]
        rows[pivot_row], rows[i] = rows[i], rows[pivot_row]
        if rows[pivot_row][c] < 0:
            rows[pivot_row] = [-a for a in rows[pivot_row]]
        p = rows[pivot_row][c]
        for k in range(pivot_row):
            q = rows[k][c] // p
            if q:
                rows[k] = [a - q * b for a, b in zip(rows[k], rows[pivot_row])]
        pivot_row += 1
    return rows


@dataclass(frozen=True)
class Lattice:
    """Sublattice of Z^d in canonical (row Hermite normal form) basis."""

    d: int
    basis: tuple[tuple[int, ...], ...]

    @classmethod
    def from_generators(cls, d: int, gens: Iterable[Sequence[int]]) -> "Lattice":
        gens = [[int(v) for v in g] for g in gens]
        if any(len(g) != d for g in gens):
            raise ValueError("generator length does not match d")
        rows = _echelon(gens, d)
        basis = tuple(tuple(r) for r in rows if any(r))
        return cls(d, basis)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence[int]) -> bool:
        v = [int(a) for a in v]
        for row in self.basis:
            c = next(i for i, a in enumerate(row) if a)
            if v[c] % row[c]:
                return False
            q = v[c] // row[c]
            v = [a - q * b for a, b in zip(v, row)]
        return not any(v)

    def gram_det(self) -> int:
        if not self.basis:
            return 1
        B = [list(r) for r in self.basis]
        k = len(B)
        gram = [[sum(a * b for a, b in zip(B[i], B[j])) for j in range(k)] for i in range(k)]
        return _int_det(gram)

    def to_dict(self) -> dict:
        return {"d": self.d, "basis": [list(r) for r in self.basis]}


def _int_det(m: list[list[int]]) -> int:
    """Exact determinant via fraction-free Bareiss elimination."""
    a = [list(r) for r in m]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def lattice_intersect(L1: Lattice, L2: Lattice) -> Lattice:
    """L1 cap L2 from the integer left kernel of the stacked matrix [B1; -B2]."""
    if L1.d != L2.d:
        raise ValueError("lattices live in different Z^d")
    d = L1.d
    k1, k2 = L1.rank, L2.rank
    if k1 == 0 or k2 == 0:
        return Lattice(d, ())
    n = k1 + k2
    rows = []
    for i, b in enumerate(L1.basis):
        rows.append(list(b) + [1 if j == i else 0 for j in range(n)])
    for i, b in enumerate(L2.basis):
        rows.append([-a for a in b] + [1 if j == k1 + i else 0 for j in range(n)])
    ech = _echelon(rows, d)
    kernel = [r[d:] for r in ech if not any(r[:d])]
    gens = []
    for coeff in kernel:
        a = coeff[:k1]
        gens.append([sum(ai * b[t] for ai, b in zip(a, L1.basis)) for t in range(d)])
    return Lattice.from_generators(d, gens)


def lattice_index(L: Lattice, sub: Lattice) -> int | None:
    """[L : sub] for sub inside L, or None when the index is infinite."""
    if sub.rank != L.rank:
        return None
    if L.rank == 0:
        return 1
    ratio = Fraction(sub.gram_det(), L.gram_det())
    if ratio.denominator != 1:
        raise ValueError("sub is not a sublattice of L")
    root = math.isqrt(ratio.numerator)
    if root * root != ratio.numerator:
        raise ValueError("sub is not a sublattice of L")
    return root


def commensurable(L1: Lattice, L2: Lattice) -> bool:
    inter = lattice_intersect(L1, L2)
    return inter.rank == L1.rank == L2.rank


@dataclass
class CommensurabilityClasses:
    classes: list
    omegas: list

    def to_dict(self) -> dict:
        return {"classes": self.classes, "omegas": [o.to_dict() for o in self.omegas]}


def commensurability_classes(lattices: Sequence[Lattice]) -> CommensurabilityClasses:
    """Partition by mutual finite index, with Omega_j = intersection of each class."""
    n = len(lattices)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(n), 2):
        if commensurable(lattices[i], lattices[j]):
            parent[find(j)] = find(i)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    classes = sorted(groups.values())
    omegas = []
    for cls in classes:
        om = lattices[cls[0]]
        for k in cls[1:]:
            om = lattice_intersect(om, lattices[k])
        omegas.append(om)
    return CommensurabilityClasses(classes, omegas)


# -------------------------------------------------- finite-model coset counting
def lattice_image(G: FiniteAbelianGroup, L: Lattice, n_finite: int = 0) -> Subgroup:
    """Image of L in the (Z/N)^d factor of G (finite coordinates set to 0)."""
    gens = [tuple([0] * n_finite) + tuple(b) for b in L.basis]
    return subgroup_closure(G, gens) if gens else subgroup_closure(G, [])


def coset_intersection_count(x1: int, H1: Subgroup, x2: int, H2: Subgroup) -> int:
    """|(x1 + H1) cap (x2 + H2)| by direct count."""
    G = H1.group
    a = np.zeros(G.size, dtype=bool)
    a[np.asarray(G.add(int(x1), H1.elements))] = True
    b = np.zeros(G.size, dtype=bool)
    b[np.asarray(G.add(int(x2), H2.elements))] = True
    return int(np.count_nonzero(a & b))
