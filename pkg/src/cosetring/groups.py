"""Finite abelian groups written as products of cyclic groups.

Elements and characters are both addressed by a single integer index using a
mixed-radix encoding (last coordinate varies fastest), so a function on the
group is just a flat numpy array of length ``|G|``.  Characters use the
self-dual convention ``gamma_c(x) = exp(2 pi i sum_i c_i x_i / n_i)``.

Fourier conventions: the primal side carries the normalised counting measure
``E_x`` and the dual side the counting measure ``sum_gamma``, so

    f^(gamma) = E_x f(x) conj(gamma(x)),     f(x) = sum_gamma f^(gamma) gamma(x),

and convolution ``(f * g)(t) = E_x f(x) g(t - x)`` satisfies
``(f * g)^ = f^ g^``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainTagError, GroupMismatch

PRIMAL = "primal"
DUAL = "dual"


@dataclass(frozen=True, eq=False)
class FiniteAbelianGroup:
    """The group Z/n_1 x ... x Z/n_k."""

    orders: tuple[int, ...]

    def __post_init__(self) -> None:
        orders = tuple(int(n) for n in self.orders)
        if not orders:
            orders = (1,)
        if any(n < 1 for n in orders):
            raise ValueError(f"cyclic orders must be >= 1, got {orders}")
        object.__setattr__(self, "orders", orders)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FiniteAbelianGroup) and self.orders == other.orders

    def __hash__(self) -> int:
        return hash(self.orders)

    def __repr__(self) -> str:
        return "FiniteAbelianGroup(" + " x ".join(f"Z/{n}" for n in self.orders) + ")"

    @property
    def size(self) -> int:
        return math.prod(self.orders)

    @property
    def rank(self) -> int:
        return len(self.orders)

    @cached_property
    def exponent(self) -> int:
        """Least common multiple of the cyclic orders."""
        return math.lcm(*self.orders)

    @cached_property
    def strides(self) -> np.ndarray:
        s = np.ones(self.rank, dtype=np.int64)
        for i in range(self.rank - 2, -1, -1):
            s[i] = s[i + 1] * self.orders[i + 1]
        return s

    @cached_property
    def coords_table(self) -> np.ndarray:
        """Array of shape (|G|, k) holding the coordinates of every index."""
        idx = np.arange(self.size, dtype=np.int64)
        return (idx[:, None] // self.strides[None, :]) % np.asarray(self.orders, dtype=np.int64)

    @cached_property
    def _weights(self) -> np.ndarray:
        # exponent / n_i, used for exact integer character phases
        return np.asarray([self.exponent // n for n in self.orders], dtype=np.int64)

    # ------------------------------------------------------------------ indexing
    def index(self, coords: Sequence[int] | int) -> int:
        """Mixed-radix index of an element given by coordinates (or an index)."""
        if isinstance(coords, (int, np.integer)):
            i = int(coords)
            if not 0 <= i < self.size:
                raise ValueError(f"index {i} out of range for {self}")
            return i
        c = [int(v) for v in coords]
        if len(c) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates, got {len(c)}")
        return int(sum((v % n) * int(s) for v, n, s in zip(c, self.orders, self.strides)))

    def coords(self, index: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.coords_table[int(index)])

    def indices_from_coords(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.int64) % np.asarray(self.orders, dtype=np.int64)
        return coords @ self.strides

    def elements(self) -> np.ndarray:
        return np.arange(self.size, dtype=np.int64)

    # ---------------------------------------------------------------- arithmetic
    def add(self, a, b) -> np.ndarray | int:
        """Sum of elements given by index (scalars or broadcastable arrays)."""
        ca = self.coords_table[np.asarray(a, dtype=np.int64)]
        cb = self.coords_table[np.asarray(b, dtype=np.int64)]
        out = self.indices_from_coords(ca + cb)
        return int(out) if np.ndim(out) == 0 else out

    def neg(self, a) -> np.ndarray | int:
        out = self.indices_from_coords(-self.coords_table[np.asarray(a, dtype=np.int64)])
        return int(out) if np.ndim(out) == 0 else out

    def sub(self, a, b) -> np.ndarray | int:
        ca = self.coords_table[np.asarray(a, dtype=np.int64)]
        cb = self.coords_table[np.asarray(b, dtype=np.int64)]
        out = self.indices_from_coords(ca - cb)
        return int(out) if np.ndim(out) == 0 else out

    def scale(self, a, k: int) -> np.ndarray | int:
        out = self.indices_from_coords(int(k) * self.coords_table[np.asarray(a, dtype=np.int64)])
        return int(out) if np.ndim(out) == 0 else out

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.asarray(self.neg(self.elements()))

    def translate(self, values: np.ndarray, t: int) -> np.ndarray:
        """Return ``x -> values[x - t]``, the translate of a function by ``t``."""
        return np.asarray(values)[np.asarray(self.sub(self.elements(), int(t)))]

    def reflect(self, values: np.ndarray) -> np.ndarray:
        """Return ``x -> values[-x]``."""
        return np.asarray(values)[self.neg_table]

    # ---------------------------------------------------------------- characters
    def phase_numerators(self, chars, xs=None) -> np.ndarray:
        """Exact integer phases: gamma_c(x) = exp(2 pi i num / exponent).

        ``chars`` and ``xs`` are index arrays; the result has shape
        ``chars.shape + xs.shape``.
        """
        chars = np.asarray(chars, dtype=np.int64)
        xs = self.elements() if xs is None else np.asarray(xs, dtype=np.int64)
        cc = self.coords_table[chars] * self._weights
        cx = self.coords_table[xs]
        num = np.tensordot(cc, cx, axes=([-1], [-1]))
        return num % self.exponent

    def character_values(self, char, xs=None) -> np.ndarray:
        num = self.phase_numerators(char, xs)
        return np.exp(2j * np.pi * num / self.exponent)

    def chord(self, chars, xs=None) -> np.ndarray:
        """|1 - gamma(x)| computed from exact phases as 2|sin(pi num / L)|."""
        num = self.phase_numerators(chars, xs)
        return 2.0 * np.abs(np.sin(np.pi * num / self.exponent))

    # ------------------------------------------------------------------- fourier
    def dft(self, values: np.ndarray) -> np.ndarray:
        """f^(gamma) = E_x f(x) conj(gamma(x)) via row-column FFT."""
        arr = np.asarray(values).reshape(self.orders)
        return (np.fft.fftn(arr) / self.size).reshape(-1)

    def idft(self, coeffs: np.ndarray) -> np.ndarray:
        """f(x) = sum_gamma f^(gamma) gamma(x)."""
        arr = np.asarray(coeffs).reshape(self.orders)
        return (np.fft.ifftn(arr) * self.size).reshape(-1)

    def counting_convolve(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """sum_y a(y) b(x - y) (unnormalised cyclic convolution)."""
        fa = np.fft.fftn(np.asarray(a).reshape(self.orders))
        fb = np.fft.fftn(np.asarray(b).reshape(self.orders))
        return np.fft.ifftn(fa * fb).reshape(-1)

    def sumset_mask(self, mask_a: np.ndarray, mask_b: np.ndarray) -> np.ndarray:
        """Indicator of A + B from indicators of A and B (exact integer counts)."""
        counts = np.rint(self.counting_convolve(mask_a.astype(float), mask_b.astype(float)).real)
        return counts > 0.5

    def representation_counts(self, mask_a: np.ndarray, mask_b: np.ndarray) -> np.ndarray:
        """r(t) = #{(a, b) in A x B : a + b = t} as an integer array."""
        counts = self.counting_convolve(mask_a.astype(float), mask_b.astype(float)).real
        return np.rint(counts).astype(np.int64)

    def mask(self, indices: Iterable[int]) -> np.ndarray:
        m = np.zeros(self.size, dtype=bool)
        idx = np.fromiter((int(i) for i in indices), dtype=np.int64)
        m[idx] = True
        return m


def as_index(group: "FiniteAbelianGroup", x) -> int:
    """Index of an element given as an index, coordinates, or element/character object."""
    if isinstance(x, (GroupElement, Character)):
        return x.index
    return group.index(x)


def cyclic(*orders: int) -> FiniteAbelianGroup:
    """Shorthand constructor: ``cyclic(2, 8)`` is Z/2 x Z/8."""
    return FiniteAbelianGroup(tuple(orders))


@dataclass(frozen=True)
class GroupElement:
    group: FiniteAbelianGroup
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        c = tuple(int(v) % n for v, n in zip(self.coords, self.group.orders))
        if len(c) != self.group.rank:
            raise ValueError("coordinate length does not match group rank")
        object.__setattr__(self, "coords", c)

    @property
    def index(self) -> int:
        return self.group.index(self.coords)


@dataclass(frozen=True)
class Character:
    group: FiniteAbelianGroup
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        c = tuple(int(v) % n for v, n in zip(self.coords, self.group.orders))
        if len(c) != self.group.rank:
            raise ValueError("coordinate length does not match group rank")
        object.__setattr__(self, "coords", c)

    @property
    def index(self) -> int:
        return self.group.index(self.coords)

    def __call__(self, x) -> complex | np.ndarray:
        xs = np.asarray(x, dtype=np.int64)
        vals = self.group.character_values(self.index, xs)
        return complex(vals) if np.ndim(vals) == 0 else vals


@dataclass(frozen=True, eq=False)
class GroupFunction:
    """A dense function on a group, tagged as living on the primal or dual side."""

    group: FiniteAbelianGroup
    values: np.ndarray
    domain: str = PRIMAL

    def __post_init__(self) -> None:
        vals = np.asarray(self.values)
        if vals.ndim != 1:
            vals = vals.reshape(-1)
        if vals.shape[0] != self.group.size:
            raise ValueError(f"expected {self.group.size} values, got {vals.shape[0]}")
        if self.domain not in (PRIMAL, DUAL):
            raise ValueError(f"unknown domain tag {self.domain!r}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def indicator(cls, group: FiniteAbelianGroup, indices: Iterable[int]) -> "GroupFunction":
        return cls(group, group.mask(indices).astype(float))

    @classmethod
    def zeros(cls, group: FiniteAbelianGroup, domain: str = PRIMAL) -> "GroupFunction":
        return cls(group, np.zeros(group.size), domain)

    @property
    def is_real(self) -> bool:
        v = self.values
        return not np.iscomplexobj(v) or bool(np.all(np.abs(v.imag) <= 1e-9 * max(1.0, np.abs(v).max(initial=0.0))))

    def real(self) -> "GroupFunction":
        return GroupFunction(self.group, np.real(self.values).astype(float), self.domain)

    def __add__(self, other: "GroupFunction") -> "GroupFunction":
        _same(self, other)
        return GroupFunction(self.group, self.values + other.values, self.domain)

    def __sub__(self, other: "GroupFunction") -> "GroupFunction":
        _same(self, other)
        return GroupFunction(self.group, self.values - other.values, self.domain)

    def __neg__(self) -> "GroupFunction":
        return GroupFunction(self.group, -self.values, self.domain)

    def __mul__(self, other) -> "GroupFunction":
        if isinstance(other, GroupFunction):
            _same(self, other)
            return GroupFunction(self.group, self.values * other.values, self.domain)
        return GroupFunction(self.group, self.values * other, self.domain)

    __rmul__ = __mul__

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max(initial=0.0))

    def l1_norm(self) -> float:
        """E|f| on the primal side, sum|f| on the dual side."""
        a = np.abs(self.values)
        return float(a.mean() if self.domain == PRIMAL else a.sum())

    def l2_norm_sq(self) -> float:
        a = np.abs(self.values) ** 2
        return float(a.mean() if self.domain == PRIMAL else a.sum())

    def translate(self, t: int) -> "GroupFunction":
        return GroupFunction(self.group, self.group.translate(self.values, t), self.domain)


def _same(f: GroupFunction, g: GroupFunction) -> None:
    if f.group != g.group:
        raise GroupMismatch(f"{f.group} vs {g.group}")
    if f.domain != g.domain:
        raise DomainTagError(f"cannot combine {f.domain} and {g.domain} functions")


def _real_if_close(values: np.ndarray, real_hint: bool) -> np.ndarray:
    if real_hint:
        return np.real(values).astype(float)
    return values


def dft(f: GroupFunction) -> GroupFunction:
    """Fourier transform of a primal function; returns a dual-tagged function."""
    if f.domain != PRIMAL:
        raise DomainTagError("dft expects a primal function")
    return GroupFunction(f.group, f.group.dft(f.values), DUAL)


def inverse_dft(fh: GroupFunction) -> GroupFunction:
    """Inverse transform of a dual function; returns a primal function."""
    if fh.domain != DUAL:
        raise DomainTagError("inverse_dft expects a dual function")
    return GroupFunction(fh.group, fh.group.idft(fh.values), PRIMAL)


def convolve(f: GroupFunction, g: GroupFunction) -> GroupFunction:
    """(f * g)(t) = E_x f(x) g(t - x)."""
    if f.group != g.group:
        raise GroupMismatch(f"{f.group} vs {g.group}")
    if f.domain != PRIMAL or g.domain != PRIMAL:
        raise DomainTagError("convolve expects primal functions")
    G = f.group
    vals = G.idft(G.dft(f.values) * G.dft(g.values))
    real = not np.iscomplexobj(f.values) and not np.iscomplexobj(g.values)
    return GroupFunction(G, _real_if_close(vals, real), PRIMAL)


@dataclass(frozen=True, eq=False)
class Subgroup:
    """A subgroup stored as a sorted index array plus a generating list."""

    group: FiniteAbelianGroup
    elements: np.ndarray
    generators: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        el = np.unique(np.asarray(self.elements, dtype=np.int64))
        el.setflags(write=False)
        object.__setattr__(self, "elements", el)
        object.__setattr__(self, "generators", tuple(int(g) for g in self.generators))

    @property
    def size(self) -> int:
        return int(self.elements.shape[0])

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.group.size, dtype=bool)
        m[self.elements] = True
        return m

    def __contains__(self, x) -> bool:
        return bool(self.mask[int(x)])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Subgroup)
            and self.group == other.group
            and np.array_equal(self.elements, other.elements)
        )

    def __hash__(self) -> int:
        return hash((self.group, self.elements.tobytes()))

    def key(self) -> tuple[int, ...]:
        return tuple(int(e) for e in self.elements)

    def is_valid(self) -> bool:
        """Enumerative check: identity, closure under + and -, order divides |G|."""
        G = self.group
        if self.size == 0 or not self.mask[0]:
            return False
        if G.size % self.size:
            return False
        if not np.all(self.mask[G.neg(self.elements)]):
            return False
        sums = G.sumset_mask(self.mask, self.mask)
        return bool(np.array_equal(sums, self.mask))

    def coset_representatives(self) -> np.ndarray:
        """Smallest index of every coset, in increasing order."""
        labels = coset_labels(self)
        return np.unique(labels)


def _closure_mask(G: FiniteAbelianGroup, gens: Iterable[int], start: np.ndarray | None = None):
    mask = np.zeros(G.size, dtype=bool) if start is None else start.copy()
    mask[0] = True
    used: list[int] = []
    for g in gens:
        g = int(g)
        if mask[g]:
            continue
        used.append(g)
        # breadth-first layers: H, H + g, H + 2g, ... until we return to H
        layer = np.flatnonzero(mask)
        new = mask.copy()
        shifted = layer
        while True:
            shifted = np.asarray(G.add(shifted, g))
            if new[shifted[0]]:
                break
            new[shifted] = True
        mask = new
    return mask, used


def subgroup_closure(group: FiniteAbelianGroup, generators: Iterable) -> Subgroup:
    """Smallest subgroup containing the given elements (indices or coordinates)."""
    gens = [as_index(group, g) for g in generators]
    mask, used = _closure_mask(group, gens)
    return Subgroup(group, np.flatnonzero(mask), tuple(used))


def subgroup_from_mask(group: FiniteAbelianGroup, mask: np.ndarray) -> Subgroup:
    """Wrap an indicator known to be a subgroup, recovering a generating list."""
    mask = np.asarray(mask, dtype=bool)
    gens: list[int] = []
    cur = np.zeros(group.size, dtype=bool)
    cur[0] = True
    for x in np.flatnonzero(mask):
        if not cur[x]:
            cur, used = _closure_mask(group, [int(x)], cur)
            gens.extend(used)
    if not np.array_equal(cur, mask):
        raise ValueError("mask is not a subgroup")
    return Subgroup(group, np.flatnonzero(mask), tuple(gens))


def trivial_subgroup(group: FiniteAbelianGroup) -> Subgroup:
    return Subgroup(group, np.array([0]), ())


def whole_group(group: FiniteAbelianGroup) -> Subgroup:
    return subgroup_from_mask(group, np.ones(group.size, dtype=bool))


def annihilator(H: Subgroup) -> Subgroup:
    """H-perp: characters trivial on H, tested with exact integer phases."""
    G = H.group
    gens = list(H.generators) or [0]
    num = G.phase_numerators(G.elements(), np.asarray(gens, dtype=np.int64))
    mask = np.all(num == 0, axis=1)
    return subgroup_from_mask(G, mask)


def coset_labels(H: Subgroup) -> np.ndarray:
    """For every x, the smallest index in x + H."""
    G = H.group
    x = G.elements()
    # all translates x + h, take the minimum over h
    sums = np.asarray(G.add(x[:, None], H.elements[None, :]))
    return sums.min(axis=1)


def coset_indicator(x, H: Subgroup) -> GroupFunction:
    """0/1 indicator of the coset x + H."""
    G = H.group
    xi = as_index(G, x)
    support = np.asarray(G.add(xi, H.elements))
    return GroupFunction.indicator(G, support)
