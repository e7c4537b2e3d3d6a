"""Weak Freiman structure: the Bogolyubov-Chang system, arithmetic connectedness,
the additive-quadruple count it forces, and concentration of f on a Bourgain system."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .bourgain import (
    BourgainSystem,
    beta_measure,
    bohr_system,
    dilate,
    join,
    psi_apply,
    regularize,
)
from .errors import BudgetExceeded, NotConnected, ZeroSupport
from .groups import FiniteAbelianGroup, GroupFunction, as_index
from .spectral import (
    additive_energy,
    additive_energy_fourier,
    chang_cover,
    distance_to_integers,
    is_dissociated,
    span_mask,
)

DEFAULT_BUDGET = 200_000
DEFAULT_M_CAP = 6


def _index_set(group: FiniteAbelianGroup, A: Iterable) -> list[int]:
    return sorted({as_index(group, a) for a in A})


# ---------------------------------------------------------- Bogolyubov-Chang
@dataclass
class FreimanOutput:
    system: BourgainSystem
    sup_psi: float
    containment_ok: bool
    K: float
    alpha: float
    gamma: tuple[int, ...]
    chang_set: tuple[int, ...]
    chang_bound: float
    lam: float = 1.0
    flags: list = field(default_factory=list)

    @property
    def gamma_bound(self) -> float:
        return 16.0 * self.K / self.alpha

    @property
    def psi_ok(self) -> bool:
        return self.sup_psi >= 1.0 / (2.0 * self.K) - 1e-9

    @property
    def gamma_ok(self) -> bool:
        return len(self.gamma) <= self.gamma_bound * (1 + 1e-12)

    @property
    def passed(self) -> bool:
        return self.containment_ok and self.psi_ok and self.gamma_ok

    def to_dict(self) -> dict:
        return {
            "system": self.system.describe(),
            "sup_psi": self.sup_psi,
            "psi_bound": 1.0 / (2.0 * self.K),
            "containment_ok": self.containment_ok,
            "K": self.K,
            "alpha": self.alpha,
            "gamma_size": len(self.gamma),
            "gamma_bound": self.gamma_bound,
            "chang_set": list(self.chang_set),
            "chang_bound": self.chang_bound,
            "lambda": self.lam,
            "flags": list(self.flags),
            "passed": self.passed,
        }


def bogolyubov_chang(group: FiniteAbelianGroup, A: Iterable) -> FreimanOutput:
    """Regular Bohr system on a Chang cover of the large spectrum of 1_A.

    Gamma = {|1_A^| >= alpha / 4 sqrt(K)}, Lambda a dissociated set whose span
    holds Gamma, and S = lambda Bohr_{1/20k}(Lambda).  X_4 inside 2A - 2A is
    checked element by element.
    """
    idx = _index_set(group, A)
    if not idx:
        raise ValueError("A must be nonempty")
    mask = group.mask(idx)
    n = len(idx)
    alpha = n / group.size
    K = float(group.sumset_mask(mask, mask).sum()) / n
    ahat = np.abs(group.dft(mask.astype(float)))
    thr = alpha / (4.0 * math.sqrt(K))
    gamma = tuple(int(g) for g in np.flatnonzero(ahat >= thr * (1 - 1e-12)))
    cover = chang_cover(group, gamma, alpha, K, cap=None)
    flags = ["dense-path"]
    lam_set = list(cover.members)
    if not lam_set:
        # Gamma is the trivial character alone; its Bohr system is all of G
        lam_set = [0]
        flags.append("trivial-spectrum")
    k = len(lam_set)
    S, rep = regularize(bohr_system(group, lam_set, [1.0 / (20.0 * k)] * k))
    X4 = S.level_mask(4.0)
    two_minus_two = group.sumset_mask(group.sumset_mask(mask, mask), group.reflect(group.sumset_mask(mask, mask)))
    containment = bool(np.all(two_minus_two[X4]))
    sup_psi = float(np.abs(psi_apply(S, GroupFunction(group, mask.astype(float))).values).max())
    if cover.exceeds_bound:
        flags.append("chang-bound-exceeded")
    return FreimanOutput(S, sup_psi, containment, K, alpha, gamma, tuple(cover.members), cover.size_bound, rep.lam, flags)


# ------------------------------------------------------ arithmetic connectedness
@dataclass
class ConnectednessVerdict:
    m: int
    connected: bool
    subsets_checked: int
    witness: dict | None
    witnesses: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "connected": self.connected,
            "subsets_checked": self.subsets_checked,
            "witness": self.witness,
        }


def connectedness_cost(n: int, m: int) -> int:
    return math.comb(n, m) * 3**m


def is_arithmetically_connected(
    group: FiniteAbelianGroup, A: Iterable, m: int, budget: int = DEFAULT_BUDGET
) -> ConnectednessVerdict:
    """Exhaustive test over all m-subsets A' of A (lexicographic order).

    Each subset is either non-dissociated (witness: the vanishing relation) or
    dissociated with an extra point of A in its span (witness: that point).
    The first subset with neither property refutes connectedness.
    """
    idx = _index_set(group, A)
    if 0 in idx:
        raise ValueError("arithmetic connectedness requires 0 not in A")
    if m < 1:
        raise ValueError("m must be at least 1")
    if len(idx) < m:
        return ConnectednessVerdict(m, True, 0, {"vacuous": True})
    cost = connectedness_cost(len(idx), m)
    if cost > budget:
        raise BudgetExceeded(f"C({len(idx)}, {m}) * 3^{m} = {cost} exceeds budget {budget}")
    Aset = set(idx)
    witnesses = []
    count = 0
    for sub in itertools.combinations(idx, m):
        count += 1
        verdict = is_dissociated(group, sub, cap=None)
        if not verdict:
            witnesses.append({"subset": list(sub), "relation": list(verdict.witness)})
            continue
        spanned = np.flatnonzero(span_mask(group, sub, cap=None))
        extra = [int(x) for x in spanned if int(x) in Aset and int(x) not in sub]
        if extra:
            witnesses.append({"subset": list(sub), "extra": extra[0]})
            continue
        return ConnectednessVerdict(m, False, count, {"refuting_subset": list(sub)}, witnesses)
    return ConnectednessVerdict(m, True, count, witnesses[0] if witnesses else None, witnesses)


def replay_witness(group: FiniteAbelianGroup, A: Iterable, witness: dict) -> bool:
    """Re-derive a single connectedness witness from scratch."""
    Aset = set(_index_set(group, A))
    if witness.get("vacuous"):
        return True
    if "refuting_subset" in witness:
        sub = witness["refuting_subset"]
        if not is_dissociated(group, sub, cap=None):
            return False
        spanned = span_mask(group, sub, cap=None)
        return not any(spanned[x] for x in Aset - set(sub))
    sub = witness["subset"]
    if not set(sub) <= Aset:
        return False
    if "relation" in witness:
        eps = witness["relation"]
        total = 0
        for e, a in zip(eps, sub):
            if e == 1:
                total = group.add(total, a)
            elif e == -1:
                total = group.sub(total, a)
        return any(eps) and total == 0
    x = witness["extra"]
    return x in Aset and x not in sub and bool(span_mask(group, sub, cap=None)[x])


# ----------------------------------------------------- quadruple lower bound
def quadruple_constant(m: int) -> float:
    """c_m = 1 / (4 * 9^(m+1)).

    Pigeonhole leaves at least |A|^(s-1) / (2 * 3^(m+1)) solutions of a reduced
    equation with s >= 3 nonzero coefficients; Cauchy-Schwarz against
    ||1_A^||_{2s-4}^{2s-4} <= alpha^(2s-5) then gives ||1_A^||_4^4 >= c^2 alpha^3.
    Sets with |A| < m^2 satisfy the bound trivially since E(A) >= |A|^2.
    """
    return 1.0 / (4.0 * 9.0 ** (m + 1))


def quadruple_lower_bound_check(
    group: FiniteAbelianGroup, A: Iterable, m: int, budget: int = DEFAULT_BUDGET
) -> dict:
    idx = _index_set(group, A)
    if 0 in idx:
        return {"refused": True, "reason": "0 in A", "holds": None}
    verdict = is_arithmetically_connected(group, idx, m, budget)
    if not verdict.connected:
        return {"refused": True, "reason": "not connected", "witness": verdict.witness, "holds": None}
    n = len(idx)
    energy = additive_energy(group, idx)
    fourier = additive_energy_fourier(group, idx)
    c = quadruple_constant(m)
    bound = c * n**3
    Aset = set(idx)
    symmetric = sorted({min(a, group.neg(a)) for a in idx if group.neg(a) in Aset and group.neg(a) != a})
    return {
        "refused": False,
        "m": m,
        "size": n,
        "energy": energy,
        "energy_fourier": fourier,
        "fourier_gap": abs(fourier - energy),
        "c_m": c,
        "bound": bound,
        "ratio": energy / bound,
        "symmetric_pairs": len(symmetric),
        "holds": energy >= bound,
    }


# ------------------------------------------------------------- concentration
@dataclass
class ConcentrationReport:
    translation: int
    support_size: int
    m: int
    m_requested: int
    connected: bool | None
    verdict: dict | None
    freiman: dict | None
    delta: float
    x0: int
    gamma: int
    gamma_value: float
    sup_psi: float
    psi_bound: float
    gate: float
    flags: list

    @property
    def gate_passed(self) -> bool:
        return self.sup_psi >= self.gate - 1e-12

    @property
    def bound_passed(self) -> bool:
        return self.sup_psi >= self.psi_bound - 1e-12

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["gate_passed"] = self.gate_passed
        d["bound_passed"] = self.bound_passed
        return d


def choose_translation(group: FiniteAbelianGroup, mask: np.ndarray) -> int:
    """Smallest t with 0 not in A + t that minimises min(A + t)."""
    idx = np.flatnonzero(mask)
    best = None
    for t in range(group.size):
        moved = np.asarray(group.add(idx, t))
        if np.any(moved == 0):
            continue
        key = int(moved.min())
        if best is None or key < best[0]:
            best = (key, t)
            if key == 1:
                break
    return best[1]


def concentration_system(
    f: GroupFunction,
    M: float,
    m_cap: int = DEFAULT_M_CAP,
    budget: int = DEFAULT_BUDGET,
    require_connected: bool = False,
) -> tuple[BourgainSystem, ConcentrationReport]:
    """Regular Bourgain system S' with ||psi_S' f||_inf large.

    Works with g = f^2 and A = supp(g_Z); structure on A comes from the dense
    Bogolyubov-Chang path, then a single correction step transfers the
    concentration of g to f.
    """
    G = f.group
    vals = np.real(np.asarray(f.values))
    if M < 0.5:
        raise ValueError("M must be at least 1/2")
    d_f = distance_to_integers(vals)
    if d_f >= 1.0 / (8.0 * M):
        raise ValueError(f"d(f, Z) = {d_f} must be below 1/(8M)")
    g = vals**2
    gZ = np.rint(g)
    mask = gZ != 0
    if not mask.any():
        raise ZeroSupport("f_Z vanishes identically")
    flags: list[str] = []
    m_req = max(1, math.ceil(50.0 * M**4))
    if mask.all():
        # no translate avoids 0; the dense path on A = G gives the whole-group
        # system and the correction step below supplies the structure
        flags.append("full-support")
        out = bogolyubov_chang(G, np.flatnonzero(mask))
        flags.extend(out.flags)
        S, frei = out.system, out.to_dict()
        t, m, verdict, connected = 0, 0, None, None
    else:
        t = choose_translation(G, mask)
        A = np.asarray(G.add(np.flatnonzero(mask), t))
        m = min(m_req, m_cap)
        while m > 1 and connectedness_cost(len(A), m) > budget:
            m -= 1
        if m < min(m_req, m_cap):
            flags.append("m-reduced-for-budget")
        v = is_arithmetically_connected(G, A, m, budget)
        connected = v.connected
        verdict = v.to_dict()
        if not connected:
            if require_connected:
                raise NotConnected(f"supp(g_Z) is not {m}-arithmetically connected", v)
            flags.append("not-connected")
        out = bogolyubov_chang(G, A)
        flags.extend(out.flags)
        frei = out.to_dict()
        S = out.system

    # transfer from g = f^2 to f
    gfun = GroupFunction(G, g)
    pg = np.abs(psi_apply(S, gfun).values)
    x0 = int(np.argmax(pg))
    delta = float(pg[x0])
    beta1 = beta_measure(S, 1.0).beta.values
    h = vals * beta1[np.asarray(G.sub(G.elements(), x0))]
    # E_y h(y) gamma(y) = h^(-gamma)
    score = np.abs(G.dft(h))[G.neg_table]
    gam = int(np.argmax(score))
    d = max(S.dim, 1.0)
    core = join(dilate(S, delta / (80.0 * d * M * M)), bohr_system(G, [gam], [delta / (8.0 * M * M)]))
    S2, _ = regularize(core)
    sup = float(np.abs(psi_apply(S2, f).values).max())
    report = ConcentrationReport(
        translation=int(t),
        support_size=int(mask.sum()),
        m=int(m),
        m_requested=int(m_req),
        connected=connected,
        verdict=verdict,
        freiman=frei,
        delta=delta,
        x0=x0,
        gamma=gam,
        gamma_value=float(score[gam]),
        sup_psi=sup,
        psi_bound=delta / (4.0 * M),
        gate=1.0 / (4.0 * M * M),
        flags=flags,
    )
    return S2, report
