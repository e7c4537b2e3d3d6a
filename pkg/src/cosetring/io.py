"""JSON encodings for functions, subgroups, systems, decompositions and reports."""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .bourgain import BourgainSystem, bohr_system, dilate, join, subgroup_system, with_dimension
from .decompose import CosetDecomposition, CosetPiece
from .groups import FiniteAbelianGroup, GroupFunction, Subgroup, subgroup_closure


def _jsonable(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, fixed separators)."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2)


# ------------------------------------------------------------------ functions
def function_to_dict(f: GroupFunction) -> dict:
    vals = np.asarray(f.values)
    pairs = [[float(np.real(v)), float(np.imag(v))] for v in vals]
    return {"orders": list(f.group.orders), "values": pairs, "domain": f.domain}


def function_from_dict(data: dict) -> GroupFunction:
    G = FiniteAbelianGroup(tuple(int(n) for n in data["orders"]))
    raw = data["values"]
    if len(raw) != G.size:
        raise ValueError(f"expected {G.size} values, got {len(raw)}")
    if raw and isinstance(raw[0], (list, tuple)):
        vals = np.array([complex(v[0], v[1]) for v in raw])
        if np.all(vals.imag == 0):
            vals = vals.real
    else:
        vals = np.asarray(raw, dtype=float)
    return GroupFunction(G, vals, data.get("domain", "primal"))


# ------------------------------------------------------------------ subgroups
def subgroup_to_dict(H: Subgroup) -> dict:
    G = H.group
    return {"orders": list(G.orders), "generators": [list(G.coords(g)) for g in H.generators]}


def subgroup_from_dict(data: dict) -> Subgroup:
    G = FiniteAbelianGroup(tuple(int(n) for n in data["orders"]))
    return subgroup_closure(G, [tuple(g) for g in data.get("generators", [])])


# ------------------------------------------------------------------- systems
def system_to_dict(S: BourgainSystem) -> dict:
    return S.describe()


def _system_from_params(G: FiniteAbelianGroup, data: dict) -> BourgainSystem:
    kind = data["kind"]
    p = data.get("params", {})
    if kind == "bohr":
        S = bohr_system(G, [tuple(c) for c in p["characters"]], p["kappas"])
    elif kind == "subgroup":
        S = subgroup_system(subgroup_closure(G, [tuple(g) for g in p.get("generators", [])]))
    elif kind == "dilate":
        S = dilate(_system_from_params(G, p["base"]), float(p["lambda"]))
    elif kind == "join":
        S = join(_system_from_params(G, p["left"]), _system_from_params(G, p["right"]))
    else:
        raise ValueError(f"cannot rebuild a system of kind {kind!r} from JSON")
    want = float(data.get("dim", S.dim))
    if want > S.dim:
        S = with_dimension(S, want)
    return S


def system_from_dict(data: dict) -> BourgainSystem:
    G = FiniteAbelianGroup(tuple(int(n) for n in data["orders"]))
    return _system_from_params(G, data)


# ------------------------------------------------------------ decompositions
def decomposition_to_dict(D: CosetDecomposition) -> dict:
    return D.to_dict()


def decomposition_from_dict(data: dict) -> CosetDecomposition:
    G = FiniteAbelianGroup(tuple(int(n) for n in data["orders"]))
    cache: dict[tuple, Subgroup] = {}
    pieces = []
    for p in data["pieces"]:
        sub = p["subgroup"]
        key = tuple(tuple(g) for g in sub.get("generators", []))
        if key not in cache:
            cache[key] = subgroup_closure(G, list(key))
        pieces.append(CosetPiece(int(p["sign"]), G.index(tuple(p["rep"])), cache[key]))
    return CosetDecomposition(G, pieces, data.get("certificate", {}))
