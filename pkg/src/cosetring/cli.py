"""Command-line entry point: every subcommand reads JSON and prints JSON.

Exit codes: 0 on success or a passing report, 1 on a failing report or a
library error (reported as JSON), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import corpus, io
from .bourgain import bohr_size_bound, bohr_system, check_axioms, regularize
from .config import RunConfig
from .decompose import decompose, verify_decomposition
from .errors import CosetRingError
from .freiman import bogolyubov_chang, concentration_system, is_arithmetically_connected
from .groups import FiniteAbelianGroup, GroupFunction, dft
from .lca import FrequencySpec, Lattice, build_finite_model, commensurability_classes, norm_quadrature
from .refine import refine_system
from .spectral import additive_energy, additive_energy_fourier, algebra_norm, is_dissociated, riesz_product, spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Malformed input documents or missing arguments."""


def _read_json(source: str, stdin=None) -> dict:
    try:
        text = (stdin or sys.stdin).read() if source == "-" else Path(source).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {source!r}: {exc}") from exc


def _function(data: dict) -> GroupFunction:
    try:
        return io.function_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"not a GroupFunction document: {exc}") from exc


def _group_set(data: dict) -> tuple[FiniteAbelianGroup, list[int]]:
    """A set given either as {"orders", "set"} or as the support of a function."""
    try:
        G = FiniteAbelianGroup(tuple(int(n) for n in data["orders"]))
        if "set" in data:
            return G, sorted({G.index(tuple(a)) if isinstance(a, list) else int(a) % G.size for a in data["set"]})
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"not a set document: {exc}") from exc
    f = _function(data)
    return f.group, [int(i) for i in np.flatnonzero(np.abs(np.asarray(f.values)) > 1e-9)]


def _system(data: dict):
    try:
        return io.system_from_dict(data)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"not a system document: {exc}") from exc


def _norm_bound(f: GroupFunction) -> int:
    return max(1, math.ceil(algebra_norm(f) - 1e-9))


# ------------------------------------------------------------------ handlers
def cmd_dft(args, cfg):
    f = _function(args.doc)
    fh = dft(f)
    return EXIT_OK, {"orders": list(f.group.orders), "values": [[float(v.real), float(v.imag)] for v in np.asarray(fh.values, dtype=complex)], "domain": "dual"}


def cmd_anorm(args, cfg):
    f = _function(args.doc)
    return EXIT_OK, {"A_norm": algebra_norm(f), "sup_norm": f.sup_norm()}


def cmd_spec(args, cfg):
    f = _function(args.doc)
    S = spec(f, args.rho)
    return EXIT_OK, {"rho": S.rho, "base_norm": S.base_norm, "members": sorted(S.members)}


def cmd_energy(args, cfg):
    G, A = _group_set(args.doc)
    if not A:
        raise UsageError("the set is empty")
    E = additive_energy(G, A)
    Ef = additive_energy_fourier(G, A)
    return EXIT_OK, {"size": len(A), "energy": E, "energy_fourier": Ef, "relative_gap": abs(E - Ef) / E}


def cmd_riesz(args, cfg):
    G, A = _group_set(args.doc)
    verdict = is_dissociated(G, A)
    if not verdict:
        return EXIT_FAIL, {"dissociated": False, "witness": verdict.witness}
    R = riesz_product(G, A)
    ph = np.real(np.asarray(R.p_hat.values))
    p = np.real(np.asarray(R.p.values))
    return EXIT_OK, {
        "dissociated": True,
        "points": list(R.points),
        "p_hat_min": float(ph.min()),
        "p_hat_sum": float(ph.sum()),
        "p_at_points": [float(p[a]) for a in R.points],
        "support": [int(i) for i in np.flatnonzero(np.abs(p) > 1e-9)],
    }


def cmd_bohr(args, cfg):
    d = args.doc
    try:
        G = FiniteAbelianGroup(tuple(int(n) for n in d["orders"]))
        chars = [tuple(c) if isinstance(c, list) else int(c) for c in d["characters"]]
        S = bohr_system(G, chars, d["kappas"])
    except (KeyError, TypeError) as exc:
        raise UsageError(f"not a Bohr document: {exc}") from exc
    bound = bohr_size_bound(G, d["kappas"])
    return EXIT_OK, {"system": io.system_to_dict(S), "size": S.size, "density": S.density, "size_bound": bound, "size_ok": S.size >= bound}


def cmd_regularize(args, cfg):
    S, rep = regularize(_system(args.doc), cfg.rho_grid)
    return EXIT_OK, {"system": io.system_to_dict(S), "regularity": rep.to_dict()}


def cmd_axioms(args, cfg):
    rep = check_axioms(_system(args.doc))
    out = rep.to_dict()
    ok = rep.passed and rep.covering_ok
    return (EXIT_OK if ok else EXIT_FAIL), out


def cmd_refine(args, cfg):
    f = _function(args.doc)
    if not args.system:
        raise UsageError("refine needs --system")
    S = _system(_read_json(args.system))
    M = args.M if args.M is not None else _norm_bound(f)
    eps = cfg.resolve_epsilon(int(math.ceil(M)))
    S2, cert = refine_system(f, S, eps, M)
    return (EXIT_OK if cert.passed else EXIT_FAIL), {"system": io.system_to_dict(S2), "certificate": cert.to_dict()}


def cmd_freiman(args, cfg):
    G, A = _group_set(args.doc)
    if not A:
        raise UsageError("the set is empty")
    out = bogolyubov_chang(G, A)
    doc = out.to_dict()
    if args.m:
        doc["connectedness"] = is_arithmetically_connected(G, A, args.m, cfg.budget).to_dict()
    return (EXIT_OK if out.passed else EXIT_FAIL), doc


def cmd_concentrate(args, cfg):
    f = _function(args.doc)
    M = args.M if args.M is not None else _norm_bound(f)
    S, rep = concentration_system(f, M, m_cap=cfg.m_cap, budget=cfg.budget)
    return (EXIT_OK if rep.bound_passed else EXIT_FAIL), {"system": io.system_to_dict(S), "report": rep.to_dict()}


def cmd_decompose(args, cfg):
    f = _function(args.doc)
    eps = None if cfg.epsilon == "auto" else float(cfg.epsilon)
    D = decompose(f, eps, m_cap=cfg.m_cap, budget=cfg.budget)
    return (EXIT_OK if D.certificate.get("exact") else EXIT_FAIL), io.decomposition_to_dict(D)


def cmd_verify(args, cfg):
    f = _function(args.doc)
    if not args.decomposition:
        raise UsageError("verify needs --decomposition")
    try:
        D = io.decomposition_from_dict(_read_json(args.decomposition))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"not a decomposition document: {exc}") from exc
    rep = verify_decomposition(f, D)
    return (EXIT_OK if rep["exact"] else EXIT_FAIL), rep


def cmd_lca_model(args, cfg):
    d = args.doc
    out: dict = {}
    if "terms" in d:
        try:
            fs = FrequencySpec.from_dict(d)
        except (KeyError, TypeError) as exc:
            raise UsageError(f"not a FrequencySpec document: {exc}") from exc
        rep = build_finite_model(fs, args.modulus)
        q, err = norm_quadrature(fs, args.resolution)
        rep.target_norm = q
        out["model"] = rep.to_dict()
        out["quadrature"] = {"value": q, "error_bound": err, "resolution": args.resolution}
        out["relative_gap"] = abs(rep.norm_estimate - q) / q if q else None
    if "lattices" in d:
        Ls = [Lattice.from_generators(int(L["d"]), L["generators"]) for L in d["lattices"]]
        out["commensurability"] = commensurability_classes(Ls).to_dict()
    if not out:
        raise UsageError("expected 'terms' and/or 'lattices'")
    return EXIT_OK, out


def cmd_corpus(args, cfg):
    rng = corpus.rng_from(cfg.seed)
    items: list = []
    for _ in range(args.count):
        if args.kind == "decompose":
            f, _ = corpus.decompose_instance(rng, structured=not args.unstructured)
            items.append(io.function_to_dict(f))
        elif args.kind == "perturbed":
            f, _ = corpus.perturbed_coset_sum(rng, corpus.pick_group(rng))
            items.append(io.function_to_dict(f))
        elif args.kind == "functions":
            items.append(io.function_to_dict(corpus.random_function(rng, corpus.pick_group(rng, corpus.FOURIER_GROUPS))))
        elif args.kind == "bohr":
            G, chars, kappas = corpus.random_bohr_params(rng)
            items.append({"orders": list(G.orders), "characters": [list(G.coords(c)) for c in chars], "kappas": kappas})
    return EXIT_OK, {"kind": args.kind, "seed": cfg.seed, "items": items}


COMMANDS: dict[str, Callable] = {
    "dft": cmd_dft,
    "anorm": cmd_anorm,
    "spec": cmd_spec,
    "energy": cmd_energy,
    "riesz": cmd_riesz,
    "bohr": cmd_bohr,
    "regularize": cmd_regularize,
    "axioms": cmd_axioms,
    "refine": cmd_refine,
    "freiman": cmd_freiman,
    "concentrate": cmd_concentrate,
    "decompose": cmd_decompose,
    "verify": cmd_verify,
    "lca-model": cmd_lca_model,
    "corpus": cmd_corpus,
}

NO_INPUT = {"corpus"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cosetring", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; explicit flags override it")
    common.add_argument("--epsilon", type=float)
    common.add_argument("--max-m", dest="m_cap", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--rho-grid", dest="rho_grid", type=float)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name not in NO_INPUT:
            p.add_argument("input", help="JSON document path, or - for standard input")
        if name == "spec":
            p.add_argument("--rho", type=float, required=True)
        if name in ("refine", "concentrate"):
            p.add_argument("--M", type=float)
        if name == "refine":
            p.add_argument("--system", help="Bourgain system JSON path")
        if name == "freiman":
            p.add_argument("--m", type=int, help="also test m-arithmetic connectedness")
        if name == "verify":
            p.add_argument("--decomposition", help="decomposition JSON path")
        if name == "lca-model":
            p.add_argument("--modulus", type=int)
            p.add_argument("--resolution", type=int, default=1 << 14)
        if name == "corpus":
            p.add_argument("--kind", choices=["decompose", "perturbed", "functions", "bohr"], default="decompose")
            p.add_argument("--count", type=int, default=10)
            p.add_argument("--unstructured", action="store_true")
    return parser


def run(command: str, args: argparse.Namespace, config: RunConfig, stdout=None, stdin=None) -> int:
    """Dispatch one subcommand and write its JSON result; returns the exit code."""
    stdout = stdout or sys.stdout
    try:
        if command not in NO_INPUT:
            args.doc = _read_json(args.input, stdin)
        code, doc = COMMANDS[command](args, config)
    except UsageError as exc:
        print(f"cosetring {command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CosetRingError, ValueError) as exc:
        code, doc = EXIT_FAIL, {"error": type(exc).__name__, "message": str(exc)}
    stdout.write(io.dumps(doc) + "\n")
    return code


def main(argv: list[str] | None = None, stdout=None, stdin=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: getattr(args, k, None) for k in ("epsilon", "m_cap", "budget", "seed", "rho_grid")}
    try:
        config = RunConfig.from_sources(args.config, overrides)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"cosetring: bad configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(args.command, args, config, stdout, stdin)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
