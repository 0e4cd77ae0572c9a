"""Command-line front end: ``mupb <subcommand> ...``.

Exit codes: 0 success, 1 a checked property fails, 2 usage or file error.
Reports go to stdout (text or JSON via ``--format structured``), diagnostics
to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .constructions import (ConstructionError, canonical_qubit_triple, canonical_qutrit_quadruple,
                            triple_2x3, triple_2x5)
from .entanglement import MuPreconditionError, audit_mu_vector, find_mu_vectors
from .equivalence import equivalent, move_to_dict
from .io import MubFileError, load_mubset, save_mubset
from .linalg import DEFAULT_TOL, DimensionError, NormError, ProductBasis
from .mu import are_bases_mu, set_mu_report
from .search import SearchPreconditionError, conjecture1_probe, extend_set
from .structure import StructuralViolation, classify, conjecture2_grouping, extract_ortho_subset, mu_product_bound

FAMILIES = {
    "qubit-triple": lambda n: canonical_qubit_triple(n),
    "qutrit-quadruple": lambda n: canonical_qutrit_quadruple(n),
    "triple-2x5-direct": lambda n: triple_2x5(distinct=False),
    "triple-2x5-distinct": lambda n: triple_2x5(distinct=True),
    "triple-2x3-direct": lambda n: triple_2x3(indirect=False),
    "triple-2x3-indirect": lambda n: triple_2x3(indirect=True),
}


class UsageError(Exception):
    pass


def _signature(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad signature {text!r}; expected e.g. 2,3") from None
    if not dims or min(dims) < 2:
        raise argparse.ArgumentTypeError("every dimension must be >= 2")
    return dims


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="tolerance on squared overlaps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.add_argument("--normalize", action="store_true", help="rescale non-unit factors instead of rejecting")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="mupb", description="Mutually unbiased product bases toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", parents=[common], help="build a known MU set and save it")
    c.add_argument("--family", choices=sorted(FAMILIES), required=True)
    c.add_argument("--n", type=int, default=1, help="number of subsystems for power families")
    c.add_argument("--out", required=True)

    v = sub.add_parser("verify", parents=[common], help="check orthonormality and pairwise MU")
    v.add_argument("file")

    k = sub.add_parser("classify", parents=[common], help="direct/indirect structure of each basis")
    k.add_argument("file")

    e = sub.add_parser("extract-ortho", parents=[common], help="orthonormal factor subset through an anchor")
    e.add_argument("file")
    e.add_argument("--basis", type=int, default=0)
    e.add_argument("--subsystem", type=int, default=0)
    e.add_argument("--anchor", type=int, default=None, help="anchor vector (all anchors if omitted)")

    g = sub.add_parser("group", parents=[common], help="group factors of bipartite bases into local bases")
    g.add_argument("file")
    g.add_argument("--artifact-dir", default=None, help="where to write counterexamples")

    q = sub.add_parser("equiv", parents=[common], help="decide equivalence of two sets")
    q.add_argument("first")
    q.add_argument("second")
    q.add_argument("--budget", type=int, default=200_000)

    n = sub.add_parser("entangle", parents=[common], help="search vectors MU to a set and audit them")
    n.add_argument("file")

    s = sub.add_parser("search", parents=[common], help="extend a set or probe the conjectured bound")
    s.add_argument("file", nargs="?")
    s.add_argument("--target", choices=("extend-set", "conjecture1"), default="extend-set")
    s.add_argument("--signature", type=_signature, default=None, help="for conjecture1, e.g. 4,4")
    s.add_argument("--sweeps", type=int, default=20)
    s.add_argument("--time-limit", type=float, default=None, help="seconds")
    s.add_argument("--out", default=None, help="directory for found sets")

    b = sub.add_parser("bound", parents=[common], help="maximum number of MU product bases")
    b.add_argument("--signature", type=_signature, required=True)
    return ap


# --------------------------------------------------------------------------
# subcommands; each returns (exit code, report dict, text lines)


def _load(args, path):
    return load_mubset(path, normalize=args.normalize)


def cmd_construct(args):
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    S = FAMILIES[args.family](args.n)
    save_mubset(S, args.out, seed=args.seed)
    rep, where = set_mu_report(list(S), args.tol)
    data = {"family": args.family, "n": args.n, "out": args.out, "signature": list(S.signature.dims),
            "bases": len(S), "max_deviation": rep.max_deviation}
    return 0, data, [f"wrote {len(S)} bases of {S.signature} to {args.out}",
                     f"max deviation {rep.max_deviation:.3e}"]


def cmd_verify(args):
    S = _load(args, args.file)
    lines, ortho = [], []
    ok = True
    for name, B in zip(S.names, S):
        r = B.orthonormality(args.tol)
        ortho.append({"basis": name, "passed": r.passed, "max_deviation": r.max_deviation})
        lines.append(f"basis {name}: orthonormal={r.passed} (deviation {r.max_deviation:.3e})")
        ok &= r.passed
    worst, worst_pair, pairs = 0.0, None, []
    for a in range(len(S)):
        for b in range(a + 1, len(S)):
            r = are_bases_mu(S[a], S[b], args.tol)
            pairs.append({"bases": [S.names[a], S.names[b]], "passed": r.passed, "max_deviation": r.max_deviation})
            if worst_pair is None or r.max_deviation > worst:
                worst, worst_pair = r.max_deviation, (a, b, r.worst_pair)
            ok &= r.passed
    if worst_pair is not None:
        a, b, (i, j) = worst_pair
        lines.append(f"worst pair: {S.names[a]}[{i}] vs {S.names[b]}[{j}], deviation {worst:.3e}")
    lines.append("PASS" if ok else "FAIL")
    data = {"passed": ok, "orthonormality": ortho, "pairs": pairs, "max_deviation": worst,
            "worst_pair": None if worst_pair is None else
            {"bases": [S.names[worst_pair[0]], S.names[worst_pair[1]]], "vectors": list(worst_pair[2])}}
    return (0 if ok else 1), data, lines


def cmd_classify(args):
    S = _load(args, args.file)
    out, lines = [], []
    for name, B in zip(S.names, S):
        c = classify(B, args.tol)
        out.append({"basis": name, "kind": c.kind.value, "basis_counts": list(c.per_subsystem_basis_count),
                    "ray_counts": list(c.per_subsystem_ray_count)})
        lines.append(f"{name}: {c.kind.value} (local bases {c.per_subsystem_basis_count}, "
                     f"distinct rays {c.per_subsystem_ray_count})")
    return 0, {"bases": out}, lines


def cmd_extract(args):
    S = _load(args, args.file)
    if not 0 <= args.basis < len(S):
        raise UsageError(f"--basis must be in 0..{len(S) - 1}")
    B = S[args.basis]
    anchors = range(B.dim) if args.anchor is None else [args.anchor]
    out, lines = [], []
    try:
        for k in anchors:
            if not 0 <= k < B.dim:
                raise UsageError(f"--anchor must be in 0..{B.dim - 1}")
            sub = extract_ortho_subset(B, args.subsystem, k, args.tol)
            out.append({"anchor": k, "indices": list(sub.indices)})
            lines.append(f"anchor {k}: {list(sub.indices)}")
    except StructuralViolation as e:
        return 1, {"passed": False, "error": str(e), "subsets": out}, lines + [f"FAIL: {e}"]
    return 0, {"passed": True, "subsets": out}, lines


def cmd_group(args):
    S = _load(args, args.file)
    ok, out, lines = True, [], []
    for b, (name, B) in enumerate(zip(S.names, S)):
        g = conjecture2_grouping(B, args.tol)
        entry = {"basis": name, "success": g.success, "first": g.first, "second": g.second}
        if g.success:
            lines.append(f"{name}: first factors {g.first}; second factors {g.second}")
        else:
            ok = False
            lines.append(f"{name}: FAILED ({g.witness})")
            if args.artifact_dir:
                Path(args.artifact_dir).mkdir(parents=True, exist_ok=True)
                p = g.persist(B, Path(args.artifact_dir) / f"grouping-counterexample-{b}.mub.json", args.tol)
                entry["artifact"] = str(p)
        out.append(entry)
    return (0 if ok else 1), {"passed": ok, "bases": out}, lines


def cmd_equiv(args):
    A, B = _load(args, args.first), _load(args, args.second)
    if A.signature != B.signature:
        raise UsageError(f"signature mismatch: {A.signature} vs {B.signature}")
    v = equivalent(A, B, budget=args.budget, seed=args.seed)
    data = {"verdict": v.kind, "separating": v.separating, "evaluations": v.evaluations,
            "witness": [move_to_dict(m) for m in v.witness]}
    lines = [f"verdict: {v.kind}"]
    if v.separating:
        lines.append(f"separating invariant: {v.separating}")
    if v.witness:
        lines.append(f"witness: {len(v.witness)} moves ({', '.join(type(m).__name__ for m in v.witness)})")
    code = {"equivalent": 0, "inequivalent": 1}.get(v.kind, 1)
    return code, data, lines


def cmd_entangle(args):
    S = _load(args, args.file)
    res = find_mu_vectors(S, restarts=args.restarts, tol=args.tol, seed=args.seed)
    ok = True
    vecs, lines = [], [f"restarts {res.restarts}, best objective {res.best_residual:.3e}, "
                       f"vectors found {len(res.vectors)}"]
    for i, v in enumerate(res.vectors):
        audits = audit_mu_vector(v, S, args.tol)
        entry = {"vector": [[float(z.real), float(z.imag)] for z in v.coords], "cuts": []}
        for a in audits:
            entry["cuts"].append({"subsystem": a.subsystem, "mixedness_deviation": a.mixedness_deviation,
                                  "hypothesis": a.hypothesis, "maximally_mixed": a.maximally_mixed})
            if a.hypothesis and not a.maximally_mixed:
                ok = False
        lines.append(f"vector {i}: " + ", ".join(
            f"cut {a.subsystem}: deviation {a.mixedness_deviation:.2e}"
            + ("" if a.hypothesis else " (hypothesis not met)") for a in audits))
        vecs.append(entry)
    if not res.vectors:
        lines.append("no MU vector found (numerical evidence only)")
    data = {"best_objective": res.best_residual, "restarts": res.restarts, "vectors": vecs, "passed": ok}
    return (0 if ok else 1), data, lines


def _report_dict(r):
    return {"signature": list(r.signature.dims), "target": r.target, "restarts": r.restarts,
            "best_objective": r.best_objective, "found": len(r.found), "wall_time": r.wall_time,
            "flags": r.flags}


def cmd_search(args):
    if args.target == "extend-set":
        if not args.file:
            raise UsageError("extend-set needs a MubFile")
        S = _load(args, args.file)
        r = extend_set(S, restarts=args.restarts, tol=args.tol, seed=args.seed, time_limit=args.time_limit)
    else:
        sig = args.signature
        if sig is None:
            if not args.file:
                raise UsageError("conjecture1 needs --signature or a MubFile")
            sig = _load(args, args.file).signature.dims
        r = conjecture1_probe(sig, restarts=args.restarts, sweeps=args.sweeps, tol=args.tol, seed=args.seed,
                              time_limit=args.time_limit, out_dir=args.out)
    data = _report_dict(r)
    if args.out and r.found and args.target == "extend-set":
        Path(args.out).mkdir(parents=True, exist_ok=True)
        data["files"] = [str(save_mubset(S2, Path(args.out) / f"found-{i}.mub.json", seed=args.seed))
                         for i, S2 in enumerate(r.found)]
    lines = [f"{r.target} on {r.signature}: {r.restarts} restarts, best objective {r.best_objective:.3e}, "
             f"found {len(r.found)}"] + r.flags
    return 0, data, lines


def cmd_bound(args):
    b = mu_product_bound(args.signature)
    data = {"signature": list(args.signature), "bound": b.bound, "status": b.status.value,
            "limiting_dim": b.limiting_dim, "assumed_counts": {str(k): v for k, v in b.assumed_counts.items()}}
    return 0, data, [f"{b.bound} {b.status.value.capitalize()}"]


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "classify": cmd_classify,
            "extract-ortho": cmd_extract, "group": cmd_group, "equiv": cmd_equiv,
            "entangle": cmd_entangle, "search": cmd_search, "bound": cmd_bound}


def _emit(args, code, data, lines, out=None):
    out = sys.stdout if out is None else out
    meta = {"version": __version__, "tol": args.tol, "seed": args.seed, "exit_code": code}
    if args.command in ("entangle", "search"):
        meta["restarts"] = args.restarts
    if args.format == "structured":
        print(json.dumps({"command": args.command, **meta, "result": data}, indent=1, default=_jsonable),
              file=out)
    else:
        for line in lines:
            print(line, file=out)
        print(f"[mupb {__version__} tol={args.tol:g} seed={args.seed}]", file=out)


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return str(x)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        code, data, lines = COMMANDS[args.command](args)
    except MubFileError as e:
        print(f"mupb: file error: {e}", file=sys.stderr)
        return 2
    except (UsageError, SearchPreconditionError, ConstructionError, DimensionError, NormError,
            MuPreconditionError) as e:
        print(f"mupb: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"mupb: {e}", file=sys.stderr)
        return 2
    _emit(args, code, data, lines)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
