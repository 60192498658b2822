"""Command-line entry point.

Exit status: 0 for a positive result, 1 for a negative one (for instance
a function that is not certified integrable), 2 for bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .algebra import Filter, GroundSet, enumerate_ultrafilters
from .errors import (
    AdditivityFailure,
    CoverageFailure,
    FamintError,
    HypothesisViolation,
    InvalidInput,
    PreconditionFailure,
)
from .expr import Expression
from .extend import InnerUniverse, Universe, transfer_report, extend_function, uniqueness_check
from .fam import (
    Fam,
    classify,
    conditional_fam,
    filter_to_fam,
    restrict_fam,
    sigma_centered_fam,
    uniform_fam,
)
from .function import BoundedFn
from .integral import integrate, pushforward_integral_check
from .props import SUITES, run_suite
from .rational import to_fraction
from .rect import parse_box, restricted_algebra
from .report import SIMULATION_HEADER, integral_document, render
from .riemann import grid_box_check, riemann_integrate
from .textio import element_from_bits, load_measure, parse_document

OK, NEGATIVE, BAD_INPUT = 0, 1, 2


def _eps(text: str) -> Fraction:
    eps = to_fraction(text, what="eps")
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    return eps


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InvalidInput(f"no such file: {path}")
    return p.read_text()


def _measure_document(m: Fam) -> dict:
    cls = classify(m)
    return {
        "ground": [str(x) for x in m.algebra.ground],
        "atoms": [t.bits() for t in m.algebra.atoms],
        "values": {e.bits(): m(e) for e in m.algebra.members},
        "class": {
            "finite": cls.finite,
            "probability": cls.probability,
            "strictly_positive": cls.strictly_positive,
            "free": cls.free,
        },
    }


# --- commands ---------------------------------------------------------------


def cmd_integrate(args) -> tuple[dict, int]:
    eps = _eps(args.eps)
    if args.measure:
        doc = parse_document(_read(args.measure))
        m = load_measure(_read(args.measure))
        if not doc.fvalues:
            raise InvalidInput("the measure file has no 'f:' lines to integrate")
        f = BoundedFn.on_points(doc.fvalues)
        rep = integrate(f, m, eps)
    else:
        if not (args.f and args.rect):
            raise InvalidInput("integrate needs --f and --rect, or --measure")
        box = parse_box(args.rect)
        f = BoundedFn.from_expression(Expression(args.f, box.dim))
        _, lam = restricted_algebra(box.lower, box.upper)
        rep = integrate(f, lam, eps, schedule=args.schedule, max_cells=args.max_cells)
    out = {"command": "integrate", "integral": integral_document(rep)}
    return out, OK if rep.integrable_at_eps and rep.certified else NEGATIVE


def cmd_riemann(args) -> tuple[dict, int]:
    eps = _eps(args.eps)
    box = parse_box(args.rect)
    f = BoundedFn.from_expression(Expression(args.f, box.dim))
    rep = riemann_integrate(f, box.lower, box.upper, eps, max_cells=args.max_cells)
    out = {
        "command": "riemann",
        "integral": integral_document(rep),
        "cells_per_axis": rep.diagnostics["cells_per_axis"],
    }
    return out, OK if rep.integrable_at_eps else NEGATIVE


def cmd_fam_validate(args) -> tuple[dict, int]:
    m = load_measure(_read(args.file))
    return {"command": "fam-validate", "valid": True, "measure": _measure_document(m)}, OK


def cmd_fam_build(args) -> tuple[dict, int]:
    kind = args.kind
    if kind == "uniform":
        if not args.ground:
            raise InvalidInput("uniform needs --ground")
        X = GroundSet(s.strip() for s in args.ground.split(","))
        support = [s.strip() for s in args.support.split(",")] if args.support else X.elements
        m = uniform_fam(X, support)
    else:
        if not args.file:
            raise InvalidInput(f"{kind} needs an algebra or measure file")
        doc = parse_document(_read(args.file))
        A = doc.algebra
        if kind == "sigma":
            if not args.at:
                raise InvalidInput("sigma needs at least one --at atom")
            ufs = [Filter.principal(A, element_from_bits(A, bits)) for bits in args.at]
            m = sigma_centered_fam(ufs, normalize=args.normalize)
        elif kind == "filter":
            if not args.generator:
                raise InvalidInput("filter needs --generator")
            m = filter_to_fam(Filter.principal(A, element_from_bits(A, args.generator)))
        else:
            base = load_measure(_read(args.file))
            if not args.on:
                raise InvalidInput(f"{kind} needs --on")
            b = element_from_bits(base.algebra, args.on)
            m = conditional_fam(base, b) if kind == "conditional" else restrict_fam(base, b)
    return {"command": "fam-build", "kind": kind, "measure": _measure_document(m)}, OK


def cmd_ultrafilters(args) -> tuple[dict, int]:
    doc = parse_document(_read(args.file))
    ufs = enumerate_ultrafilters(doc.algebra)
    out = {
        "command": "ultrafilters",
        "count": len(ufs),
        "ultrafilters": [{"generator": U.generator.bits(), "members": len(U)} for U in ufs],
    }
    return out, OK


def cmd_pushforward_check(args) -> tuple[dict, int]:
    text = _read(args.file)
    doc = parse_document(text)
    m = load_measure(text)
    if not doc.hmap:
        raise InvalidInput("the file has no 'map:' lines")
    if not doc.fvalues:
        raise InvalidInput("the file has no 'f:' lines")
    codomain = doc.codomain or GroundSet(dict.fromkeys(doc.hmap.values()))
    missing = [x for x in m.algebra.ground if x not in doc.hmap]
    if missing:
        raise InvalidInput(f"the map is not defined at {missing[0]!r}")
    for y in codomain:
        if y not in doc.fvalues:
            raise InvalidInput(f"f is not defined at codomain point {y!r}")
    rep = pushforward_integral_check(doc.fvalues, doc.hmap, m, codomain)
    return {"command": "pushforward-check", "ok": rep.ok, "details": rep.details}, OK if rep.ok else NEGATIVE


def cmd_grid_box_check(args) -> tuple[dict, int]:
    eps = _eps(args.eps)
    box = parse_box(args.rect)
    f = BoundedFn.from_expression(Expression(args.f, box.dim))
    rep = grid_box_check(f, box.lower, box.upper, eps, schedule=args.schedule, max_cells=args.max_cells)
    d = rep.details
    out = {
        "command": "grid-box-check",
        "ok": rep.ok,
        "grid": integral_document(d["grid"]),
        "box": integral_document(d["box"]),
        "certified_together": d["certified_together"],
        "intervals_overlap": d["intervals_overlap"],
    }
    return out, OK if rep.ok and d["grid"].integrable_at_eps else NEGATIVE


def _scenario_point(v, what: str) -> tuple:
    if isinstance(v, list):
        return tuple(to_fraction(x, what=what) for x in v)
    return (to_fraction(v, what=what),)


def _scenario_number(v, what: str) -> Fraction:
    if isinstance(v, float):
        raise InvalidInput(f"{what} must be an integer or a 'p/q' string, not a float")
    return to_fraction(v, what=what)


def load_scenario(text: str) -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"scenario is not valid JSON: {exc.msg} at line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(raw, dict):
        raise InvalidInput("scenario must be a JSON object")
    for key in ("a", "b", "D_M", "D_N"):
        if key not in raw:
            raise InvalidInput(f"scenario is missing {key!r}")
    if ("f" in raw) == ("f_table" in raw):
        raise InvalidInput("scenario needs exactly one of 'f' and 'f_table'")
    a, b = _scenario_point(raw["a"], "a"), _scenario_point(raw["b"], "b")
    for key in ("D_M", "D_N", "depth"):
        if key in raw and (not isinstance(raw[key], int) or isinstance(raw[key], bool)):
            raise InvalidInput(f"{key} must be an integer")
    sc = {
        "a": a,
        "b": b,
        "D_M": raw["D_M"],
        "D_N": raw["D_N"],
        "depth": raw.get("depth", 16),
        "eps": _scenario_number(raw.get("eps", "1/32"), "eps"),
    }
    if "f" in raw:
        expr = Expression(str(raw["f"]), len(a))
        sc["f"] = expr.text
        sc["inner"] = InnerUniverse.from_function(a, b, sc["D_M"], expr)
    else:
        table = {}
        for k, v in raw["f_table"].items():
            key = tuple(to_fraction(s.strip(), what="table point") for s in str(k).split(","))
            table[key] = _scenario_number(v, f"f({k})")
        sc["f"] = "table"
        sc["inner"] = InnerUniverse.from_table(a, b, sc["D_M"], table)
    return sc


def cmd_extend_sim(args) -> tuple[dict, int]:
    sc = load_scenario(_read(args.scenario))
    if args.eps is not None:
        sc["eps"] = _eps(args.eps)
    M = sc["inner"]
    N = Universe(sc["a"], sc["b"], sc["D_N"])
    eps = sc["eps"]
    rep = transfer_report(M, N, eps, depth=sc["depth"], adversary=args.adversary, seed=args.seed)
    ext = rep.extension
    other = "lower" if args.adversary == "envelope" else "envelope"
    uniq = []
    for d in sorted({max(1, sc["depth"] // 4), max(1, sc["depth"] // 2), sc["depth"]}):
        r1 = extend_function(M, N, d, eps=eps, adversary=args.adversary, seed=args.seed)
        r2 = extend_function(M, N, d, eps=eps, adversary=other, seed=args.seed)
        u = uniqueness_check(r1, r2)
        uniq.append({
            "depth": d,
            "disagreement_volume": u.disagreement_volume,
            "boundary_volume": u.boundary_volume,
            "disagreeing_points": u.disagreeing_points,
            "bounded": u.ok,
        })
    res = rep.restriction
    out = {
        "command": "extend-sim",
        "header": SIMULATION_HEADER,
        "scenario": {
            "a": list(sc["a"]), "b": list(sc["b"]), "D_M": sc["D_M"], "D_N": sc["D_N"],
            "depth": sc["depth"], "eps": eps, "f": sc["f"], "adversary": args.adversary,
        },
        "integral_M": integral_document(ext.integral_M),
        "integral_N": integral_document(ext.integral_N),
        "distance": rep.distance,
        "equal_within_eps": rep.equal_within_eps,
        "gap_ledger": [
            {"m": s.m, "cells_per_axis": list(s.cells_per_axis), "gap": s.gap} for s in ext.sandwiches
        ],
        "exceptional_mass": ext.exceptional_mass,
        "uniqueness": {"against": other, "levels": uniq},
        "restriction": {
            "outer_integrable": res["outer_integrable"],
            "inner_integrable": res["inner_integrable"],
            "distance": res["distance"],
        },
        "notes": ext.notes,
    }
    ok = rep.inner_integrable and rep.outer_integrable and rep.equal_within_eps
    return out, OK if ok else NEGATIVE


def cmd_props(args) -> tuple[dict, int]:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    results = [run_suite(n, seed=args.seed, count=args.count) for n in names]
    out = {"command": "props", "seed": args.seed, "suites": [r.as_dict() for r in results]}
    return out, OK if all(r.ok for r in results) else NEGATIVE


# --- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--decimal", action="store_true", help="show a decimal next to each rational")
    common.add_argument("--output", help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="famint", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def numeric(sp, eps="1/1000"):
        sp.add_argument("--eps", default=eps)
        sp.add_argument("--max-cells", type=int, default=1 << 20)

    sp = sub.add_parser("integrate", parents=[common], help="partition integral over a box or a finite measure")
    sp.add_argument("--f")
    sp.add_argument("--rect")
    sp.add_argument("--measure", help="measure file with 'f:' lines")
    sp.add_argument("--schedule", choices=("uniform", "adaptive"), default="uniform")
    numeric(sp)
    sp.set_defaults(run=cmd_integrate)

    sp = sub.add_parser("riemann", parents=[common], help="Riemann integral on uniform grids")
    sp.add_argument("--f", required=True)
    sp.add_argument("--rect", required=True)
    numeric(sp)
    sp.set_defaults(run=cmd_riemann, max_cells=1 << 22)

    sp = sub.add_parser("fam-validate", parents=[common], help="check a measure file")
    sp.add_argument("file")
    sp.set_defaults(run=cmd_fam_validate)

    sp = sub.add_parser("fam-build", parents=[common], help="construct a measure")
    sp.add_argument("kind", choices=("uniform", "sigma", "conditional", "restrict", "filter"))
    sp.add_argument("file", nargs="?")
    sp.add_argument("--ground")
    sp.add_argument("--support")
    sp.add_argument("--at", action="append", help="atom bitstring of an ultrafilter (repeatable)")
    sp.add_argument("--normalize", action="store_true")
    sp.add_argument("--on", help="member bitstring to condition on or restrict to")
    sp.add_argument("--generator", help="least member of a principal filter")
    sp.set_defaults(run=cmd_fam_build)

    sp = sub.add_parser("ultrafilters", parents=[common], help="list the ultrafilters of an algebra")
    sp.add_argument("file")
    sp.set_defaults(run=cmd_ultrafilters)

    sp = sub.add_parser("pushforward-check", parents=[common], help="integral transfer along a finite map")
    sp.add_argument("file")
    sp.set_defaults(run=cmd_pushforward_check)

    sp = sub.add_parser("grid-box-check", parents=[common], help="grid against box-algebra integration")
    sp.add_argument("--f", required=True)
    sp.add_argument("--rect", required=True)
    sp.add_argument("--schedule", choices=("uniform", "adaptive"), default="adaptive")
    numeric(sp, eps="1/4")
    sp.set_defaults(run=cmd_grid_box_check, max_cells=1 << 16)

    sp = sub.add_parser("extend-sim", parents=[common], help="extension between nested rational grids")
    sp.add_argument("scenario")
    sp.add_argument("--eps")
    sp.add_argument("--adversary", choices=("envelope", "lower", "random"), default="envelope")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(run=cmd_extend_sim)

    sp = sub.add_parser("props", parents=[common], help="run property suites")
    sp.add_argument("--suite", choices=("all", *SUITES), default="all")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int)
    sp.set_defaults(run=cmd_props)
    return p


def _error_document(exc: Exception) -> dict:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, AdditivityFailure):
        doc["witness"] = [e.bits() for e in exc.witness]
    elif isinstance(exc, (CoverageFailure, HypothesisViolation)) and getattr(exc, "element", None) is not None:
        doc["element"] = exc.element.bits()
    diagnostics = getattr(exc, "diagnostics", None)
    if diagnostics:
        doc["diagnostics"] = diagnostics
    return doc


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc, status = args.run(args)
    except (FamintError, ZeroDivisionError) as exc:
        # failing to certify is a negative answer; everything else is bad input
        status = NEGATIVE if isinstance(exc, PreconditionFailure) else BAD_INPUT
        doc = _error_document(exc)
        print(f"famint: {exc}", file=sys.stderr)
    _emit(render(doc, args.format, decimal=args.decimal), args.output)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
