"""Command-line front end.

Exit codes: 0 success or identity holds, 1 identity fails, 2 usage, parse,
validation or binding error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import catalog, dsl
from .core import DiagramError, DiagramExpression, DiagramGraph, Environment, to_scalar
from .evaluator import (
    DEFAULT_GUARD,
    EnumerationGuardError,
    evaluate_expression,
    segment_count,
)

EXIT_OK, EXIT_FAILS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _shared(p: argparse.ArgumentParser):
    p.add_argument("--dim", type=int, default=None, help="dimension for builtin targets")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None, help="random trials (default 25)")
    p.add_argument("--field", choices=("rat", "f64"), default="rat")
    p.add_argument("--evaluator", choices=("enum", "contract"), default="contract")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--regen-golden", action="store_true", help="rewrite golden files from this run")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tracediagrams", description="Evaluate and verify trace diagrams.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a diagram or expression")
    p.add_argument("target", help="name in the file, or a builtin name without --file")
    p.add_argument("--file", "-f")
    p.add_argument("--bind", action="append", default=[], metavar="NAME=JSON",
                   help="bind a matrix or vector, e.g. A=[[1,2],[3,4]]")
    _shared(p)

    p = sub.add_parser("verify", help="check an identity")
    p.add_argument("name", nargs="?", help="suite case name (or group prefix)")
    p.add_argument("--file", "-f")
    p.add_argument("--lhs")
    p.add_argument("--rhs")
    p.add_argument("--strategy", choices=("randomized", "basis"), default=None)
    p.add_argument("--slots", default="", help="comma-separated vector slots for basis checks")
    p.add_argument("--workers", type=int, default=1)
    _shared(p)

    p = sub.add_parser("suite", help="run every identity")
    p.add_argument("--workers", type=int, default=1)
    _shared(p)

    p = sub.add_parser("expand", help="binor expansion of a 2-dimensional wiring term")
    p.add_argument("--ladder", help="matrix symbols on the ladder, e.g. ABC")
    p.add_argument("--open", action="store_true", help="leave the ladder open")
    p.add_argument("--file", "-f", help="wiring term in line format")
    p.add_argument("--fingerprint", action="store_true", help="print the identity in tr/det notation")
    _shared(p)

    p = sub.add_parser("render", help="emit dot-format graph text")
    p.add_argument("target")
    p.add_argument("--file", "-f")
    p.add_argument("--output", "-o")
    _shared(p)

    p = sub.add_parser("bench", help="time the two evaluators")
    p.add_argument("target", help="builtin diagram name")
    p.add_argument("--which", choices=("both", "enum", "contract"), default="both")
    p.add_argument("--repeat", type=int, default=1)
    _shared(p)
    return parser


# -- helpers -----------------------------------------------------------------

def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _scalars(value):
    if isinstance(value, list):
        return [_scalars(v) for v in value]
    if isinstance(value, float):
        return value
    return to_scalar(value)


def _parse_binds(items, field_name):
    mats, vecs = {}, {}
    for item in items:
        name, sep, text = item.partition("=")
        if not sep or not name:
            raise UsageError(f"bad --bind {item!r}; expected NAME=JSON")
        try:
            value = _scalars(json.loads(text))
        except (json.JSONDecodeError, ValueError, TypeError) as exc:
            raise UsageError(f"bad value for {name}: {exc}") from None
        if any(isinstance(x, float) for x in _flat(value)) and field_name != "f64":
            raise UsageError(f"float entries for {name} need --field f64")
        if value and isinstance(value[0], list):
            mats[name] = value
        else:
            vecs[name] = value
    return mats, vecs


def _flat(v):
    if isinstance(v, list):
        for x in v:
            yield from _flat(x)
    else:
        yield v


def _resolve(args, target: str):
    """(object, environment) for a target in a file or the builtin catalog."""
    if args.file:
        doc = dsl.parse(_read(args.file))
        if target not in doc.diagrams and target not in doc.exprs:
            raise UsageError(f"unknown target {target!r}; file defines {', '.join(doc.names()) or 'nothing'}")
        obj = doc.diagrams.get(target) or doc.expression(target)
        return obj, doc.environment()
    if args.dim is None:
        raise UsageError("builtin targets need --dim")
    try:
        obj = catalog.builtin(target, args.dim)
    except DiagramError as exc:
        raise UsageError(f"{exc}; builtins: {', '.join(catalog.BUILTIN_NAMES)}") from None
    return obj, Environment(args.dim)


def _format_value(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return dsl._value_text(v)


def tensor_text(t) -> str:
    if t.arity == 0:
        return _format_value(t.scalar)
    rows = [(" ".join(str(i) for i in idx), _format_value(v)) for idx, v in t.items()]
    width = max(len(r[0]) for r in rows)
    return "\n".join(f"{i.ljust(width)}  {v}" for i, v in rows)


def _which(args) -> str:
    return "enum" if args.evaluator == "enum" else "contract"


# -- commands ----------------------------------------------------------------

def cmd_eval(args, out) -> int:
    obj, env = _resolve(args, args.target)
    mats, vecs = _parse_binds(args.bind, args.field)
    env = Environment(env.dim, {**env.matrices, **mats}, {**env.vectors, **vecs}, args.field)
    expr = obj if isinstance(obj, DiagramExpression) else DiagramExpression.of(obj)
    t = evaluate_expression(expr, env, _which(args))
    out.write((dsl.tensor_to_json(t) if args.json else tensor_text(t)) + "\n")
    return EXIT_OK


def _report_lines(report, as_json: bool) -> str:
    if as_json:
        return json.dumps({"name": report.name, "strategy": report.strategy, "trials": report.trials,
                           "seed": report.seed, "status": report.status,
                           "counterexample": report.counterexample,
                           "elapsed": round(report.elapsed, 6)}, default=str)
    text = report.row()
    if not report.holds and report.counterexample:
        text += "\n  counterexample: " + json.dumps(report.counterexample, default=str)
    return text


def cmd_verify(args, out) -> int:
    from . import identities

    trials = args.trials
    if args.file:
        if not (args.lhs and args.rhs):
            raise UsageError("verify with --file needs --lhs and --rhs")
        doc = dsl.parse(_read(args.file))
        for n in (args.lhs, args.rhs):
            if n not in doc.diagrams and n not in doc.exprs:
                raise UsageError(f"unknown name {n!r} in {args.file}")
        lhs, rhs = doc.expression(args.lhs), doc.expression(args.rhs)
        name = f"{args.lhs} = {args.rhs}"
        if (args.strategy or "randomized") == "basis":
            slots = [s for s in args.slots.split(",") if s]
            report = identities.verify_on_basis(lhs, rhs, slots, doc.environment(), name, _which(args))
        else:
            mats = sorted(identities._matrix_names(lhs) | identities._matrix_names(rhs))
            vecs = sorted(identities._vector_names(lhs) | identities._vector_names(rhs))
            report = identities.verify_randomized(lhs, rhs, mats, trials or 25, args.seed, vector_symbols=vecs,
                                                  dim=doc.dim, name=name, workers=args.workers,
                                                  which=_which(args))
        reports = [report]
    else:
        if not args.name:
            raise UsageError("verify needs a case name or --file/--lhs/--rhs")
        cases = catalog.find_cases(args.name)
        if not cases:
            names = sorted({c.name for c in catalog.identity_suite() + catalog.erratum_cases()})
            raise UsageError(f"unknown identity {args.name!r}; known: {', '.join(names)}")
        reports = [identities.verify_case(c, args.seed, trials, args.workers, _which(args)) for c in cases]
    for r in reports:
        out.write(_report_lines(r, args.json) + "\n")
    return EXIT_OK if all(r.holds for r in reports) else EXIT_FAILS


def cmd_suite(args, out) -> int:
    from . import identities

    reports = identities.run_paper_suite(args.seed, args.workers, trials=args.trials)
    if args.json:
        for r in reports:
            out.write(_report_lines(r, True) + "\n")
    else:
        out.write(f"{'identity':<28} {'strategy':<10} {'trials':>6} {'seed':>5} status  elapsed\n")
        for r in reports:
            out.write(r.row() + "\n")
    failed = [r for r in reports if not r.holds]
    if args.regen_golden:
        _regen_golden(out)
    if failed:
        out.write(f"{len(failed)} failing: {', '.join(r.name for r in failed)}\n")
        for r in failed:
            out.write(f"  {r.name}: {json.dumps(r.counterexample, default=str)}\n")
        return EXIT_FAILS
    out.write(f"all {len(reports)} identities hold\n")
    return EXIT_OK


def _regen_golden(out):
    from . import identities

    for p in identities.regenerate_golden():
        out.write(f"wrote {p}\n")


def cmd_expand(args, out) -> int:
    from . import fingerprint, wiring

    if args.dim not in (None, 2):
        raise UsageError(f"binor expansion works in dimension 2, not {args.dim}")
    if bool(args.ladder) == bool(args.file):
        raise UsageError("expand needs exactly one of --ladder or --file")
    if args.ladder:
        symbols = [s for s in args.ladder.replace(",", " ").split()] if "," in args.ladder or " " in args.ladder \
            else list(args.ladder)
        t = wiring.ladder(symbols, closed=not args.open)
    else:
        t = wiring.parse_wiring(_read(args.file))
    terms = wiring.binor_alternatives(t)
    capside, cupside = wiring.binor_convention()
    if args.json:
        payload = {"terms": [a.to_text() for a in terms], "count": len(terms),
                   "convention": {"cap": capside, "cup": cupside}}
        if args.fingerprint:
            payload["identity"] = fingerprint.format_identity(_read_off(t, args))
        out.write(json.dumps(payload) + "\n")
        return EXIT_OK
    out.write(f"{len(terms)} terms (cap cilium {capside}, cup cilium {cupside})\n")
    for k, alt in enumerate(terms, 1):
        layers = "; ".join(str(layer) for layer in alt.layers) or "id"
        out.write(f"  [{k}] {layers}\n")
    if args.fingerprint:
        out.write(fingerprint.format_identity(_read_off(t, args)) + "\n")
    return EXIT_OK


def _read_off(t, args):
    from . import fingerprint

    if not t.closed:
        raise UsageError("--fingerprint needs a closed term")
    return fingerprint.read_off_identity(t, seed=args.seed)


def cmd_render(args, out) -> int:
    obj, _ = _resolve(args, args.target)
    if isinstance(obj, DiagramExpression):
        if len(obj.terms) != 1:
            raise UsageError(f"{args.target!r} is an expression with {len(obj.terms)} terms; render one diagram")
        obj = obj.terms[0][1]
    text = dsl.to_dot(obj, args.target)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_bench(args, out) -> int:
    from .sampling import random_bindings, random_vector, trial_rng

    n = args.dim or 3
    try:
        obj = catalog.builtin(args.target, n)
    except DiagramError as exc:
        raise UsageError(str(exc)) from None
    graphs = [obj] if isinstance(obj, DiagramGraph) else [g for _, g in obj.terms]
    rng = trial_rng(args.seed, 0)
    names = sorted({m for g in graphs for m in g.matrix_names()})
    vnames = sorted({v for g in graphs for v in g.vector_names()})
    env = Environment(n, random_bindings(names, n, rng), {v: random_vector(rng, n) for v in vnames}, args.field)
    expr = obj if isinstance(obj, DiagramExpression) else DiagramExpression.of(obj)
    segments = max(segment_count(g) for g in graphs)
    rows = []
    results = {}
    for which in ("enum", "contract"):
        if args.which not in ("both", which):
            continue
        if which == "enum" and n ** segments > DEFAULT_GUARD:
            rows.append((which, None, f"skipped: {n}^{segments} labelings exceed guard {DEFAULT_GUARD:.0e}"))
            continue
        start = time.perf_counter()
        try:
            for _ in range(max(args.repeat, 1)):
                t = evaluate_expression(expr, env, which)
        except EnumerationGuardError as exc:
            rows.append((which, None, f"skipped: {exc}"))
            continue
        elapsed = (time.perf_counter() - start) / max(args.repeat, 1)
        results[which] = t
        rows.append((which, elapsed, ""))
    agree = None
    if len(results) == 2:
        a, b = results["enum"], results["contract"]
        agree = a == b if args.field == "rat" else a.allclose(b)
    if args.json:
        out.write(json.dumps({"target": args.target, "dim": n, "segments": segments,
                              "rows": [{"evaluator": w, "seconds": s, "note": note} for w, s, note in rows],
                              "agree": agree}) + "\n")
        return EXIT_OK
    out.write(f"{args.target} n={n} segments={segments} field={args.field}\n")
    for which, secs, note in rows:
        timing = f"{secs * 1000:10.3f} ms" if secs is not None else f"{'-':>13}"
        out.write(f"  {which:<9}{timing}  {note}".rstrip() + "\n")
    if agree is not None:
        out.write(f"  values agree: {'yes' if agree else 'NO'}\n")
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "suite": cmd_suite, "expand": cmd_expand,
            "render": cmd_render, "bench": cmd_bench}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.field == "f64" and args.command not in ("eval", "bench"):
            raise UsageError("--field f64 is only available for eval and bench")
        return COMMANDS[args.command](args, out)
    except dsl.DslError as exc:
        where = f"{args.file}:" if getattr(args, "file", None) else ""
        err.write(f"error: {where}{exc}\n")
    except (UsageError, DiagramError) as exc:
        err.write(f"error: {exc}\n")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
