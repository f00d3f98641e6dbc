"""Command line entry point: `rabc analyze | run | check`."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import lp
from .annotations import TypingError, annotations_of, render
from .harness import measure_and_fit, scaffold_args
from .inference import analyze_program
from .interpreter import (
    DEFAULT_FUEL, Interpreter, RuntimeFault, show_value,
)
from .syntax import ParseError, parse_program, validate
from .syntax.ast import If, Match

EXIT_OK, EXIT_PARSE, EXIT_TYPING, EXIT_RUNTIME, EXIT_INTERNAL = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _num(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            src = fh.read()
    except OSError as err:
        raise CliError(EXIT_PARSE, f"{path}: {err.strerror}")
    try:
        prog = parse_program(src)
    except ParseError as err:
        raise CliError(EXIT_PARSE, f"{path}:{err}")
    report = validate(prog)
    if not report.ok:
        raise CliError(EXIT_PARSE, "\n".join(f"{path}:{v}" for v in report.violations))
    return prog


def analyze(prog, path: str):
    try:
        return analyze_program(prog)
    except TypingError as err:
        raise CliError(EXIT_TYPING, f"{path}: {err}")
    except lp.Unbounded as err:
        raise CliError(EXIT_INTERNAL, f"{path}: internal error: {err}")


def combined_problem(result) -> lp.LPProblem:
    """All groups in one LP; groups share no variables, so the optimum is the same."""
    out = lp.LPProblem()
    obj = lp.LinExpr()
    for g in result.groups:
        for v in g.problem.variables:
            out.add_var(v)
        out.extend(g.problem.constraints)
        obj = obj + g.problem.objective
    out.objective = obj
    return out


def analysis_json(result, current_only: bool = False) -> dict:
    a = result.assignment
    fns = []
    for name, sig in result.signatures.items():
        fns.append({
            "name": name,
            "params": [{"name": x, "type": render(t, a, current_only),
                        "annotations": [_num(a[v]) for v in annotations_of(t)]}
                       for x, t in sig.params],
            "ret": render(sig.ret, a, current_only),
            "delta": _num(a[sig.delta]),
            "constraints_count": sig.constraints_count,
        })
    return {
        "functions": fns,
        "solved": True,
        "assignment": {repr(v): _num(x) for v, x in sorted(a.items())},
    }


def cmd_analyze(args) -> int:
    prog = load(args.file)
    result = analyze(prog, args.file)
    if args.dump_lp:
        with open(args.dump_lp, "w", encoding="utf-8") as fh:
            fh.write(lp.dump_cplex(combined_problem(result)))
    if args.json:
        print(json.dumps(analysis_json(result, args.current_only), indent=2))
    elif not prog.functions:
        print("0 functions")
    else:
        for name in result.signatures:
            print(result.render_signature(name, args.current_only))
    return EXIT_OK


def parse_literal(text: str):
    if text.strip() == "()":
        return None
    try:
        v = json.loads(text)
    except json.JSONDecodeError:
        raise CliError(EXIT_PARSE, f"cannot read argument {text!r}")
    if isinstance(v, list) and not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise CliError(EXIT_PARSE, f"list arguments hold integers only: {text!r}")
    return v


def _stmt_line(s) -> str:
    if isinstance(s, If):
        return f"if {s.cond} ..."
    if isinstance(s, Match):
        return f"match {s.scrutinee} ..."
    from .syntax.printer import _stmt
    return _stmt(s, 0)[0].strip()


def cmd_run(args) -> int:
    prog = load(args.file)
    if args.fn not in prog.names():
        raise CliError(EXIT_PARSE, f"{args.file}: no function named {args.fn!r}")
    fn = prog.function(args.fn)
    bases = [parse_literal(t) for t in args.args]
    if len(bases) != len(fn.params):
        raise CliError(EXIT_PARSE, f"{fn.name} expects {len(fn.params)} arguments, got {len(bases)}")
    try:
        vals, store = scaffold_args(fn, bases)
    except (ValueError, TypeError) as err:
        raise CliError(EXIT_PARSE, f"bad argument: {err}")

    def show(ev):
        print(f"{'  ' * ev.depth}[{ev.cost}] {ev.fn}: {_stmt_line(ev.stmt)}", file=sys.stderr)

    interp = Interpreter(prog, fuel=args.fuel, trace=show if args.trace else None)
    try:
        value, cost = interp.call(fn, vals, store)
    except RuntimeFault as err:
        raise CliError(EXIT_RUNTIME, f"runtime error: {err}")
    print(f"value = {show_value(value)}")
    for key in sorted(store):
        if key.startswith("owner:") and key.count("'") == 0:
            print(f"{key[len('owner:'):]} -> {show_value(store[key])}")
    print(f"cost = {cost}")
    return EXIT_OK


def parse_sizes(text: str) -> range:
    try:
        lo, hi = text.split("..")
        return range(int(lo), int(hi) + 1)
    except ValueError:
        raise CliError(EXIT_PARSE, f"sizes must look like A..B, got {text!r}")


def load_assignment(path: str, result) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    raw = data.get("assignment", data)
    by_name = {repr(v): v for v in result.assignment}
    out = dict(result.assignment)
    for k, x in raw.items():
        if k in by_name:
            out[by_name[k]] = Fraction(x)
    return out


def cmd_check(args) -> int:
    prog = load(args.file)
    if not prog.functions:
        print(json.dumps({"benchmarks": [], "violations": 0}) if args.json else "0 functions")
        return EXIT_OK
    result = analyze(prog, args.file)
    assignment = load_assignment(args.assignment, result) if args.assignment else None
    sizes = parse_sizes(args.sizes)
    reports = []
    try:
        for name in result.signatures:
            reports.append(measure_and_fit(prog, result, name, sizes, assignment, args.fuel))
    except RuntimeFault as err:
        raise CliError(EXIT_RUNTIME, f"runtime error: {err}")
    bad = [r for r in reports if not r.sound]
    if args.json:
        print(json.dumps({"benchmarks": [r.to_json() for r in reports],
                          "violations": len(bad)}, indent=2))
    else:
        for r in reports:
            c0, c1 = r.bound_coeffs
            status = "sound" if r.sound else "VIOLATION"
            tight = ", tight" if r.tight else ""
            print(f"{r.fn}: {status}{tight}; bound {_num(c0)} + {_num(c1)}n; "
                  f"max slack {_num(r.slack_max)}")
        print(f"{len(reports)} functions, {len(bad)} violations")
    if bad:
        return EXIT_TYPING if assignment is not None else EXIT_INTERNAL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rabc", description="Resource bounds for a borrow calculus.")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="infer resource-annotated signatures")
    a.add_argument("file")
    a.add_argument("--json", action="store_true")
    a.add_argument("--dump-lp", metavar="PATH")
    a.add_argument("--paper-style", dest="current_only", action="store_true",
                   help="show only the current annotation of mutable borrows")
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("run", help="interpret a function and report its cost")
    r.add_argument("file")
    r.add_argument("--fn", required=True)
    r.add_argument("--args", nargs="*", default=[],
                   help="literals: integers, true/false, [1,2,3], ()")
    r.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    r.add_argument("--trace", action="store_true")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="compare inferred bounds with measured costs")
    c.add_argument("file")
    c.add_argument("--sizes", default="0..50")
    c.add_argument("--json", action="store_true")
    c.add_argument("--assignment", metavar="FILE",
                   help="JSON from `analyze --json` to use instead of solving")
    c.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    c.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(err, file=sys.stderr)
        return err.code
    except Exception as err:  # invariant breach
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
