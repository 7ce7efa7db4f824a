"""Command-line front end.

Subcommands::

    domcalc parse "<expr>"
    domcalc domain "<expr>" --facts <file|builtin:NAME> [--trace <path>] [--format json|md]
    domcalc prove <kosaki|adjoint-trivial|cube|fourth|sixth|all>
    domcalc nested --n <k> [--power <p>] [--adjoint]
    domcalc conjecture --n <k>
    domcalc probe [--family gaussian --a <v>]... [--family hermite --k <i>]...
                  [--grid-l <L>] [--grid-n <N>] [--csv <path>]
    domcalc export-trace "<expr>" --facts <file|builtin:NAME> [--format json|md] [--out <path>]

Exit codes: 0 success or definite verdict; 2 Unknown verdict; 3 expression
parse error; 4 expression has no monomial normal form; 5 a proposition
failed; 1 any other error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .catalog import (
    LEMMA_FACTS,
    SCENARIO_NAMES,
    conjecture_status,
    nested_construction,
    run_proposition,
    scenario,
)
from .checker import verify_derivation
from .domains import (
    Derivation,
    FactBase,
    Verdict,
    domain_summary,
    load_facts,
    set_text,
)
from .errors import (
    DomcalcError,
    NonNormalizable,
    ParseError,
    UnverifiedDerivation,
)
from .expr import Adjoint, Power, pretty_print, shape_level, shape_of
from .parser import parse_expr
from .probe import Grid, probe_report

EXIT_OK = 0
EXIT_UNKNOWN = 2
EXIT_PARSE = 3
EXIT_NON_NORMALIZABLE = 4
EXIT_MISMATCH = 5
EXIT_ERROR = 1


def export_trace(derivation: Derivation | None, fmt: str, facts: FactBase) -> str:
    """Serialize a derivation after re-checking it; identical inputs yield
    identical bytes.  Raises :class:`UnverifiedDerivation` for empty or
    unverifiable derivations."""
    if derivation is None or not derivation.rule:
        raise UnverifiedDerivation("no derivation to export")
    if not verify_derivation(derivation, facts):
        raise UnverifiedDerivation("derivation failed verification")
    if fmt == "json":
        return derivation.to_json() + "\n"
    if fmt == "md":
        return derivation.to_markdown()
    raise DomcalcError(f"unknown trace format {fmt!r}")


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would sys.exit(2), which we reserve
        raise _ArgError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="domcalc", description="domain calculus for operator compositions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse an expression and print it back")
    p.add_argument("expr")

    p = sub.add_parser("domain", help="domain set and verdict for an expression")
    p.add_argument("expr")
    p.add_argument("--facts", required=True, help="facts file path or builtin:<scenario>")
    p.add_argument("--trace", help="write the derivation to this path")
    p.add_argument("--format", choices=("json", "md"), default="json")

    p = sub.add_parser("prove", help="run a named proposition (or all)")
    p.add_argument("name", choices=SCENARIO_NAMES + ("all",))

    p = sub.add_parser("nested", help="verdicts for the doubling construction")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--power", type=int)
    p.add_argument("--adjoint", action="store_true")

    p = sub.add_parser("conjecture", help="is the n-th power settled by the catalog?")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("probe", help="numerical membership table")
    p.add_argument("--family", action="append", choices=("gaussian", "hermite"), default=[])
    p.add_argument("--a", action="append", type=float, default=[])
    p.add_argument("--k", action="append", type=int, default=[])
    p.add_argument("--grid-l", type=float, default=None)
    p.add_argument("--grid-n", type=int, default=None)
    p.add_argument("--csv", help="also write the table as CSV to this path")

    p = sub.add_parser("export-trace", help="export a verified derivation")
    p.add_argument("expr")
    p.add_argument("--facts", required=True)
    p.add_argument("--format", choices=("json", "md"), default="json")
    p.add_argument("--out", help="output path (default: stdout)")
    return parser


def _resolve_facts(source: str) -> FactBase:
    if source.startswith("builtin:"):
        name = source[len("builtin:"):]
        if name == "lemma":
            return load_facts(LEMMA_FACTS, "builtin:lemma")
        return scenario(name).facts
    path = Path(source)
    return load_facts(path.read_text(encoding="utf-8"), str(path))


def _verdict_exit(verdict: Verdict) -> int:
    return EXIT_UNKNOWN if verdict is Verdict.UNKNOWN else EXIT_OK


def _cmd_parse(args) -> int:
    e = parse_expr(args.expr)
    level = shape_level(shape_of(e))
    print(pretty_print(e))
    print(f"space: {2 ** level} base component(s) (pairing depth {level})")
    return EXIT_OK


def _cmd_domain(args) -> int:
    e = parse_expr(args.expr)
    facts = _resolve_facts(args.facts)
    domain, verdict, derivation = domain_summary(e, facts)
    print(f"dom({pretty_print(e)}) = {set_text(domain)}")
    print(f"verdict: {verdict}")
    if args.trace:
        Path(args.trace).write_text(export_trace(derivation, args.format, facts), "utf-8")
        print(f"trace written to {args.trace}")
    return _verdict_exit(verdict)


def _cmd_prove(args) -> int:
    names = list(SCENARIO_NAMES) if args.name == "all" else [args.name]
    all_pass = True
    for name in names:
        report = run_proposition(name)
        print(report.to_text())
        all_pass = all_pass and report.passed
    return EXIT_OK if all_pass else EXIT_MISMATCH


def _cmd_nested(args) -> int:
    if args.power is None:
        report = run_proposition(f"nested:{args.n}")
        print(report.to_text())
        return EXIT_OK if report.passed else EXIT_MISMATCH
    facts, t = nested_construction(args.n)
    e = Adjoint(t) if args.adjoint else t
    if args.power > 1:
        e = Power(e, args.power)
    _, verdict, _ = domain_summary(e, facts)
    side = "adjoint " if args.adjoint else ""
    print(f"nested level {args.n}, {side}power {args.power}: {verdict}")
    return _verdict_exit(verdict)


def _cmd_conjecture(args) -> int:
    print(conjecture_status(args.n))
    return EXIT_OK


def _cmd_probe(args) -> int:
    families = None
    if args.family:
        gaussians = list(args.a)
        hermites = list(args.k)
        families = []
        for fam in args.family:
            queue = gaussians if fam == "gaussian" else hermites
            flag = "--a" if fam == "gaussian" else "--k"
            if not queue:
                raise _ArgError(f"--family {fam} needs a matching {flag} value")
            families.append((fam, queue.pop(0)))
        if gaussians or hermites:
            raise _ArgError("more --a/--k values than --family entries")
    grid_kwargs = {}
    if args.grid_l is not None:
        grid_kwargs["half_width"] = args.grid_l
    if args.grid_n is not None:
        grid_kwargs["points"] = args.grid_n
    report = probe_report(families, Grid(**grid_kwargs) if grid_kwargs else None)
    print(report.to_text())
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), "utf-8")
        print(f"csv written to {args.csv}")
    return EXIT_OK


def _cmd_export_trace(args) -> int:
    e = parse_expr(args.expr)
    facts = _resolve_facts(args.facts)
    _, verdict, derivation = domain_summary(e, facts)
    document = export_trace(derivation, args.format, facts)
    if args.out:
        Path(args.out).write_text(document, "utf-8")
        print(f"trace written to {args.out}")
    else:
        sys.stdout.write(document)
    return _verdict_exit(verdict)


_COMMANDS = {
    "parse": _cmd_parse,
    "domain": _cmd_domain,
    "prove": _cmd_prove,
    "nested": _cmd_nested,
    "conjecture": _cmd_conjecture,
    "probe": _cmd_probe,
    "export-trace": _cmd_export_trace,
}


def run_cli(argv: list[str] | None = None) -> int:
    """Dispatch one invocation; errors map to exit codes, never escape."""
    parser = _build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # argparse --help
            return int(exc.code or 0)
        return _COMMANDS[args.command](args)
    except _ArgError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NonNormalizable as exc:
        print(f"not normalizable: {exc}", file=sys.stderr)
        return EXIT_NON_NORMALIZABLE
    except DomcalcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv: list[str] | None = None) -> int:
    return run_cli(argv)


if __name__ == "__main__":
    sys.exit(main())
