"""Command-line interface.

Exit codes: 0 success, 1 bad input (parse, validation or flag errors),
2 a library invariant failed at run time.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import brand_alloc as ba
from .documents import emit_instance, emit_report, parse_instance, write_slot_csv
from .errors import InputError, InstanceError, InvariantViolation
from .reporting import (
    ConflictingFlags,
    allocation_report,
    axioms_report,
    price_report,
    ratio_report,
    revenue_report,
    run_allocation,
    slot_rows,
)

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2

GENERATORS = {
    "greedy-tight": ba.make_tight_greedy_instance,
    "greedy-vs-standard": ba.make_greedy_vs_standard_instance,
}


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _add_file(p):
    p.add_argument("file", nargs="?", default="-", help="instance document (default: stdin)")


def _add_outputs(p):
    p.add_argument("--csv", metavar="PATH", help="also write one row per slot to PATH")
    p.add_argument("--figure", metavar="PATH", help="also render a figure to PATH")


def _add_run(p):
    p.add_argument("--model", choices=["separable", "externality", "brand"], default="externality")
    p.add_argument(
        "--method", choices=["rank", "bisection", "brute", "enumerate", "greedy", "fastpath"], default=None
    )
    p.add_argument("--lambda", dest="lam", type=float, default=None, help="override the instance's lambda")
    p.add_argument("--show-all", action="store_true", help="fill every slot; never drop negative-score ads")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="posauction", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("validate", help="check an instance document")
    _add_file(p)

    p = sub.add_parser("allocate", help="choose an allocation and report its welfare")
    _add_file(p)
    _add_run(p)
    _add_outputs(p)

    p = sub.add_parser("price", help="allocate, then price every shown ad")
    _add_file(p)
    _add_run(p)
    p.add_argument("--rule", choices=["maintaining", "swap"], required=True)
    p.add_argument("--tol", type=float, default=1e-9, help="bid tolerance for the maintaining rule")
    _add_outputs(p)

    p = sub.add_parser("compare-revenue", help="swap prices with and without externalities")
    _add_file(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--figure", metavar="PATH")

    p = sub.add_parser("check-axioms", help="test A1-A5 on a grid of quality vectors")
    p.add_argument("--model", choices=["separable", "practical", "externality"], required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--grid", type=float, nargs="+", default=[0.0, 0.25, 0.5, 0.75, 1.0])
    p.add_argument("--positions", type=float, nargs="+", default=[1.0, 0.6, 0.3])
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.add_argument("--figure", metavar="PATH")

    p = sub.add_parser("gen", help="emit a worst-case brand instance")
    p.add_argument("--case", choices=sorted(GENERATORS), required=True)
    p.add_argument("--epsilon", type=float, required=True)

    p = sub.add_parser("ratio", help="greedy vs. optimal welfare under brand effects")
    _add_file(p)
    p.add_argument("--figure", metavar="PATH")
    return parser


def _finish(report: dict, args, rows=None) -> None:
    sys.stdout.write(emit_report(report))
    if rows is not None and getattr(args, "csv", None):
        write_slot_csv(args.csv, rows)
    if getattr(args, "figure", None):
        from .plotting import plot_report

        plot_report(report, args.figure)


def _dispatch(args) -> int:
    cmd = args.command
    if cmd is None:
        raise UsageError("a subcommand is required")

    if cmd == "gen":
        sys.stdout.write(emit_instance(GENERATORS[args.case](args.epsilon)))
        return EXIT_OK

    if cmd == "check-axioms":
        if args.model == "separable" and args.lam != 1.0:
            raise ConflictingFlags("--lambda does not apply to --model separable")
        report = axioms_report(args.model, args.lam, args.nu, args.grid, args.positions, args.tolerance)
        _finish(report, args)
        return EXIT_OK

    if cmd == "validate":
        try:
            inst = parse_instance(_read(args.file))
        except InstanceError as exc:
            sys.stdout.write(
                emit_report(
                    {
                        "command": "validate",
                        "valid": False,
                        "errors": [{"code": v.code, "message": v.message} for v in exc.violations],
                    }
                )
            )
            return EXIT_INPUT
        profile = "brand" if inst.is_brand else "n"
        sys.stdout.write(emit_report({"command": "validate", "valid": True, "m": inst.m, "s": inst.s, "profile": profile}))
        return EXIT_OK

    inst = parse_instance(_read(args.file))
    if cmd == "allocate":
        run = run_allocation(inst, args.model, args.method, args.lam, args.show_all)
        _finish(allocation_report(run), args, slot_rows(run))
    elif cmd == "price":
        run = run_allocation(inst, args.model, args.method, args.lam, args.show_all)
        report, prices = price_report(run, args.rule, args.tol, args.show_all)
        _finish(report, args, slot_rows(run, prices))
    elif cmd == "compare-revenue":
        _finish(revenue_report(inst, args.lam), args)
    elif cmd == "ratio":
        _finish(ratio_report(inst), args)
    return EXIT_OK


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _dispatch(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
