"""``symdet`` command line: compute, degree, bench.

Exit codes are the machine contract: 0 verified success, 2 nonconvergence,
1 usage or I/O error.  Messages for humans go to standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import bench, engine, oracle
from .degbound import degree_bounds
from .exprio import InstanceError, ResultFile, dumps_result, load_instance, print_poly, write_result

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGENCE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for nonconvergence here
    def error(self, message):
        raise UsageError(message)


def _dyadic(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _int_list(text: str) -> list[int]:
    """'9' -> [9]; '2,4,6' -> [2, 4, 6]; '3-6' -> [3, 4, 5, 6]."""
    out = []
    for part in text.split(","):
        part = part.strip()
        try:
            if "-" in part[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad order list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty order list")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="symdet", description="Exact determinants of polynomial matrices.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("compute", help="compute det(M) for an instance file")
    c.add_argument("--input", "-i", required=True, help="instance JSON file")
    c.add_argument("--output", "-o", help="write the result JSON here (default: stdout)")
    c.add_argument("--lambda", dest="lam", type=_dyadic, default=Fraction(1, 2),
                   help="node spacing, a dyadic rational (default 1/2)")
    c.add_argument("--offset", type=_dyadic, default=None, help="first node (default: lambda)")
    c.add_argument("--no-reduce", action="store_true", help="skip the Kronecker reduction")
    c.add_argument("--threads", type=_positive_int, default=None,
                   help=f"worker count (default ${engine.THREADS_ENV} or 1)")
    c.add_argument("--verify", type=int, default=4, metavar="K",
                   help="exact verification points, K >= 1 (default 4)")
    c.add_argument("--precision-bits", type=int, default=None, metavar="P",
                   help="override the working precision")
    c.add_argument("--max-escalations", type=int, default=3)
    c.add_argument("--mode", choices=["approx", "exact", "exact-symbolic", "cofactor"],
                   default="approx",
                   help="node evaluation (approx|exact) or a symbolic baseline")
    c.add_argument("--stats", action="store_true", help="print a summary to stderr")

    d = sub.add_parser("degree", help="print per-variable degree bounds as JSON")
    d.add_argument("--input", "-i", required=True)

    b = sub.add_parser("bench", help="run the randomized strategy comparison, CSV out")
    b.add_argument("--orders", type=_int_list, default=[2, 3, 4],
                   help="matrix orders, e.g. 2,4,6 or 3-8")
    b.add_argument("--variables", type=int, default=3)
    b.add_argument("--degree", type=int, default=1)
    b.add_argument("--coeff", type=int, default=9)
    b.add_argument("--trials", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--strategies", default="approx-interp,exact-symbolic-bareiss",
                   help=f"comma separated subset of {','.join(bench.STRATEGIES)}")
    b.add_argument("--threads", type=_positive_int, default=None)
    b.add_argument("--no-memory", action="store_true", help="skip tracemalloc peaks")
    b.add_argument("--output", "-o", help="write CSV here (default: stdout)")
    return p


def _threads(value: int | None) -> int:
    return value if value is not None else engine.default_threads()


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise InstanceError(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_compute(args) -> int:
    if args.verify < 1:
        raise UsageError("--verify must be >= 1")
    m = load_instance(args.input)
    if args.mode in ("exact-symbolic", "cofactor"):
        fn = oracle.det_symbolic_bareiss if args.mode == "exact-symbolic" else oracle.det_symbolic_cofactor
        try:
            det = fn(m)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        result = ResultFile.from_polynomial(det, {"mode": args.mode, "verified": True})
        _write(result, args.output)
        if args.stats:
            print(f"determinant: {print_poly(det)}", file=sys.stderr)
        return EXIT_OK

    cfg = engine.PipelineConfig(
        lam=args.lam, offset=args.offset, reduce=False if args.no_reduce else None,
        verify=args.verify, max_escalations=args.max_escalations,
        threads=_threads(args.threads), mode=args.mode, precision=args.precision_bits)
    try:
        report = engine.compute_determinant(m, cfg)
    except engine.NonConvergenceError as exc:
        print(f"symdet: {exc}", file=sys.stderr)
        _write(ResultFile.from_polynomial(exc.report.polynomial, exc.report.diagnostics()), args.output)
        if args.stats:
            print("\n".join(engine.summary_lines(exc.report)), file=sys.stderr)
        return EXIT_NONCONVERGENCE
    _write(ResultFile.from_polynomial(report.polynomial, report.diagnostics()), args.output)
    if args.stats:
        print("\n".join(engine.summary_lines(report)), file=sys.stderr)
    return EXIT_OK


def _write(result: ResultFile, path: str | None) -> None:
    if path is None:
        sys.stdout.write(dumps_result(result))
    else:
        write_result(path, result)


def cmd_degree(args) -> int:
    m = load_instance(args.input)
    print(json.dumps(degree_bounds(m).as_dict()))
    return EXIT_OK


def cmd_bench(args) -> int:
    strategies = tuple(s.strip() for s in args.strategies.split(",") if s.strip())
    try:
        spec = bench.BenchSpec(orders=args.orders, variables=args.variables, degree=args.degree,
                               coeff=args.coeff, trials=args.trials, seed=args.seed,
                               strategies=strategies, threads=_threads(args.threads),
                               track_memory=not args.no_memory)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = bench.run_bench(spec)
    _emit(bench.rows_to_csv(rows), args.output)
    return EXIT_OK


COMMANDS = {"compute": cmd_compute, "degree": cmd_degree, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: compute, degree or bench")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"symdet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceError, engine.ConfigError) as exc:
        print(f"symdet: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
