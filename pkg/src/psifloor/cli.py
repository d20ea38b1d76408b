"""Command-line interface: ``psifloor compute | table | verify | crosscheck``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from math import factorial

from .arith import IntSeq, format_rational
from .engine import (
    CacheFormatError,
    CacheIntegrityError,
    admissible_keys,
    cache_load,
    cache_save,
    compute,
    crosscheck,
    trace_tilde,
)
from .recursion import DimensionError, InvariantKey, invariant_N, make_key

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MAX_TABLE_DEGREE = 7

SEQUENCE_HELP = (
    "Sequences are comma-separated, e.g. 1,0,0,0,2. k starts at index 0 "
    "(k_a = number of points with Psi-power a); alpha and beta start at index 1 "
    "(entry i = number of tangency points of order i). An empty string is the zero sequence."
)


class UsageError(Exception):
    pass


def _parse_seq(text: str, base: int, name: str) -> IntSeq:
    try:
        return IntSeq.parse(text, base)
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from None


def _key_from_args(args) -> tuple[InvariantKey, bool]:
    if args.d is None or args.k is None:
        raise UsageError("--d and --k are required")
    k = _parse_seq(args.k, 0, "k")
    alpha = _parse_seq(args.alpha, 1, "alpha")
    absolute = args.beta is None and not alpha
    beta = IntSeq((args.d,), 1) if args.beta is None else _parse_seq(args.beta, 1, "beta")
    return make_key(args.d, k, alpha, beta), absolute


def _tilde(key: InvariantKey, value: Fraction, absolute: bool) -> Fraction:
    """Marked invariant; the absolute convention leaves out the beta! factor."""
    factor = Fraction(key.k.factorial_product, factorial(key.k.size))
    if not absolute:
        factor *= key.beta.factorial_product
    return value * factor


def _emit(rows: list[dict], fmt: str, plain_field: str | None, out) -> None:
    if fmt == "json":
        json.dump(rows if len(rows) != 1 else rows[0], out, indent=1)
        out.write("\n")
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (json.dumps(v) if isinstance(v, list) else v) for k, v in row.items()})
        out.write(buf.getvalue())
    else:
        for row in rows:
            if plain_field is not None:
                out.write(f"{row[plain_field]}\n")
            else:
                out.write(" ".join(f"{k}={v}" for k, v in row.items()) + "\n")


def _seq_text(s: IntSeq) -> str:
    return s.to_text()


def cmd_compute(args, out) -> int:
    key, absolute = _key_from_args(args)
    method = {"floor": "enumeration"}.get(args.method, args.method)
    if args.trace:
        if not absolute:
            raise UsageError("--trace is only available for absolute invariants")
        order = None
        if args.psi_order is not None:
            try:
                order = tuple(int(x) for x in args.psi_order.split(","))
            except ValueError:
                raise UsageError(f"--psi-order: cannot parse {args.psi_order!r}") from None
        try:
            total, parts = trace_tilde(key.d, key.k, order)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        rows = [part.to_json() for part in parts]
        if args.format == "plain":
            for row in rows:
                out.write(f"{row['contribution']}\torder={row['order']}\tdiagram={json.dumps(row['diagram'])}\n")
            out.write(f"total {format_rational(total)}\n")
        else:
            _emit(rows + [{"total": format_rational(total)}], "json", None, out)
        return EXIT_OK
    try:
        result = compute(key, method, args.parallelism)
    except CacheIntegrityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    tilde = _tilde(key, result.value_N, absolute)
    row = {
        "d": key.d,
        "k": _seq_text(key.k),
        "alpha": _seq_text(key.alpha),
        "beta": _seq_text(key.beta),
        "N": format_rational(result.value_N),
        "tilde": format_rational(tilde),
        "method": result.method,
    }
    if args.format == "json":
        row["k"], row["alpha"], row["beta"] = (
            list(key.k.entries),
            list(key.alpha.entries),
            list(key.beta.entries),
        )
    _emit([row], args.format, "tilde" if args.tilde else "N", out)
    return EXIT_OK


def cmd_table(args, out) -> int:
    if args.max_d < 1 or args.max_d > MAX_TABLE_DEGREE:
        raise UsageError(f"--max-d must lie between 1 and {MAX_TABLE_DEGREE}")
    rows = []
    for d in range(1, args.max_d + 1):
        key = make_key(d, (3 * d - 1,))
        rows.append({"d": d, "k": _seq_text(key.k), "N": format_rational(invariant_N(key))})
    _emit(rows, args.format, None, out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    from .fixtures import run_fixtures

    results = run_fixtures(args.filter)
    if not results:
        print(f"warning: no fixture matches {args.filter!r}", file=sys.stderr)
        return EXIT_OK
    failed = 0
    for fixture, ok, actual in results:
        failed += not ok
        status = "PASS" if ok else "FAIL"
        out.write(f"{status} {fixture.name}: expected {fixture.expected}, got {actual}\n")
    out.write(f"{len(results) - failed}/{len(results)} fixtures passed\n")
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_crosscheck(args, out) -> int:
    if args.max_d is not None:
        keys = [key for d in range(1, args.max_d + 1) for key in admissible_keys(d)]
    else:
        keys = [_key_from_args(args)[0]]
    reports = [crosscheck(key, args.parallelism) for key in keys]
    rows = [r.to_json() for r in reports]
    if args.format == "plain":
        for r in reports:
            status = "PASS" if r.passed else "FAIL"
            out.write(
                f"{status} d={r.key.d} k=({_seq_text(r.key.k)}) alpha=({_seq_text(r.key.alpha)}) "
                f"beta=({_seq_text(r.key.beta)}) floor={format_rational(r.floor)} "
                f"recursion={format_rational(r.recursion)}\n"
            )
    else:
        for row in rows:
            for name in ("k", "alpha", "beta"):
                row[name] = row[name] if args.format == "json" else ",".join(map(str, row[name]))
        _emit(rows, args.format, None, out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psifloor",
        description="Exact plane descendant Gromov-Witten invariants via Psi-floor diagrams "
        "and the Caporaso-Harris recursion.",
        epilog=SEQUENCE_HELP,
    )
    parser.add_argument("--cache", help="JSON cache file (PSIFLOOR_CACHE overrides)")
    parser.add_argument("--parallelism", type=int, default=1, help="worker processes for enumeration")
    parser.add_argument("--format", choices=("plain", "json", "csv"), default="plain")
    sub = parser.add_subparsers(dest="command", required=True)

    def key_args(p, required=True):
        p.add_argument("--d", type=int, required=required, help="degree")
        p.add_argument("--k", required=required, help="Psi-power type, index 0 first")
        p.add_argument("--alpha", default="", help="fixed tangency orders, index 1 first")
        p.add_argument("--beta", default=None, help="free tangency orders (default: d at index 1)")

    p = sub.add_parser("compute", help="compute one invariant", epilog=SEQUENCE_HELP)
    key_args(p)
    p.add_argument("--method", choices=("floor", "recursion", "both"), default="recursion")
    p.add_argument("--tilde", action="store_true", help="print the marked invariant instead of N")
    p.add_argument("--trace", action="store_true", help="list per-marking contributions (absolute only)")
    p.add_argument("--psi-order", help="Psi-powers in diagram order for --trace (default non-increasing)")

    p = sub.add_parser("table", help="N_d for k = (3d-1), d = 1..max-d")
    p.add_argument("--max-d", type=int, default=5)

    p = sub.add_parser("verify", help="check the worked examples")
    p.add_argument("--filter", default=None, help="only fixtures whose name contains this text")

    p = sub.add_parser("crosscheck", help="compare floor enumeration with the recursion", epilog=SEQUENCE_HELP)
    key_args(p, required=False)
    p.add_argument("--max-d", type=int, default=None, help="check every admissible key up to this degree")

    for name, sp in sub.choices.items():
        # accept the global options after the subcommand too
        sp.add_argument("--cache", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        sp.add_argument("--parallelism", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        sp.add_argument("--format", choices=("plain", "json", "csv"), default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    return parser


COMMANDS = {
    "compute": cmd_compute,
    "table": cmd_table,
    "verify": cmd_verify,
    "crosscheck": cmd_crosscheck,
}


def main(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    cache = os.environ.get("PSIFLOOR_CACHE") or args.cache
    try:
        if args.parallelism < 1:
            raise UsageError("--parallelism must be at least 1")
        if cache:
            cache_load(cache)
        code = COMMANDS[args.command](args, out)
        if cache:
            cache_save(cache)
        return code
    except (UsageError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CacheFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CacheIntegrityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
