"""Command-line interface: ``plie <command> [flags]``.

Every command prints one JSON document (or CSV with ``--format csv``) on
stdout.  Errors go to stderr as a JSON object.  Exit codes: 0 success,
1 verification failure or a numerical/domain error, 2 usage or parse errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from datetime import datetime, timezone
from typing import Optional, Sequence

from . import report as rp
from .algebra import CharPoly, char_roots, coeff_table
from .boros import conjugate_to_additive, conjugate_to_multiplicative, verify_boros
from .classify import classify_candidate
from .domain import Interval, map_from_text, orbit, parse_interval, parse_window
from .errors import ConfigError, ParseError, PlieError
from .solver import SolverConfig, falsification_suite, solve


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--no-timestamp", action="store_true", help="omit generated_at (byte-stable output)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plie", description="Solver and verifier for g^3 = 3g - 2 id and f^3 = f^3/x^2.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("roots", help="roots of a characteristic polynomial")
    p.add_argument("--coeffs", required=True, help="ascending coefficients, e.g. 2,-3,0,1")
    _common(p)

    p = sub.add_parser("coeffs", help="iterate coefficients (a_n, b_n, c_n)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--closed-form", action="store_true")
    _common(p)

    p = sub.add_parser("iterate", help="orbit of a point")
    p.add_argument("--g", required=True)
    p.add_argument("--interval", required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    _common(p)

    for name in ("verify", "classify"):
        p = sub.add_parser(name, help=f"{name} a candidate g")
        p.add_argument("--g", required=True)
        p.add_argument("--interval", required=True)
        p.add_argument("--grid", type=int, default=1001)
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--window", help="finite window 'a,b' (required for unbounded intervals)")
        _common(p)

    p = sub.add_parser("verify-boros", help="verify a candidate f of the multiplicative equation")
    p.add_argument("--f", required=True)
    p.add_argument("--interval", required=True)
    p.add_argument("--grid", type=int, default=1001)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--window", help="window 'a,b' in x (0 < a < b) replacing 0 or inf ends")
    _common(p)

    p = sub.add_parser("solve", help="search for a monotone grid solution")
    p.add_argument("--interval", required=True)
    p.add_argument("--grid", type=int, default=65)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decreasing", action="store_true")
    p.add_argument("--max-iterations", type=int, default=20000)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--step", type=float, default=1e-2)
    p.add_argument("--window")
    p.add_argument("--out", help="also write the JSON report to this file")
    p.add_argument("--trace", help="write the objective trace as CSV to this file")
    _common(p)

    p = sub.add_parser("falsify", help="many seeded solves and their success rate")
    p.add_argument("--interval", required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=65)
    p.add_argument("--decreasing", action="store_true")
    p.add_argument("--window")
    p.add_argument("--workers", type=int)
    _common(p)

    p = sub.add_parser("conjugate", help="log/exp conjugate of a map")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--f", help="multiplicative map on J, returns log o f o exp")
    grp.add_argument("--g", help="additive map on I, returns exp o g o log")
    p.add_argument("--interval", required=True)
    _common(p)
    return parser


def _need_window(domain: Interval, text: Optional[str]):
    if text is None:
        if not domain.is_bounded:
            raise ConfigError(f"{domain.literal()} is unbounded; pass --window a,b")
        return None
    return parse_window(text)


def _log_window(domain: Interval, text: Optional[str]):
    if text is None:
        return None, None
    a, b = parse_window(text)
    if a <= 0:
        raise ParseError(0, "a window with 0 < a < b", repr(text), text)
    return (a, b), (math.log(a), math.log(b))


def _run(args) -> tuple[dict, int]:
    cmd = args.command
    if cmd == "roots":
        poly = CharPoly.parse(args.coeffs)
        return rp.roots_doc(poly.coefficients, char_roots(poly)), 0
    if cmd == "coeffs":
        if args.n < 0:
            raise ConfigError("--n must be nonnegative")
        doc = rp.coeffs_doc(coeff_table(args.n), args.closed_form)
        return doc, 0 if doc.get("all_match", True) else 1
    if cmd == "iterate":
        if args.n < 0:
            raise ConfigError("--n must be nonnegative")
        dom = parse_interval(args.interval)
        g = map_from_text(args.g, dom)
        return rp.orbit_doc(args.g, dom, orbit(g, args.x, args.n)), 0
    if cmd in ("verify", "classify"):
        if args.grid < 3:
            raise ConfigError("--grid must be at least 3")
        dom = parse_interval(args.interval)
        window = _need_window(dom, args.window)
        g = map_from_text(args.g, dom)
        rep = classify_candidate(g, args.grid, window)
        doc = rp.classification_doc(args.g, rep, args.tol, full=cmd == "classify")
        return doc, 0 if doc["passed"] or cmd == "classify" else 1
    if cmd == "verify-boros":
        if args.grid < 2:
            raise ConfigError("--grid must be at least 2")
        dom = parse_interval(args.interval)
        xw, lw = _log_window(dom, args.window)
        f = map_from_text(args.f, dom)
        rep = verify_boros(f, args.grid, lw)
        doc = rp.boros_doc(args.f, dom, rep, args.tol, xw)
        return doc, 0 if doc["passed"] else 1
    if cmd == "solve":
        dom = parse_interval(args.interval)
        window = _need_window(dom, args.window)
        cfg = SolverConfig(
            grid_size=args.grid, max_iterations=args.max_iterations, step=args.step,
            tolerance=args.tolerance, seed=args.seed, monotone=not args.decreasing,
        )
        rep = solve(cfg, dom, window=window)
        if args.trace:
            with open(args.trace, "w", newline="") as fh:
                fh.write(rp.trace_csv(rep))
        return rp.solve_doc(rep), 0
    if cmd == "falsify":
        if args.runs < 1:
            raise ConfigError("--runs must be at least 1")
        dom = parse_interval(args.interval)
        window = _need_window(dom, args.window)
        cfg = SolverConfig(grid_size=args.grid, monotone=not args.decreasing)
        s = falsification_suite(dom, args.runs, args.seed, cfg, window, args.workers)
        return rp.falsify_doc(s, window), 0
    if cmd == "conjugate":
        dom = parse_interval(args.interval)
        if args.f is not None:
            out = conjugate_to_additive(map_from_text(args.f, dom))
            return rp.conjugate_doc("to_additive", args.f, dom, out.text(), out.domain), 0
        out = conjugate_to_multiplicative(map_from_text(args.g, dom))
        return rp.conjugate_doc("to_multiplicative", args.g, dom, out.text(), out.domain), 0
    raise UsageError(f"unknown command {cmd}")


def _fail(payload: dict, code: int) -> int:
    sys.stderr.write(rp.dumps(payload))
    return code


_VALUE_FLAGS = {"--g", "--f", "--x", "--interval", "--window", "--coeffs", "--seed"}


def _glue_negative_values(argv: list) -> list:
    # argparse reads "--g -2*x" as two flags; rewrite to "--g=-2*x"
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        return _fail({"error": "UsageError", "message": str(err)}, 2)
    except SystemExit as err:  # --help
        return int(err.code or 0)
    try:
        doc, code = _run(args)
    except (UsageError, ParseError, ConfigError) as err:
        payload = err.payload() if isinstance(err, PlieError) else {"error": "UsageError", "message": str(err)}
        return _fail(payload, 2)
    except PlieError as err:
        return _fail(err.payload(), 1)
    except (ValueError, TypeError) as err:
        return _fail({"error": type(err).__name__, "message": str(err)}, 2)
    if not args.no_timestamp:
        doc["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    text = rp.dumps(doc)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(rp.to_csv(doc) if args.format == "csv" else text)
    return code


if __name__ == "__main__":
    sys.exit(main())
