"""Command-line entry point: ``walkrd point``, ``walkrd curve`` and ``walkrd validate``.

Exit status is 0 on success, 1 when validation fails or a curve point
cannot be evaluated, and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys

from walkrd.curves import SCHEMES, CurveRequest, write_curve
from walkrd.errors import DomainError
from walkrd.schemes import (
    SchemeConfig,
    ce_ec_gap,
    distortion_ce,
    distortion_ec,
    drf_source,
    ec_threshold,
    high_rate_ce,
    high_rate_ec,
)
from walkrd.validation import run_all


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be positive and finite, got {text}")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _schemes(text):
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    unknown = [s for s in names if s not in SCHEMES]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"schemes must come from {','.join(SCHEMES)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walkrd", description="Rate-distortion of a decimated Gaussian random walk.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="distortions at one (M, R)")
    p.add_argument("--m", type=_positive_int, required=True, help="decimation factor")
    p.add_argument("--rate", type=_positive_float, required=True, help="bits per source sample")

    c = sub.add_parser("curve", help="write a distortion sweep as CSV")
    c.add_argument("--mode", choices=("vs-rate", "vs-m"), required=True)
    c.add_argument("--fixed", type=_positive_float, required=True, help="M for vs-rate, R for vs-m")
    c.add_argument("--min", type=_positive_float, required=True, dest="grid_min")
    c.add_argument("--max", type=_positive_float, required=True, dest="grid_max")
    c.add_argument("--steps", type=_positive_int, required=True)
    c.add_argument("--spacing", choices=("linear", "log"), default="log")
    c.add_argument("--schemes", type=_schemes, default=("ec", "ce", "gap"))
    c.add_argument("--out", required=True)
    c.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")

    v = sub.add_parser("validate", help="run the acceptance checks")
    v.add_argument("--level", choices=("fast", "full"), default="fast")
    v.add_argument("--seed", type=_seed, default=0)
    return parser


def _fmt(x):
    return f"{x:.10g}"


def cmd_point(M: int, R: float) -> str:
    cfg = SchemeConfig(M, R)
    lines = [f"M = {M}", f"R = {_fmt(R)}", f"MR = {_fmt(M * R)}"]
    for name, b in (("source_drf", drf_source(R)), ("ec", distortion_ec(cfg)), ("ce", distortion_ce(cfg))):
        lines.append(f"{name}: total = {_fmt(b.total)}  theta = {_fmt(b.theta)}  mmse_term = {_fmt(b.mmse_term)}"
                     f"  coding_term = {_fmt(b.coding_term)}  cross_term = {_fmt(b.cross_term)}")
    hce, hec = high_rate_ce(cfg), high_rate_ec(cfg)
    lines += [
        f"gap (ce - ec) = {_fmt(ce_ec_gap(cfg))}",
        f"ce high-rate form = {_fmt(hce.distortion)}  valid = {hce.valid}  (MR >= 1)",
        f"ec high-rate form = {_fmt(hec.distortion)}  valid = {hec.valid}  (MR >= {_fmt(ec_threshold(M))})",
    ]
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad usage
    if args.command == "point":
        print(cmd_point(args.m, args.rate))
        return 0
    if args.command == "curve":
        try:
            req = CurveRequest(args.mode, args.fixed, args.grid_min, args.grid_max, args.steps,
                               args.spacing, args.schemes, args.out)
        except DomainError as exc:
            parser.error(str(exc))
        try:
            rows = write_curve(req, args.jobs)
        except OSError as exc:
            print(f"walkrd: cannot write {args.out}: {exc}", file=sys.stderr)
            return 1
        except RuntimeError as exc:
            print(f"walkrd: {exc}", file=sys.stderr)
            return 1
        print(f"wrote {len(rows)} rows to {args.out}")
        return 0
    results = run_all(args.level, args.seed, echo=print)
    failed = [r.number for r in results if r.passed is False]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed at level {args.level}, seed {args.seed}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
