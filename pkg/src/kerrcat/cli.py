"""Command-line entry point: ``kerrcat run | validate | list-experiments``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import EXPERIMENTS, parse_config, run

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(text, args.config, args.set)
        result = run(cfg)
    except ValueError as exc:
        # ConfigError, TruncationError, GridCoverageError and out-of-domain parameters
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = result.write(args.out)
    print(f"wrote {len(result.rows)} rows to {out}")
    if not args.no_plot:
        from .plotting import plot_result

        png = plot_result(result, out.with_suffix(".png"))
        print(f"wrote figure {png}")
    for name, ok in result.checks.items():
        if not ok:
            print(f"check failed: {name}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_FAILED


def _cmd_validate(args) -> int:
    from .validation import all_passed, validate

    results = validate(fast=args.fast, truncation=args.truncation)
    for r in results:
        print(r.line(), flush=True)
    ok = all_passed(results)
    n_fail = sum(not r.passed for r in results if not r.supplementary)
    print(f"{'all criteria passed' if ok else f'{n_fail} criterion(s) failed'}")
    return EXIT_OK if ok else EXIT_FAILED


def _cmd_list(args) -> int:
    for name, spec in EXPERIMENTS.items():
        keys = ", ".join(f"{k}={v or '<auto>'}" for k, v in spec.defaults.items())
        print(f"{name:<18} {spec.summary}")
        print(f"{'':<18} defaults: {keys}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrcat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment sweep and write CSV (+ PNG)")
    p_run.add_argument("--config", required=True, help="flat key=value config file")
    p_run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry (repeatable)")
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="run the acceptance criteria")
    p_val.add_argument("--fast", action="store_true", help="coarser grids and fewer samples")
    p_val.add_argument("--truncation", type=int, default=None,
                       help="levels for the truncation-leakage check (default: automatic)")
    p_val.set_defaults(func=_cmd_validate)

    p_list = sub.add_parser("list-experiments", help="list experiments and their defaults")
    p_list.set_defaults(func=_cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
