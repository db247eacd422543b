"""Command-line entry point: run / sweep / report / validate-mapping."""

from __future__ import annotations

import argparse
import sys

from . import harness


def _parse_seed_range(text: str) -> list[int]:
    """Accept 'a..b' (inclusive) or a comma-separated list."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmsprl",
        description="Curriculum RL with reward machines: experiment harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one seeded experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, required=True)
    p_run.add_argument("--out", default=None, help="override the config output dir")

    p_sweep = sub.add_parser("sweep", help="run several seeds in parallel")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--seeds", required=True, help="range a..b or list a,b,c")
    p_sweep.add_argument("--out", default=None)

    p_report = sub.add_parser("report", help="summarize a sweep directory")
    p_report.add_argument("--in", dest="in_dir", required=True)
    p_report.add_argument("--k-alpha", type=int, default=None)
    p_report.add_argument("--dkl-lb", type=float, default=None)

    p_val = sub.add_parser(
        "validate-mapping",
        help="brute-force the context table of an env and check the expert one",
    )
    p_val.add_argument("--env", required=True)
    p_val.add_argument("--rm", default=None, help="machine file (default: builtin)")
    p_val.add_argument("--grid", type=int, default=5, help="grid points per dimension")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "run":
        config = harness.load_config(args.config)
        log = harness.run_experiment(config, args.seed)
        out_dir = args.out if args.out is not None else config.output_dir
        path = harness.emit_run(log, out_dir)
        print(f"wrote {path}")
        return 0

    if args.command == "sweep":
        config = harness.load_config(args.config)
        seeds = _parse_seed_range(args.seeds)
        results = harness.sweep(config, seeds=seeds, out_dir=args.out)
        for seed in sorted(results):
            print(f"seed {seed}: wrote {results[seed]}")
        return 0

    if args.command == "report":
        report_dir, text = harness.write_report(
            args.in_dir, k_alpha=args.k_alpha, dkl_lb=args.dkl_lb
        )
        for line in text:
            print(line)
        print(f"report CSVs in {report_dir}")
        return 0

    if args.command == "validate-mapping":
        report = harness.validate_mapping(args.env, args.rm, args.grid)
        for line in report.lines():
            print(line)
        if report.has_unsound or report.missing_keys or report.extra_keys:
            print("RESULT: UNSOUND")
            return 1
        print("RESULT: sound" + (" and minimal" if report.all_exact else " (not minimal)"))
        return 0

    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
