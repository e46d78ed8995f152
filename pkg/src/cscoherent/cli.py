"""Command-line entry point: parse a scenario file, run it, report results.

    cscoherent --scenario runs/modulated.ini --out results/ --seed 7 --verbose

Exit codes: 0 all tasks passed, 1 a task failed, 2 parse/validation or setup
failure (parse problems are printed one per line with their line numbers).
"""
from __future__ import annotations

import argparse
import sys

from .errors import ScenarioError
from .runner import PROFILES, run_scenario
from .scenario import parse_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cscoherent",
        description="Construct exact oscillator coherent states from a scenario "
                    "file and verify them numerically.")
    parser.add_argument("--scenario", required=True, metavar="PATH",
                        help="scenario file (INI-style sections, see the README)")
    parser.add_argument("--out", required=True, metavar="DIR",
                        help="output directory for summary.json and task CSVs")
    parser.add_argument("--seed", type=int, default=0, metavar="U64",
                        help="base random seed shared by all sampling tasks")
    parser.add_argument("--profile", choices=PROFILES, default=None,
                        help="tolerance profile (default: CSCOHERENT_PROFILE "
                             "environment variable, else strict)")
    parser.add_argument("--verbose", action="store_true",
                        help="print per-task progress lines")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return 2
    try:
        scenario = parse_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"scenario {args.scenario} is invalid:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return 2
    log = print if args.verbose else None
    return run_scenario(scenario, args.out, seed=args.seed,
                        profile=args.profile, log=log)


if __name__ == "__main__":
    sys.exit(main())
