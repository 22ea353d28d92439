"""Command line front end: conefix axioms|modulus|solve|reproduce."""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConefixError
from .harness import (
    EXIT_CONFIG,
    format_table,
    load_scenario,
    reproduce,
    run_scenario,
)

_COMMAND_MODES = {
    "axioms": {"axioms"},
    "modulus": {"modulus"},
    "solve": {"solve", "solve-localized", "solve-power", "uniqueness"},
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conefix",
        description="Run cone-metric fixed-point scenarios from TOML configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in ("axioms", "modulus", "solve"):
        p = sub.add_parser(command, help=f"run a scenario whose mode fits '{command}'")
        p.add_argument("scenario", help="path to a scenario .toml file")
        _common_flags(p)
    p = sub.add_parser("reproduce", help="run all bundled scenarios against their expected values")
    _common_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="run scenarios in parallel")
    return parser


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out", default=".", help="directory for report files")
    p.add_argument(
        "--no-timestamp",
        action="store_true",
        help="omit the timestamp field so reports are byte-identical per seed",
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = os.environ.get("CONEFIX_OUT") or args.out
    timestamp = not args.no_timestamp

    if args.command == "reproduce":
        code, rows = reproduce(
            out_dir=out_dir, seed=args.seed, jobs=args.jobs, timestamp=timestamp
        )
        print(format_table(rows))
        return code

    try:
        scenario = load_scenario(args.scenario)
    except ConefixError as err:
        print(f"conefix: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if scenario.mode not in _COMMAND_MODES[args.command]:
        allowed = ", ".join(sorted(_COMMAND_MODES[args.command]))
        print(
            f"conefix: scenario mode {scenario.mode!r} does not fit the "
            f"{args.command!r} command (expected one of: {allowed})",
            file=sys.stderr,
        )
        return EXIT_CONFIG

    outcome = run_scenario(scenario, out_dir=out_dir, timestamp=timestamp, seed=args.seed)
    if "error" in outcome.report:
        print(f"conefix: {outcome.report['error']}", file=sys.stderr)
    else:
        summary = {
            k: outcome.report[k]
            for k in ("status", "a_hat", "v0", "k_hat", "axioms_passed", "passed")
            if k in outcome.report
        }
        pieces = ", ".join(f"{k}={v}" for k, v in summary.items())
        print(f"{scenario.name} [{scenario.mode}]: {pieces}")
        for path in outcome.files:
            print(f"  wrote {path}")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
