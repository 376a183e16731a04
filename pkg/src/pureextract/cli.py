"""Command-line entry point: ``pureextract <command> [options]``.

Exit codes: 0 on success, 2 on usage errors, 3 on malformed input files.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import experiments
from .spinbasis import StateFormatError, parse_region, read_state

EXIT_USAGE = 2
EXIT_INPUT = 3


class UsageError(Exception):
    pass


def _int_pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected r1,r2 but got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _range_triple(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step but got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _placement(text: str, n_sites: int):
    parts = text.split(";")
    if len(parts) != 2:
        raise UsageError(f"placement needs two site lists separated by ';', got {text!r}")
    return parse_region(parts[0], n_sites), parse_region(parts[1], n_sites)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pureextract",
        description="Projective extraction of pure entanglement from spin-ring states.",
    )
    parser.add_argument("--out", help="write CSV here instead of standard output")
    parser.add_argument("-v", "--verbose", action="store_true")
    # the same options after the subcommand; SUPPRESS keeps the top-level value
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    common.add_argument(
        "-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("supersinglet", parents=[common], help="supersinglet E_PP")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("quench", parents=[common], help="two-flip quench")
    p.add_argument("--sites", type=int, default=24)
    p.add_argument("--flips", type=_int_pair, default=(10, 14))
    p.add_argument("--t-max", type=float, default=6.0)
    p.add_argument("--dt", type=float, default=0.05)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--blocks", type=_int_list, help="comma-separated block sizes")
    group.add_argument("--placement", help="explicit regions, e.g. '1-12;13-24'")
    p.add_argument("--engine", choices=("sector", "bessel", "fermion"), default="sector")

    p = sub.add_parser("groundstate", parents=[common], help="two-flip ground state")
    p.add_argument("--sites", type=int, default=24)
    p.add_argument("--field", type=float, default=None)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--delta-max", type=int, default=None)
    group.add_argument("--placement")

    p = sub.add_parser("sweep", parents=[common], help="XY ground-state grid")
    p.add_argument("--gamma", type=_range_triple, default=(-1.0, 1.0, 0.05))
    p.add_argument("--field", type=_range_triple, default=(-2.0, 2.0, 0.05))
    p.add_argument("--sites", type=int, default=6)
    p.add_argument("--region-a", default="1,2")
    p.add_argument("--region-b", default="4,5")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("search", parents=[common], help="search a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--region-a", required=True)
    p.add_argument("--region-b", required=True)
    return parser


def run(args: argparse.Namespace) -> experiments.CsvTable:
    if args.command == "supersinglet":
        return experiments.cmd_supersinglet(args.n)
    if args.command == "quench":
        placement = _placement(args.placement, args.sites) if args.placement else None
        r1, r2 = args.flips
        return experiments.cmd_quench(
            args.sites, r1, r2, args.t_max, args.dt, args.blocks, placement, args.engine
        )
    if args.command == "groundstate":
        placement = _placement(args.placement, args.sites) if args.placement else None
        return experiments.cmd_groundstate(args.sites, args.field, args.delta_max, placement)
    if args.command == "sweep":
        grid = experiments.SweepGrid(
            args.gamma,
            args.field,
            args.sites,
            parse_region(args.region_a, args.sites),
            parse_region(args.region_b, args.sites),
        )
        return experiments.cmd_sweep(grid, max(1, args.workers))
    if args.command == "search":
        state = read_state(args.state)
        n = state.n_sites
        return experiments.cmd_search(
            state, parse_region(args.region_a, n), parse_region(args.region_b, n)
        )
    raise UsageError(f"unknown command {args.command!r}")


def _attach_negative_ranges(argv: list[str]) -> list[str]:
    # argparse reads "-2:2:0.05" as an option; glue it to its flag instead
    out: list[str] = []
    i = 0
    while i < len(argv):
        if argv[i] in ("--gamma", "--field") and i + 1 < len(argv) and ":" in argv[i + 1]:
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_negative_ranges(argv))
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        table = run(args)
    except StateFormatError as exc:
        print(f"pureextract: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"pureextract: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"pureextract: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = table.to_csv()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
