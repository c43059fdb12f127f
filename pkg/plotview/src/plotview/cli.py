"""Command line entry point: plotview <grid-file> [-o image] [--levels K]."""

from __future__ import annotations

import argparse
import sys

from . import DEFAULT_LEVELS, GridFileError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotview",
        description="Render iso-line contours from a grid file.")
    parser.add_argument("grid", help="path to a grid file (e.g. psi.dat)")
    parser.add_argument("-o", "--output", default=None,
                        help="image path (default: grid path with .png)")
    parser.add_argument("--levels", type=int, default=DEFAULT_LEVELS,
                        help=f"number of contour levels "
                             f"(default {DEFAULT_LEVELS})")
    parser.add_argument("--no-boundaries", action="store_true",
                        help="skip the boundary outline overlay")
    args = parser.parse_args(argv)
    if args.levels < 1:
        parser.error("--levels must be positive")
    try:
        render(args.grid, args.output, levels=args.levels,
               overlay_boundaries=not args.no_boundaries)
    except GridFileError as exc:
        print(f"plotview: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
