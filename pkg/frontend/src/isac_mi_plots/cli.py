"""Console entry points: plot-region <csv...> -o <png>, plot-curves <csv> -o <png>."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, PlotInputError, render_curves, render_region


def main_region(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-region",
        description="Overlay rate regions from one or more region CSVs.",
    )
    parser.add_argument("csvs", nargs="+", help="region_<kind>_<mode>.csv files")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        path = render_region(FigureSpec(inputs=tuple(args.csvs), kind="region", output=args.output))
    except PlotInputError as exc:
        print(f"plot-region: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


def main_curves(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-curves",
        description="Two-panel rate-versus-power figure from a curves CSV.",
    )
    parser.add_argument("csv", help="curves_<kind>.csv file")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        path = render_curves(FigureSpec(inputs=(args.csv,), kind="curves", output=args.output))
    except PlotInputError as exc:
        print(f"plot-curves: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main_region())
