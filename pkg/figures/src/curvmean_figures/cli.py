"""Figure generation script over the experiment CSVs.

Usage::

    curvmean-figures CSV [CSV ...] --kind modulation-panel --out fig.svg
    curvmean-figures profile.csv --kind variance-profile --out fig.svg
    curvmean-figures --kind archetypal --out fig.svg

Exit codes mirror the experiment CLI: 0 on success, 2 for schema or
configuration problems, 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .csvio import SchemaError
from .plots import (
    build_archetypal,
    build_modulation_panel,
    build_variance_profile,
    save_figure,
)

_KINDS = ("modulation-panel", "variance-profile", "archetypal")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="curvmean-figures",
        description="regenerate the experiment figures from CSV files")
    parser.add_argument("csv", nargs="*", help="input CSV path(s)")
    parser.add_argument("--kind", required=True, choices=_KINDS)
    parser.add_argument("--out", required=True,
                        help="output image (.svg default, .png supported)")
    parser.add_argument("--ymin", type=float)
    parser.add_argument("--ymax", type=float)
    parser.add_argument("--tmin", type=float, default=-10.0,
                        help="lower bound of the archetypal curve domain")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.kind == "modulation-panel":
            if not args.csv:
                raise SchemaError("modulation-panel requires CSV input")
            ylim = None
            if args.ymin is not None and args.ymax is not None:
                ylim = (args.ymin, args.ymax)
            fig = build_modulation_panel(args.csv, ylim=ylim)
        elif args.kind == "variance-profile":
            if not args.csv:
                raise SchemaError("variance-profile requires CSV input")
            fig = build_variance_profile(args.csv)
        else:
            kwargs = {"t_min": args.tmin}
            if args.ymax is not None:
                kwargs["ymax"] = args.ymax
            fig = build_archetypal(**kwargs)
        save_figure(fig, args.out)
    except (SchemaError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ArithmeticError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
