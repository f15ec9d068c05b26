"""Command line: render figure analogues from scenario output directories."""

import argparse
import sys

from .plots import FIGURES, SchemaError, figure_spec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skinchain-plots")
    subs = parser.add_subparsers(dest="command", required=True)
    sub = subs.add_parser("render", help="render one figure (or all) from CSVs")
    sub.add_argument("--figure", required=True,
                     choices=sorted(FIGURES) + ["all"])
    sub.add_argument("--data", required=True,
                     help="directory holding the scenario CSVs")
    sub.add_argument("--out", required=True, help="directory for PNG output")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    figures = sorted(FIGURES) if args.figure == "all" else [args.figure]
    try:
        for fig in figures:
            path = render(figure_spec(fig, args.data, args.out))
            print(f"wrote {path}")
    except (SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
