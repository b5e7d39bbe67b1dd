"""Command-line figure rendering from sweep/trajectory CSV files."""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, render

_KIND_FLAGS = {"dim-sweep": "dim_sweep", "err-sweep": "err_sweep", "kl-trace": "kl_trace"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="figures", description=__doc__)
    parser.add_argument("--kind", required=True, choices=sorted(_KIND_FLAGS))
    parser.add_argument("--in", dest="input_csv", required=True, help="input CSV path")
    parser.add_argument("--out", dest="output", required=True, help="output image path")
    parser.add_argument("--log-x", choices=("auto", "on", "off"), default="auto")
    parser.add_argument("--log-y", choices=("auto", "on", "off"), default="auto")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(input_csv=args.input_csv, kind=_KIND_FLAGS[args.kind], output=args.output)
    if args.log_x != "auto" or args.log_y != "auto":
        base = spec.axes
        log_x = base[0] if args.log_x == "auto" else args.log_x == "on"
        log_y = base[1] if args.log_y == "auto" else args.log_y == "on"
        spec = FigureSpec(args.input_csv, spec.kind, args.output, (log_x, log_y))
    out = render(spec)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
