"""Command-line figure regeneration from trajectory CSVs."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, SaturationError, render
from .io import LoadError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Regenerate figures from trajectory CSVs."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("plot", help="render one figure")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="CSV")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--overlay",
        action="append",
        default=[],
        metavar="KIND=PATH",
        help="boundary polyline (KIND in s, d0, dm); repeatable",
    )
    p.add_argument("--u-max", type=float, default=None, help="input bound for guides/assert")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overlays = {}
    for item in args.overlay:
        if "=" not in item:
            print(f"error: overlay '{item}' is not KIND=PATH", file=sys.stderr)
            return 2
        key, path = item.split("=", 1)
        overlays[key] = path
    try:
        spec = FigureSpec(kind=args.kind, inputs=args.inputs, overlays=overlays, u_max=args.u_max)
        out = render(spec, args.out)
    except (LoadError, SaturationError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
