"""Standalone figure tool: --kind / --in / --out.

Exit codes: 0 success, 2 bad inputs or schema mismatch.
"""

from __future__ import annotations

import argparse
import sys

from .inputs import SchemaError
from .render import KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hullwalk-plots",
        description="Render figures from hullwalk trace/summary files")
    ap.add_argument("--kind", choices=KINDS, required=True)
    ap.add_argument("--in", dest="inputs", action="append", required=True,
                    metavar="PATH", help="input trace/summary (repeatable)")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--k", type=int, default=1,
                    help="memory length for hull/arc windows")
    ap.add_argument("--dpi", type=int, default=120)
    return ap


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    spec = FigureSpec(kind=args.kind, inputs=args.inputs, out=args.out,
                      style={"k": args.k, "dpi": args.dpi})
    try:
        out = render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"figure written to {out}")
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
