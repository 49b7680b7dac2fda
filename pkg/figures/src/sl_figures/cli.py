"""make-figure: render one figure from a simulation manifest."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .io import SchemaError
from .render import KINDS, FigureJob, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="make-figure",
        description="render a figure from a stationary-light run manifest",
    )
    parser.add_argument("manifest", help="path to manifest.json or its directory")
    parser.add_argument("--kind", choices=KINDS, default="auto")
    parser.add_argument("--out", default="figure.png", help="output image (png/svg/pdf)")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        info = render(
            FigureJob(
                manifest_path=Path(args.manifest),
                kind=args.kind,
                output_path=Path(args.out),
                dpi=args.dpi,
            )
        )
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"{info.kind} -> {info.path}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
