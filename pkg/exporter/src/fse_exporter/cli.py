"""Command-line entry point mirroring ExportConfig."""

from __future__ import annotations

import argparse
import sys

from .export import ExportConfig, ExportError, export


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fse-export",
        description="Export ViT tokens from an image folder to an FSE1 file.",
    )
    parser.add_argument("--model", default="tiny",
                        help="'tiny' (seeded random init) or checkpoint path")
    parser.add_argument("--dataset-dir", required=True,
                        help="directory with one subdirectory per class")
    parser.add_argument("--split", default=".",
                        help="subdirectory of dataset-dir to export")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--kind", choices=("fused", "tokens"), default="fused")
    parser.add_argument("--fusion", choices=("concat", "sum", "cls-only"),
                        default="concat")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--seed", type=int, default=0,
                        help="init seed for the 'tiny' model")
    parser.add_argument("--out", required=True, help="output FSE1 path")
    args = parser.parse_args(argv)
    cfg = ExportConfig(
        model=args.model,
        dataset_dir=args.dataset_dir,
        output=args.out,
        split=args.split,
        batch_size=args.batch_size,
        kind=args.kind,
        fusion=args.fusion,
        device=args.device,
        seed=args.seed,
    )
    try:
        export(cfg)
    except ExportError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
