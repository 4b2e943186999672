"""Command-line entry point for the inference adapter.

Exit codes: 0 full export, 1 store written but incomplete, 2 usage or
model-load failure.
"""

import argparse
import logging
import sys

from . import __version__
from .export import POLARITIES, export_store
from .models import ModelLoadError, available_models


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depth-adapter",
        description="Export monocular depth predictions as a PFM store",
    )
    parser.add_argument("--version", action="version", version=f"depth-adapter {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="run a model over images and write a store")
    p.add_argument("--model", required=True, help="model id (see the models command)")
    p.add_argument("--images", default=None, help="directory of PNG inputs")
    p.add_argument("--manifest", default=None, help="benchmark JSON to enumerate ids")
    p.add_argument("--out", required=True, help="output store directory")
    p.add_argument("--polarity", required=True, choices=POLARITIES)
    p.add_argument("--seed", type=int, default=0, help="pinned seed, recorded in store.json")

    sub.add_parser("models", help="list available model ids")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "models":
        for name in available_models():
            print(name)
        return 0
    if args.images is None and args.manifest is None:
        print("error: provide --images or --manifest", file=sys.stderr)
        return 2
    try:
        result = export_store(
            args.model,
            args.images,
            args.out,
            args.polarity,
            manifest=args.manifest,
            seed=args.seed,
        )
    except (ModelLoadError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for sample_id, message in sorted(result.failures.items()):
        print(f"failed: {sample_id}: {message}", file=sys.stderr)
    return 0 if result.complete else 1


if __name__ == "__main__":
    sys.exit(main())
