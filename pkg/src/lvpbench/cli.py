"""Command-line entry point.

Subcommands: transform (write Laplacian prompt images), eval
(single-store SRA / layer preference), eval-ml (two-store ML-SRA with
hypothesis assignment), stats (ambiguous-region statistics), baseline
interp (boundary interpolation of masked regions), report (pivot tables
across tagged run reports).

Exit codes: 0 success, 2 validation error, 3 missing data, 4 internal
error. All relative paths resolve against --root. LVP_LOG sets
verbosity (debug/info/warning/error). Outputs carry no timestamps and
embed a config hash that excludes --jobs, so reruns and different
worker counts produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import harmonic_fill, mask_iou
from .benchmark import (
    SingleLayerManifest,
    ambiguity_ratio,
    histogram,
    load_manifest,
    spatial_heatmap,
)
from .depthio import PredictionStore, sample_ordering
from .errors import (
    FormatError,
    MissingData,
    TagMissing,
    ToolkitError,
    ValidationFailure,
)
from .hypotheses import assign_by_alpha, calibration_split, combine, fixed_assignment
from .metrics import (
    format_percent,
    predicted_orderings,
    evaluate_single_store,
    report_to_dict,
    reports_to_csv,
    reports_to_markdown,
)
from .raster import read_png, write_png
from .spectral import ClampMode, LaplacianVariant, transform_image

log = logging.getLogger("lvpbench")

TOOL_INFO = {"name": "lvpbench", "version": __version__}


def _configure_logging() -> None:
    levels = {
        "debug": logging.DEBUG,
        "info": logging.INFO,
        "warning": logging.WARNING,
        "error": logging.ERROR,
    }
    name = os.environ.get("LVP_LOG", "warning").strip().lower()
    logging.basicConfig(
        level=levels.get(name, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _resolve(root: Path, path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() else root / p


def _config_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _dump_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _parallel(fn, items, jobs: int) -> list:
    """Map fn over items, returning results (or exceptions) in input order."""
    if jobs <= 1 or len(items) <= 1:
        out = []
        for item in items:
            try:
                out.append(fn(item))
            except Exception as exc:  # collected, not raised: callers decide
                out.append(exc)
        return out
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, item) for item in items]
        out = []
        for future in futures:
            try:
                out.append(future.result())
            except Exception as exc:
                out.append(exc)
        return out


def _raise_first_error(results) -> None:
    for item in results:
        if isinstance(item, Exception):
            raise item


def _tags(args) -> dict:
    return {"model": args.model_tag, "size": args.size_tag, "modality": args.modality_tag}


def _store_info(path_arg: str, store: PredictionStore) -> dict:
    return {
        "path": path_arg,
        "polarity": store.polarity.value,
        "source_tag": store.source_tag,
    }


def _parallel_orderings(manifest, store, window: int, jobs: int) -> dict:
    """predicted_orderings with a worker pool and deterministic merge."""
    missing = store.missing(manifest.ids)
    if missing:
        predicted_orderings(manifest, store, window)  # raises with the id list
    samples = sorted(manifest.samples, key=lambda s: s.id)

    def one(sample):
        pred = store.load(sample.id)
        return sample.id, sample_ordering(pred, sample.p1, sample.p2, window)

    results = _parallel(one, samples, jobs)
    _raise_first_error(results)
    return dict(results)


# --- transform ---


def cmd_transform(args, root: Path) -> int:
    out_dir = _resolve(root, args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    variant = LaplacianVariant(args.variant)
    clamp = ClampMode(args.clamp)

    def one(name: str):
        src = _resolve(root, name)
        if not src.is_file():
            raise MissingData(f"input not found: {src}")
        if src.suffix.lower() != ".png":
            raise FormatError(f"{src}: only PNG inputs are supported")
        image = read_png(src)
        if image.dtype != np.uint8:
            raise FormatError(f"{src}: expected an 8-bit PNG")
        prompt = transform_image(image, variant, clamp)
        write_png(out_dir / src.name, prompt)
        sidecar = {
            "tool": TOOL_INFO,
            "source": name,
            "output": src.name,
            "variant": variant.value,
            "clamp": clamp.value,
            "padding": "replicate",
        }
        _dump_json(out_dir / (src.stem + ".json"), sidecar)
        return src.name

    results = _parallel(one, args.inputs, args.jobs)
    failures = [
        (name, exc) for name, exc in zip(args.inputs, results) if isinstance(exc, Exception)
    ]
    for name, exc in failures:
        print(f"{name}: {exc}", file=sys.stderr)
    if not failures:
        log.info("transformed %d image(s) into %s", len(args.inputs), out_dir)
        return 0
    if any(isinstance(exc, ValidationFailure) for _, exc in failures):
        return 2
    if all(isinstance(exc, MissingData) for _, exc in failures):
        return 3
    return 4


# --- eval / eval-ml ---


def cmd_eval(args, root: Path) -> int:
    manifest = load_manifest(
        _resolve(root, args.manifest), validate_rasters=not args.skip_raster_checks
    )
    store = PredictionStore.open(_resolve(root, args.store))
    orderings = _parallel_orderings(manifest, store, args.window, args.jobs)
    reports = evaluate_single_store(manifest, orderings)

    config = {
        "command": "eval",
        "manifest": args.manifest,
        "store": args.store,
        "window": args.window,
        "tags": _tags(args),
    }
    doc = {
        "tool": TOOL_INFO,
        "config_hash": _config_hash(config),
        "command": "eval",
        "tags": _tags(args),
        "manifest": {
            "path": args.manifest,
            "schema_version": manifest.schema_version,
            "n": len(manifest.samples),
        },
        "store": _store_info(args.store, store),
        "window": args.window,
        "subsets": {name: report_to_dict(r) for name, r in reports.items()},
    }
    out_dir = _resolve(root, args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "eval.csv").write_text(reports_to_csv(reports), encoding="utf-8")
    (out_dir / "eval.md").write_text(reports_to_markdown(reports), encoding="utf-8")
    _dump_json(out_dir / "eval.json", doc)
    log.info("wrote eval reports to %s", out_dir)
    return 0


def cmd_eval_ml(args, root: Path) -> int:
    manifest = load_manifest(
        _resolve(root, args.manifest), validate_rasters=not args.skip_raster_checks
    )
    if isinstance(manifest, SingleLayerManifest):
        raise ValidationFailure("eval-ml needs a two-layer manifest")
    rgb_store = PredictionStore.open(_resolve(root, args.rgb_store))
    lvp_store = PredictionStore.open(_resolve(root, args.lvp_store))
    rgb_ord = _parallel_orderings(manifest, rgb_store, args.window, args.jobs)
    lvp_ord = _parallel_orderings(manifest, lvp_store, args.window, args.jobs)

    if args.assign == "alpha":
        calib, eval_manifest = calibration_split(manifest, args.calib_split)
        assignment = assign_by_alpha(calib, rgb_ord, lvp_ord, args.window)
    else:
        eval_manifest = manifest
        assignment = fixed_assignment(rgb_first=args.assign == "rgb-first")
    result = combine(eval_manifest, assignment, rgb_ord, lvp_ord, args.window)

    config = {
        "command": "eval-ml",
        "manifest": args.manifest,
        "rgb_store": args.rgb_store,
        "lvp_store": args.lvp_store,
        "window": args.window,
        "assign": args.assign,
        "calib_split": args.calib_split,
        "tags": _tags(args),
    }
    doc = {
        "tool": TOOL_INFO,
        "config_hash": _config_hash(config),
        "command": "eval-ml",
        "tags": _tags(args),
        "manifest": {
            "path": args.manifest,
            "schema_version": manifest.schema_version,
            "n": len(manifest.samples),
            "n_evaluated": len(eval_manifest.samples),
        },
        "stores": {
            "rgb": _store_info(args.rgb_store, rgb_store),
            "lvp": _store_info(args.lvp_store, lvp_store),
        },
        "window": args.window,
        "assignment": assignment.to_dict(),
        "calibration": {
            "fraction": args.calib_split,
            "mode": "full_manifest" if args.calib_split == 1.0 else "held_out",
        },
        "subsets": {name: report_to_dict(r) for name, r in result.reports.items()},
    }
    out_dir = _resolve(root, args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "eval_ml.csv").write_text(reports_to_csv(result.reports), encoding="utf-8")
    (out_dir / "eval_ml.md").write_text(reports_to_markdown(result.reports), encoding="utf-8")
    _dump_json(out_dir / "eval_ml.json", doc)
    log.info("wrote eval-ml reports to %s", out_dir)
    return 0


# --- stats ---


def cmd_stats(args, root: Path) -> int:
    manifest = load_manifest(_resolve(root, args.manifest))
    samples = sorted(manifest.samples, key=lambda s: s.id)
    for sample in samples:
        if sample.mask_path is None:
            raise MissingData(f"sample {sample.id!r} has no mask; stats need masks")

    def one(sample):
        return read_png(Path(manifest.root) / sample.mask_path)

    masks = _parallel(one, samples, args.jobs)
    _raise_first_error(masks)
    ratios = [ambiguity_ratio(mask) for mask in masks]
    rows = histogram(ratios, args.bins)
    heat = spatial_heatmap(masks, args.grid)

    out_dir = _resolve(root, args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    hist_lines = ["bin_lo,bin_hi,count"]
    hist_lines += [f"{lo},{hi},{count}" for lo, hi, count in rows]
    (out_dir / "histogram.csv").write_text("\n".join(hist_lines) + "\n", encoding="utf-8")
    heat_lines = [",".join(f"{v:.10g}" for v in row) for row in heat]
    (out_dir / "heatmap.csv").write_text("\n".join(heat_lines) + "\n", encoding="utf-8")
    log.info("wrote stats to %s", out_dir)
    return 0


# --- baseline interp ---


def cmd_baseline_interp(args, root: Path) -> int:
    manifest = load_manifest(_resolve(root, args.manifest))
    store = PredictionStore.open(_resolve(root, args.store))
    out_root = _resolve(root, args.out_store)
    out_store = PredictionStore(out_root, store.polarity)
    out_store.write_metadata({"method": "harmonic_fill", "derived_from": args.store})
    mask_dir = _resolve(root, args.mask_dir) if args.mask_dir else None
    samples = sorted(manifest.samples, key=lambda s: s.id)

    def one(sample):
        pred = store.load(sample.id)
        if mask_dir is not None:
            mask_path = mask_dir / f"{sample.id}.png"
            if not mask_path.is_file():
                raise MissingData(f"mask not found: {mask_path}")
            mask = read_png(mask_path)
        else:
            if sample.mask_path is None:
                raise MissingData(f"sample {sample.id!r} has no mask")
            mask = read_png(Path(manifest.root) / sample.mask_path)
        result = harmonic_fill(pred, mask, args.tol, args.max_iters)
        out_store.save(sample.id, result.prediction.field)
        entry = {
            "converged": result.converged,
            "iterations": result.iterations,
            "max_update": result.max_update,
            "unfilled_components": result.unfilled_components,
        }
        if mask_dir is not None and sample.mask_path is not None:
            gt = read_png(Path(manifest.root) / sample.mask_path)
            entry["iou_vs_manifest_mask"] = mask_iou(mask, gt)
        return sample.id, entry

    results = _parallel(one, samples, args.jobs)
    _raise_first_error(results)
    entries = dict(results)
    ious = [e["iou_vs_manifest_mask"] for e in entries.values() if "iou_vs_manifest_mask" in e]
    config = {
        "command": "baseline-interp",
        "manifest": args.manifest,
        "store": args.store,
        "out_store": args.out_store,
        "mask_dir": args.mask_dir,
        "tol": repr(args.tol),
        "max_iters": args.max_iters,
    }
    summary = {
        "tool": TOOL_INFO,
        "config_hash": _config_hash(config),
        "command": "baseline-interp",
        "store": _store_info(args.store, store),
        "tol": args.tol,
        "max_iters": args.max_iters,
        "all_converged": all(e["converged"] for e in entries.values()),
        "samples": entries,
    }
    if ious:
        summary["mean_iou"] = sum(ious) / len(ious)
    _dump_json(out_root / "interp.json", summary)
    log.info("wrote interpolated store to %s", out_root)
    return 0


# --- report ---


def _require_tag(tags: dict, key: str, source: str) -> str:
    value = tags.get(key)
    if not isinstance(value, str) or not value:
        raise TagMissing(f"{source}: report lacks tag {key!r}")
    return value


def _pivot_csv(row_label: str, sizes: list, rows: list) -> str:
    lines = [",".join([row_label] + sizes)]
    for label, cells in rows:
        lines.append(",".join([label] + cells))
    return "\n".join(lines) + "\n"


def _pivot_md(row_label: str, sizes: list, rows: list) -> str:
    lines = [
        "| " + " | ".join([row_label] + sizes) + " |",
        "|" + "|".join(["---"] * (len(sizes) + 1)) + "|",
    ]
    for label, cells in rows:
        lines.append("| " + " | ".join([label] + cells) + " |")
    return "\n".join(lines) + "\n"


def cmd_report(args, root: Path) -> int:
    docs = []
    for name in args.reports:
        path = _resolve(root, name)
        if not path.is_file():
            raise MissingData(f"report not found: {path}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        tags = doc.get("tags", {})
        model = _require_tag(tags, "model", name)
        size = _require_tag(tags, "size", name)
        modality = _require_tag(tags, "modality", name)
        docs.append((model, size, modality, doc))

    sizes: list = []
    combos: list = []
    models: list = []
    for model, size, modality, _ in docs:
        if size not in sizes:
            sizes.append(size)
        if (model, modality) not in combos:
            combos.append((model, modality))
        if model not in models:
            models.append(model)

    def subset_value(doc, metric):
        subsets = doc.get("subsets", {})
        data = subsets.get(args.subset)
        if data is None:
            return None
        return data.get(metric)

    def metric_rows(metric) -> list:
        rows = []
        for model, modality in combos:
            cells = []
            for size in sizes:
                value = None
                for m, s, mod, doc in docs:
                    if (m, s, mod) == (model, size, modality):
                        value = subset_value(doc, metric)
                        break
                cells.append(format_percent(value))
            rows.append((f"{model}/{modality}", cells))
        return rows

    def gap_rows() -> list:
        rows = []
        for model in models:
            cells = []
            for size in sizes:
                rgb = lvp = None
                for m, s, mod, doc in docs:
                    if (m, s) != (model, size):
                        continue
                    value = subset_value(doc, "sra1")
                    if mod == "rgb":
                        rgb = value
                    elif mod == "lvp":
                        lvp = value
                if rgb is None or lvp is None:
                    cells.append("")
                else:
                    cells.append(format_percent(rgb - lvp))
            rows.append((model, cells))
        return rows

    out_dir = _resolve(root, args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    tables = {
        "alpha_by_scale": ("model/modality", metric_rows("alpha")),
        "ml_sra_by_scale": ("model/modality", metric_rows("ml_sra")),
        "sra_gap_by_scale": ("model", gap_rows()),
    }
    for name, (row_label, rows) in tables.items():
        (out_dir / f"{name}.csv").write_text(
            _pivot_csv(row_label, sizes, rows), encoding="utf-8"
        )
        (out_dir / f"{name}.md").write_text(
            _pivot_md(row_label, sizes, rows), encoding="utf-8"
        )
    log.info("wrote pivot tables to %s", out_dir)
    return 0


# --- parser / entry point ---


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lvpbench",
        description="Laplacian visual prompting benchmark toolkit",
    )
    parser.add_argument("--root", default=".", help="base directory for relative paths")
    parser.add_argument(
        "--jobs",
        type=int,
        default=os.cpu_count() or 1,
        help="worker count (default: logical cores); results do not depend on it",
    )
    parser.add_argument("--version", action="version", version=f"lvpbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="write Laplacian prompt images")
    p.add_argument("inputs", nargs="+", help="input PNG file(s)")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument(
        "--variant",
        default="lvp",
        choices=[v.value for v in LaplacianVariant],
        help="lvp: 4-neighbor; lvp2: 8-neighbor; lvpr: reversed; lvpg: grayscale",
    )
    p.add_argument(
        "--clamp",
        default="saturate",
        choices=[c.value for c in ClampMode],
        help="saturate: round+clamp to [0,255]; normabs: |v| rescaled to peak 255",
    )
    p.set_defaults(func=cmd_transform)

    def eval_common(p):
        p.add_argument("--manifest", required=True, help="benchmark manifest JSON")
        p.add_argument("-o", "--out", required=True, help="output directory")
        p.add_argument("--window", type=int, default=1, help="odd median window (default 1)")
        p.add_argument("--model-tag", default="", help="model family tag for report pivots")
        p.add_argument("--size-tag", default="", help="model size tag (e.g. S/B/L)")
        p.add_argument("--modality-tag", default="", help="input modality tag (rgb/lvp)")
        p.add_argument(
            "--skip-raster-checks",
            action="store_true",
            help="skip image/mask validation (label-only workflows)",
        )

    p = sub.add_parser("eval", help="score one prediction store (SRA, alpha)")
    eval_common(p)
    p.add_argument("--store", required=True, help="prediction store directory")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("eval-ml", help="score an RGB+LVP store pair (ML-SRA)")
    eval_common(p)
    p.add_argument("--rgb-store", required=True, help="RGB-input prediction store")
    p.add_argument("--lvp-store", required=True, help="Laplacian-input prediction store")
    p.add_argument(
        "--assign",
        default="alpha",
        choices=["alpha", "rgb-first", "lvp-first"],
        help="layer assignment: calibrated by alpha sign, or fixed",
    )
    p.add_argument(
        "--calib-split",
        type=float,
        default=1.0,
        help="calibration fraction; 1.0 calibrates and evaluates on the full manifest",
    )
    p.set_defaults(func=cmd_eval_ml)

    p = sub.add_parser("stats", help="ambiguous-region histogram and heatmap")
    p.add_argument("--manifest", required=True)
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--bins", type=int, default=20, help="histogram bin count")
    p.add_argument("--grid", type=int, default=16, help="heatmap grid size")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("baseline", help="mask-guided baselines")
    baseline_sub = p.add_subparsers(dest="baseline_command", required=True)
    q = baseline_sub.add_parser(
        "interp", help="fill masked regions by boundary interpolation"
    )
    q.add_argument("--manifest", required=True)
    q.add_argument("--store", required=True, help="input prediction store")
    q.add_argument("--out-store", required=True, help="output store directory")
    q.add_argument(
        "--mask-dir",
        default=None,
        help="use <sample_id>.png masks from this directory instead of manifest masks",
    )
    q.add_argument("--tol", type=float, default=None, help="convergence tolerance")
    q.add_argument("--max-iters", type=int, default=10000)
    q.set_defaults(func=cmd_baseline_interp)

    p = sub.add_parser("report", help="pivot tables across tagged report JSONs")
    p.add_argument("reports", nargs="+", help="eval/eval-ml JSON files")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument(
        "--subset",
        default="overall",
        choices=["overall", "same", "reverse"],
        help="which subset's numbers to pivot",
    )
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    root = Path(args.root)
    try:
        return args.func(args, root)
    except ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MissingData as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:
        log.debug("internal error", exc_info=True)
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
