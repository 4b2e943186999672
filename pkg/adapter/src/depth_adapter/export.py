"""Batch export of model predictions into a prediction store."""

import json
import logging
import os
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np
from PIL import Image

from .models import load_model
from .pfm import write_pfm

log = logging.getLogger("depth_adapter")

POLARITIES = ("larger_is_closer", "larger_is_farther")


@dataclass
class ExportResult:
    out_dir: Path
    written: list = dataclass_field(default_factory=list)
    failures: dict = dataclass_field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return not self.failures


def _atomic_write_bytes(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def _atomic_write_pfm(path: Path, field: np.ndarray) -> None:
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    write_pfm(tmp, field)
    os.replace(tmp, path)


def _enumerate_images(image_dir: Path, manifest: Path | None) -> list:
    """(sample_id, image_path) pairs, sorted by id."""
    if manifest is not None:
        doc = json.loads(Path(manifest).read_text(encoding="utf-8"))
        base = Path(manifest).parent
        pairs = [(s["id"], base / s["image"]) for s in doc["samples"]]
    else:
        image_dir = Path(image_dir)
        if not image_dir.is_dir():
            raise FileNotFoundError(f"image directory not found: {image_dir}")
        pairs = [(p.stem, p) for p in sorted(image_dir.glob("*.png"))]
    seen = set()
    for sample_id, _ in pairs:
        if sample_id in seen:
            raise ValueError(f"duplicate sample id {sample_id!r}")
        seen.add(sample_id)
    return sorted(pairs)


def _resize_bilinear(field: np.ndarray, width: int, height: int) -> np.ndarray:
    if field.shape == (height, width):
        return field.astype(np.float32)
    img = Image.fromarray(field.astype(np.float32), mode="F")
    return np.asarray(img.resize((width, height), Image.BILINEAR), np.float32)


def export_store(
    model_id: str,
    image_dir,
    out_dir,
    polarity: str,
    manifest=None,
    seed: int = 0,
) -> ExportResult:
    """Predict depth for every image and write a store directory.

    One PFM per sample at the input image's resolution (model output is
    resized bilinearly; annotations never move). store.json is written
    last, so interrupted exports leave no readable store. Per-image
    failures are logged, collected, and flagged in store.json.
    """
    if polarity not in POLARITIES:
        raise ValueError(f"polarity must be one of {POLARITIES}, got {polarity!r}")
    predict = load_model(model_id, seed)
    pairs = _enumerate_images(image_dir, manifest)
    out_root = Path(out_dir)
    out_root.mkdir(parents=True, exist_ok=True)

    result = ExportResult(out_root)
    for sample_id, image_path in pairs:
        try:
            with Image.open(image_path) as img:
                image = np.asarray(img.convert("RGB"))
            height, width = image.shape[:2]
            field = np.asarray(predict(image, seed), np.float32)
            if field.ndim != 2:
                raise ValueError(f"model output must be 2-D, got shape {field.shape}")
            field = _resize_bilinear(field, width, height)
            if not np.isfinite(field).all():
                raise ValueError("model output contains non-finite values")
            _atomic_write_pfm(out_root / f"{sample_id}.pfm", field)
            result.written.append(sample_id)
        except Exception as exc:
            log.warning("sample %s failed: %s", sample_id, exc)
            result.failures[sample_id] = str(exc)

    meta = {
        "polarity": polarity,
        "naming": "<sample_id>.pfm",
        "model": model_id,
        "seed": seed,
        "precision": "float32",
    }
    if result.failures:
        meta["incomplete"] = True
        meta["failures"] = result.failures
    payload = json.dumps(meta, indent=2, sort_keys=True) + "\n"
    _atomic_write_bytes(out_root / "store.json", payload.encode("utf-8"))
    log.info(
        "exported %d/%d predictions to %s", len(result.written), len(pairs), out_root
    )
    return result
