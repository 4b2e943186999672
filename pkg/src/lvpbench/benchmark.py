"""Benchmark manifest loading, validation, and region statistics.

A manifest is a JSON document listing samples: an image, an
ambiguous-region mask, one sparse point pair, and two per-layer ordinal
labels. Labels are strict ("p1_near" / "p2_near"); ties cannot be
expressed. The two-layer labels split the data into the Same subset
(both layers agree) and the Reverse subset (opposite orderings). A
single-layer variant drops "layer2" and makes the mask optional.

Coordinates are integer pixels, x = column, y = row, origin top-left.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    BoundsError,
    DimMismatch,
    DuplicateId,
    MaskMismatch,
    MissingData,
    NonBinaryMask,
    SchemaError,
)
from .raster import as_binary_mask, read_png

SCHEMA_VERSION = "1"


class OrdinalLabel(enum.Enum):
    """Ground-truth relative ordering of a point pair; always strict."""

    P1_NEAR = "p1_near"
    P2_NEAR = "p2_near"

    def swapped(self) -> "OrdinalLabel":
        if self is OrdinalLabel.P1_NEAR:
            return OrdinalLabel.P2_NEAR
        return OrdinalLabel.P1_NEAR


class Subset(enum.Enum):
    OVERALL = "overall"
    SAME = "same"
    REVERSE = "reverse"


@dataclass
class Sample:
    """One annotated point pair. layer2 is None in single-layer manifests."""

    id: str
    image_path: str
    mask_path: str | None
    p1: tuple
    p2: tuple
    layer1: OrdinalLabel
    layer2: OrdinalLabel | None = None

    @property
    def subset(self) -> Subset:
        if self.layer2 is None:
            raise SchemaError(f"sample {self.id!r} has no layer2; subsets are undefined")
        return Subset.SAME if self.layer1 is self.layer2 else Subset.REVERSE


@dataclass
class BenchmarkManifest:
    """Two-layer manifest with the Same/Reverse partition."""

    samples: list
    schema_version: str = SCHEMA_VERSION
    root: Path = Path(".")

    @property
    def ids(self) -> list:
        return [s.id for s in self.samples]

    def subset(self, which: Subset) -> list:
        if which is Subset.OVERALL:
            return list(self.samples)
        return [s for s in self.samples if s.subset is which]

    @property
    def same_samples(self) -> list:
        return self.subset(Subset.SAME)

    @property
    def reverse_samples(self) -> list:
        return self.subset(Subset.REVERSE)


@dataclass
class SingleLayerManifest:
    """One label per sample; masks optional; no subset structure."""

    samples: list
    schema_version: str = SCHEMA_VERSION
    root: Path = Path(".")

    @property
    def ids(self) -> list:
        return [s.id for s in self.samples]


def _want(raw: dict, key: str, kind, where: str):
    if key not in raw:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = raw[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def _parse_point(raw: dict, key: str, where: str) -> tuple:
    value = _want(raw, key, list, where)
    if len(value) != 2 or not all(
        isinstance(c, int) and not isinstance(c, bool) for c in value
    ):
        raise SchemaError(f"{where}: {key!r} must be [x:int, y:int]")
    if value[0] < 0 or value[1] < 0:
        raise BoundsError(f"{where}: {key!r} has negative coordinates {value}")
    return (value[0], value[1])


def _parse_label(raw: dict, key: str, where: str) -> OrdinalLabel:
    value = _want(raw, key, str, where)
    try:
        return OrdinalLabel(value)
    except ValueError as exc:
        raise SchemaError(f"{where}: {key!r} must be 'p1_near' or 'p2_near'") from exc


def _parse_sample(raw, index: int) -> Sample:
    where = f"samples[{index}]"
    if not isinstance(raw, dict):
        raise SchemaError(f"{where}: sample must be an object")
    sid = _want(raw, "id", str, where)
    image = _want(raw, "image", str, where)
    mask = None
    if "mask" in raw:
        mask = _want(raw, "mask", str, where)
    p1 = _parse_point(raw, "p1", where)
    p2 = _parse_point(raw, "p2", where)
    if p1 == p2:
        raise BoundsError(f"{where} ({sid!r}): p1 and p2 must be distinct points")
    layer1 = _parse_label(raw, "layer1", where)
    layer2 = _parse_label(raw, "layer2", where) if "layer2" in raw else None
    return Sample(sid, image, mask, p1, p2, layer1, layer2)


def _image_size(path: Path, cache: dict) -> tuple:
    key = str(path)
    if key not in cache:
        if not path.is_file():
            raise MissingData(f"image not found: {path}")
        with Image.open(path) as im:
            cache[key] = im.size  # (width, height)
    return cache[key]


def _load_mask(path: Path, cache: dict) -> np.ndarray:
    key = str(path)
    if key not in cache:
        if not path.is_file():
            raise MissingData(f"mask not found: {path}")
        cache[key] = as_binary_mask(read_png(path), str(path))
    return cache[key]


def _validate_rasters(sample: Sample, root: Path, size_cache: dict, mask_cache: dict):
    width, height = _image_size(root / sample.image_path, size_cache)
    for name, (x, y) in (("p1", sample.p1), ("p2", sample.p2)):
        if not (0 <= x < width and 0 <= y < height):
            raise BoundsError(
                f"sample {sample.id!r}: {name}=({x}, {y}) outside {width}x{height} image"
            )
    if sample.mask_path is None:
        return
    mask = _load_mask(root / sample.mask_path, mask_cache)
    mh, mw = mask.shape
    if (mw, mh) != (width, height):
        raise DimMismatch(
            f"sample {sample.id!r}: mask is {mw}x{mh} but image is {width}x{height}"
        )
    for name, (x, y) in (("p1", sample.p1), ("p2", sample.p2)):
        if not mask[y, x]:
            raise MaskMismatch(
                f"sample {sample.id!r}: {name}=({x}, {y}) outside the ambiguous-region mask"
            )


def load_manifest(path, validate_rasters: bool = True):
    """Load and validate a manifest JSON file.

    Returns a BenchmarkManifest when every sample carries two layer
    labels, a SingleLayerManifest when none does; mixing is rejected.
    ``validate_rasters=False`` skips the image/mask checks for callers
    that only have the label file.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingData(f"manifest not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be an object")
    version = _want(doc, "schema_version", str, str(path))
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unsupported schema_version {version!r}")
    raw_samples = _want(doc, "samples", list, str(path))

    samples = []
    seen = set()
    for index, raw in enumerate(raw_samples):
        sample = _parse_sample(raw, index)
        if sample.id in seen:
            raise DuplicateId(f"duplicate sample id {sample.id!r}")
        seen.add(sample.id)
        samples.append(sample)

    two_layer = [s.layer2 is not None for s in samples]
    if any(two_layer) and not all(two_layer):
        raise SchemaError(f"{path}: mixes two-layer and single-layer samples")
    is_two_layer = all(two_layer)  # empty manifest defaults to two-layer

    if is_two_layer and any(s.mask_path is None for s in samples):
        raise SchemaError(f"{path}: two-layer samples require a mask")

    root = path.parent
    if validate_rasters:
        size_cache: dict = {}
        mask_cache: dict = {}
        for sample in samples:
            _validate_rasters(sample, root, size_cache, mask_cache)

    if is_two_layer:
        return BenchmarkManifest(samples, version, root)
    return SingleLayerManifest(samples, version, root)


def serialize_manifest(manifest) -> str:
    """Canonical JSON form: fixed key order, 2-space indent, trailing newline."""
    out = []
    for s in manifest.samples:
        entry = {"id": s.id, "image": s.image_path}
        if s.mask_path is not None:
            entry["mask"] = s.mask_path
        entry["p1"] = list(s.p1)
        entry["p2"] = list(s.p2)
        entry["layer1"] = s.layer1.value
        if s.layer2 is not None:
            entry["layer2"] = s.layer2.value
        out.append(entry)
    doc = {"schema_version": manifest.schema_version, "samples": out}
    return json.dumps(doc, indent=2) + "\n"


def ambiguity_ratio(mask: np.ndarray) -> float:
    """Fraction of the image covered by the ambiguous-region mask."""
    binary = as_binary_mask(mask, "ambiguity mask")
    return float(np.count_nonzero(binary)) / binary.size


def _box_average(mask: np.ndarray, grid: int) -> np.ndarray:
    """Resample a binary mask to grid x grid by per-cell averaging.

    Pixel (y, x) belongs to cell (y*G//H, x*G//W). Cells that receive no
    pixels (G larger than a dimension) stay 0.
    """
    h, w = mask.shape
    ys = np.arange(h) * grid // h
    xs = np.arange(w) * grid // w
    cell = ys[:, None] * grid + xs[None, :]
    sums = np.bincount(cell.ravel(), weights=mask.ravel().astype(np.float64), minlength=grid * grid)
    counts = np.bincount(cell.ravel(), minlength=grid * grid)
    avg = np.divide(sums, counts, out=np.zeros(grid * grid), where=counts > 0)
    return avg.reshape(grid, grid)


def spatial_heatmap(masks, grid: int) -> np.ndarray:
    """Accumulate box-averaged masks and normalize so the max cell is 1.

    ``masks`` is an iterable of binary mask rasters. An all-zero
    accumulation is returned as-is (no division by zero).
    """
    if grid < 1:
        raise ValueError(f"grid must be >= 1, got {grid}")
    total = np.zeros((grid, grid), dtype=np.float64)
    for mask in masks:
        binary = as_binary_mask(mask, "heatmap mask")
        total += _box_average(binary, grid)
    peak = total.max()
    return total / peak if peak > 0 else total


def heatmap_for_manifest(manifest, grid: int) -> np.ndarray:
    """spatial_heatmap over every sample mask in a manifest."""

    def iter_masks():
        for sample in manifest.samples:
            if sample.mask_path is None:
                raise MissingData(f"sample {sample.id!r} has no mask")
            yield read_png(Path(manifest.root) / sample.mask_path)

    return spatial_heatmap(iter_masks(), grid)


def histogram(ratios, bins: int) -> list:
    """Equal-width bins over [0, 1]; returns (lo, hi, count) triples.

    Ratio 1.0 lands in the last bin; counts always sum to len(ratios).
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    counts = [0] * bins
    for r in ratios:
        if not 0.0 <= r <= 1.0:
            raise BoundsError(f"ratio {r} outside [0, 1]")
        counts[min(int(r * bins), bins - 1)] += 1
    return [(i / bins, (i + 1) / bins, counts[i]) for i in range(bins)]
