"""Depth prediction storage and ordinal point sampling.

Predictions are 2-D float32 fields with a declared polarity: disparity
style output grows toward the camera (larger is closer), metric style
grows away (larger is farther). Two on-disk raster formats are
supported: grayscale PFM and 16-bit grayscale PNG (scaled to [0, 1]).

A prediction store is a directory of per-sample rasters plus a
``store.json`` declaring the polarity and the id-to-filename rule.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    BoundsError,
    FormatError,
    MissingPrediction,
    NonFiniteDepth,
    SchemaError,
)

ID_PLACEHOLDER = "<sample_id>"
DEFAULT_NAMING = ID_PLACEHOLDER + ".pfm"


class Polarity(enum.Enum):
    """Which direction of the scalar field means 'near'."""

    LARGER_IS_CLOSER = "larger_is_closer"
    LARGER_IS_FARTHER = "larger_is_farther"

    def flipped(self) -> "Polarity":
        if self is Polarity.LARGER_IS_CLOSER:
            return Polarity.LARGER_IS_FARTHER
        return Polarity.LARGER_IS_CLOSER


class Ordering(enum.Enum):
    """Predicted relative depth of a point pair. Ties never match a label."""

    P1_NEAR = "p1_near"
    P2_NEAR = "p2_near"
    TIE = "tie"


@dataclass
class DepthPrediction:
    """A single depth field with its polarity and provenance tag."""

    field: np.ndarray
    polarity: Polarity
    source_tag: str = ""

    def __post_init__(self):
        arr = np.asarray(self.field, dtype=np.float32)
        if arr.ndim != 2:
            raise FormatError(f"depth field must be 2-D, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFiniteDepth("depth field contains NaN or Inf")
        self.field = arr


def _next_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n and buf[pos : pos + 1].isspace():
        pos += 1
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise FormatError("truncated PFM header")
    return buf[start:pos], pos


def read_pfm(path) -> np.ndarray:
    """Read a grayscale PFM into a top-down float32 array.

    PFM scanlines are stored bottom-up; the sign of the scale field
    encodes endianness (negative means little-endian).
    """
    buf = Path(path).read_bytes()
    magic, pos = _next_token(buf, 0)
    if magic == b"PF":
        raise FormatError(f"{path}: color PFM not supported, expected grayscale 'Pf'")
    if magic != b"Pf":
        raise FormatError(f"{path}: not a PFM file (magic {magic!r})")
    wtok, pos = _next_token(buf, pos)
    htok, pos = _next_token(buf, pos)
    stok, pos = _next_token(buf, pos)
    try:
        width, height = int(wtok), int(htok)
        scale = float(stok)
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PFM header") from exc
    if width < 1 or height < 1:
        raise FormatError(f"{path}: bad PFM dimensions {width}x{height}")
    if scale == 0.0:
        raise FormatError(f"{path}: PFM scale must be nonzero")
    pos += 1  # exactly one whitespace byte separates header and data
    expected = width * height * 4
    data = buf[pos:]
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} data bytes, found {len(data)}")
    dtype = "<f4" if scale < 0 else ">f4"
    rows = np.frombuffer(data, dtype=dtype).reshape(height, width)
    out = np.flipud(rows).astype(np.float32)
    if not np.isfinite(out).all():
        raise NonFiniteDepth(f"{path}: depth raster contains NaN or Inf")
    return out


def write_pfm(path, field: np.ndarray) -> None:
    """Write a 2-D float32 field as little-endian grayscale PFM."""
    arr = np.asarray(field, dtype=np.float32)
    if arr.ndim != 2:
        raise FormatError(f"PFM writer needs a 2-D field, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteDepth("refusing to write NaN/Inf depth")
    h, w = arr.shape
    header = f"Pf\n{w} {h}\n-1.0\n".encode("ascii")
    body = np.flipud(arr).astype("<f4").tobytes()
    Path(path).write_bytes(header + body)


def read_depth_png(path) -> np.ndarray:
    """Read a 16-bit grayscale PNG, scaled to [0, 1] by /65535."""
    with Image.open(path) as im:
        if im.mode not in ("I", "I;16"):
            raise FormatError(f"{path}: expected 16-bit grayscale PNG, got mode {im.mode}")
        raw = np.asarray(im, dtype=np.int64)
    if raw.min() < 0 or raw.max() > 65535:
        raise FormatError(f"{path}: sample values outside 16-bit range")
    return (raw / 65535.0).astype(np.float32)


def _read_raster(path: Path) -> np.ndarray:
    suffix = path.suffix.lower()
    if suffix == ".pfm":
        return read_pfm(path)
    if suffix == ".png":
        return read_depth_png(path)
    raise FormatError(f"{path}: unsupported depth raster format {suffix!r}")


@dataclass
class PredictionStore:
    """Directory-backed store: one raster per sample id, read-only."""

    root: Path
    polarity: Polarity
    naming: str = DEFAULT_NAMING
    source_tag: str = ""
    metadata: dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        self.root = Path(self.root)
        if ID_PLACEHOLDER not in self.naming:
            raise SchemaError(f"naming rule must contain {ID_PLACEHOLDER!r}: {self.naming!r}")

    @classmethod
    def open(cls, root) -> "PredictionStore":
        root = Path(root)
        meta_path = root / "store.json"
        if not meta_path.is_file():
            raise FormatError(f"{root}: no store.json; not a prediction store")
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{meta_path}: invalid JSON") from exc
        if not isinstance(meta, dict) or "polarity" not in meta:
            raise SchemaError(f"{meta_path}: missing 'polarity'")
        try:
            polarity = Polarity(meta["polarity"])
        except ValueError as exc:
            raise SchemaError(f"{meta_path}: unknown polarity {meta['polarity']!r}") from exc
        naming = meta.get("naming", DEFAULT_NAMING)
        if not isinstance(naming, str):
            raise SchemaError(f"{meta_path}: 'naming' must be a string")
        tag = meta.get("model", "")
        return cls(root=root, polarity=polarity, naming=naming, source_tag=tag, metadata=meta)

    def write_metadata(self, extra: dict | None = None) -> None:
        meta = {"polarity": self.polarity.value, "naming": self.naming}
        meta.update(self.metadata)
        if extra:
            meta.update(extra)
        meta["polarity"] = self.polarity.value
        meta["naming"] = self.naming
        self.root.mkdir(parents=True, exist_ok=True)
        text = json.dumps(meta, indent=2, sort_keys=True) + "\n"
        (self.root / "store.json").write_text(text, encoding="utf-8")

    def path_for(self, sample_id: str) -> Path:
        return self.root / self.naming.replace(ID_PLACEHOLDER, sample_id)

    def load(self, sample_id: str) -> DepthPrediction:
        path = self.path_for(sample_id)
        if not path.is_file():
            raise MissingPrediction(sample_id)
        return DepthPrediction(_read_raster(path), self.polarity, self.source_tag)

    def save(self, sample_id: str, field: np.ndarray) -> None:
        path = self.path_for(sample_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_pfm(path, field)

    def missing(self, sample_ids) -> list:
        return [sid for sid in sample_ids if not self.path_for(sid).is_file()]


class InMemoryStore:
    """Dict-backed store with the same access contract; for tests and glue."""

    def __init__(self, polarity: Polarity, fields: dict | None = None, source_tag: str = ""):
        self.polarity = polarity
        self.source_tag = source_tag
        self._fields = dict(fields or {})

    def put(self, sample_id: str, field: np.ndarray) -> None:
        self._fields[sample_id] = np.asarray(field, dtype=np.float32)

    def load(self, sample_id: str) -> DepthPrediction:
        if sample_id not in self._fields:
            raise MissingPrediction(sample_id)
        return DepthPrediction(self._fields[sample_id], self.polarity, self.source_tag)

    def missing(self, sample_ids) -> list:
        return [sid for sid in sample_ids if sid not in self._fields]


def load_depth(store, sample_id: str) -> DepthPrediction:
    """Fetch one prediction from any store object."""
    return store.load(sample_id)


def sample_ordering(pred: DepthPrediction, p1, p2, window: int = 1) -> Ordering:
    """Compare depth at two (x, y) pixels under the field's polarity.

    Point lookups are single-pixel by default; ``window`` > 1 takes the
    median over a window x window neighborhood clamped to the image
    bounds, for noisy rasters. Exact equality of the two sampled values
    is a Tie.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be an odd positive integer, got {window}")
    h, w = pred.field.shape
    values = []
    for x, y in (p1, p2):
        if not (0 <= x < w and 0 <= y < h):
            raise BoundsError(f"point ({x}, {y}) outside {w}x{h} field")
        if window == 1:
            values.append(float(pred.field[y, x]))
        else:
            r = window // 2
            patch = pred.field[max(0, y - r) : y + r + 1, max(0, x - r) : x + r + 1]
            values.append(float(np.median(patch)))
    v1, v2 = values
    if v1 == v2:
        return Ordering.TIE
    if pred.polarity is Polarity.LARGER_IS_CLOSER:
        return Ordering.P1_NEAR if v1 > v2 else Ordering.P2_NEAR
    return Ordering.P1_NEAR if v1 < v2 else Ordering.P2_NEAR
