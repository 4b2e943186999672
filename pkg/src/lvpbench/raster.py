"""PNG raster I/O and shared validation helpers.

Rasters are plain numpy arrays: (H, W) for single-channel, (H, W, 3) for
RGB. Stored images are uint8 (or uint16 for depth PNGs); intermediate
fields are float32. PNG keeps everything lossless, so prompt images can
be consumed bit-identically by an inference backend.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

from .errors import NonBinaryMask, NonFiniteInput, WrongChannelCount


def read_png(path: str | os.PathLike) -> np.ndarray:
    """Read a PNG into uint8 (H,W) / (H,W,3) or uint16 (H,W)."""
    with Image.open(path) as im:
        if im.mode in ("I;16", "I"):
            arr = np.asarray(im, dtype=np.uint16)
        elif im.mode == "L":
            arr = np.asarray(im, dtype=np.uint8)
        elif im.mode in ("RGB", "RGBA", "P", "LA"):
            arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
        else:
            raise WrongChannelCount(f"{path}: unsupported PNG mode {im.mode!r}")
    return arr


def write_png(path: str | os.PathLike, arr: np.ndarray) -> None:
    """Write uint8 (H,W)/(H,W,3) or uint16 (H,W) losslessly."""
    arr = np.asarray(arr)
    if arr.dtype == np.uint8:
        if arr.ndim == 2:
            im = Image.fromarray(arr, mode="L")
        elif arr.ndim == 3 and arr.shape[2] == 3:
            im = Image.fromarray(arr, mode="RGB")
        elif arr.ndim == 3 and arr.shape[2] == 1:
            im = Image.fromarray(arr[:, :, 0], mode="L")
        else:
            raise WrongChannelCount(f"cannot write shape {arr.shape} as PNG")
    elif arr.dtype == np.uint16 and arr.ndim == 2:
        im = Image.fromarray(arr)
    else:
        raise WrongChannelCount(
            f"cannot write dtype {arr.dtype} shape {arr.shape} as PNG"
        )
    im.save(path, format="PNG")


def channel_count(arr: np.ndarray) -> int:
    if arr.ndim == 2:
        return 1
    if arr.ndim == 3:
        return arr.shape[2]
    raise WrongChannelCount(f"expected 2-D or 3-D raster, got shape {arr.shape}")


def check_finite(arr: np.ndarray, what: str = "input") -> None:
    if np.issubdtype(arr.dtype, np.floating) and not np.isfinite(arr).all():
        raise NonFiniteInput(f"{what} contains NaN or Inf samples")


def as_binary_mask(mask: np.ndarray, context: str = "mask") -> np.ndarray:
    """Validate a strict binary (0/255 or bool) single-channel mask.

    Non-binary masks are rejected rather than thresholded so that data
    corruption surfaces. Returns the boolean mask.
    """
    mask = np.asarray(mask)
    if mask.ndim == 3 and mask.shape[2] == 1:
        mask = mask[:, :, 0]
    if mask.ndim != 2:
        raise NonBinaryMask(f"{context}: expected single-channel mask, got shape {mask.shape}")
    if mask.dtype == bool:
        return mask
    values = np.unique(mask)
    if not np.isin(values, (0, 255)).all():
        raise NonBinaryMask(f"{context}: mask values must be 0 or 255, found {values[:8]}")
    return mask > 0
