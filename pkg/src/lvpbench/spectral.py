"""Laplacian visual-prompt transforms.

A prompt image is the input image convolved channel-wise with a 3x3
discrete Laplacian (a second-order finite-difference high-pass), then
clamped back to 8-bit range. Four variants are supported: the default
4-neighbor stencil, the 8-neighbor stencil, the sign-reversed stencil,
and the 4-neighbor stencil applied to a grayscale reduction.

All kernels are symmetric, so correlation and convolution coincide; the
sliding-window implementation below is correlation. Borders use
replicate (edge-clamp) padding, which preserves output dimensions and
keeps constant inputs exactly zero at the borders.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import ImageTooSmall, WrongChannelCount
from .raster import channel_count, check_finite


class LaplacianVariant(enum.Enum):
    """The transform family; values double as CLI spellings."""

    LVP4 = "lvp"
    LVP8 = "lvp2"
    LVP4_REVERSED = "lvpr"
    LVP4_GRAY = "lvpg"

    @property
    def kernel(self) -> np.ndarray:
        """The 3x3 stencil. Every kernel's elements sum to zero."""
        if self in (LaplacianVariant.LVP4, LaplacianVariant.LVP4_GRAY):
            k = [[0, 1, 0], [1, -4, 1], [0, 1, 0]]
        elif self is LaplacianVariant.LVP8:
            k = [[1, 1, 1], [1, -8, 1], [1, 1, 1]]
        else:  # LVP4_REVERSED: element-wise negation of LVP4
            k = [[0, -1, 0], [-1, 4, -1], [0, -1, 0]]
        return np.array(k, dtype=np.float32)

    @property
    def grayscale_input(self) -> bool:
        return self is LaplacianVariant.LVP4_GRAY


class ClampMode(enum.Enum):
    SATURATE = "saturate"
    NORMALIZED_ABS = "normabs"


def _round_half_up(x: np.ndarray) -> np.ndarray:
    # round-half-up on non-negative values; np.rint would round half-to-even
    return np.floor(x + 0.5)


def convolve_laplacian(image: np.ndarray, variant: LaplacianVariant) -> np.ndarray:
    """Convolve each channel with the variant's 3x3 kernel.

    Parameters
    ----------
    image:
        (H, W) or (H, W, C) with C in {1, 3}; uint8 or float. H, W >= 3.

    Returns
    -------
    np.ndarray
        float32 signed response field with the same shape as the input.
    """
    image = np.asarray(image)
    channels = channel_count(image)
    if channels not in (1, 3):
        raise WrongChannelCount(f"expected 1 or 3 channels, got {channels}")
    h, w = image.shape[:2]
    if h < 3 or w < 3:
        raise ImageTooSmall(f"convolution needs at least 3x3 pixels, got {h}x{w}")
    check_finite(image, "convolution input")

    src = image.astype(np.float32, copy=False)
    squeeze = src.ndim == 2
    if squeeze:
        src = src[:, :, None]

    kernel = variant.kernel
    padded = np.pad(src, ((1, 1), (1, 1), (0, 0)), mode="edge")
    out = np.zeros_like(src, dtype=np.float32)
    for dy in range(3):
        for dx in range(3):
            weight = kernel[dy, dx]
            if weight == 0.0:
                continue
            out += weight * padded[dy : dy + h, dx : dx + w, :]
    return out[:, :, 0] if squeeze else out


def to_prompt(field: np.ndarray, clamp_mode: ClampMode = ClampMode.SATURATE) -> np.ndarray:
    """Map a signed response field to an 8-bit prompt image.

    SATURATE clamps to [0, 255] and rounds (the saturating-uint8
    convention). NORMALIZED_ABS rescales |v| so the largest magnitude
    maps to 255, for display enhancement; an all-zero field stays zero.
    """
    field = np.asarray(field, dtype=np.float32)
    check_finite(field, "prompt field")
    if clamp_mode is ClampMode.SATURATE:
        out = _round_half_up(np.clip(field, 0.0, 255.0))
    else:
        mag = np.abs(field)
        peak = float(mag.max()) if mag.size else 0.0
        out = np.zeros_like(mag) if peak == 0.0 else _round_half_up(255.0 * mag / peak)
    return out.astype(np.uint8)


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Reduce an RGB raster to a single luma channel (BT.601 weights)."""
    image = np.asarray(image)
    if channel_count(image) != 3:
        raise WrongChannelCount(f"grayscale reduction needs 3 channels, got shape {image.shape}")
    gray = (
        0.299 * image[:, :, 0].astype(np.float64)
        + 0.587 * image[:, :, 1].astype(np.float64)
        + 0.114 * image[:, :, 2].astype(np.float64)
    )
    if image.dtype == np.uint8:
        return _round_half_up(gray).astype(np.uint8)
    return gray.astype(np.float32)


def transform_image(
    image: np.ndarray,
    variant: LaplacianVariant = LaplacianVariant.LVP4,
    clamp_mode: ClampMode = ClampMode.SATURATE,
) -> np.ndarray:
    """Full prompt pipeline: optional grayscale reduction, convolve, clamp."""
    if variant.grayscale_input and channel_count(image) == 3:
        image = to_grayscale(image)
    return to_prompt(convolve_laplacian(image, variant), clamp_mode)
