"""Model registry.

Builtin "toy-*" models are deterministic numpy functions that stand in
for real depth networks in tests and dry runs. They emit fields at a
fixed internal resolution so the export path always exercises the
resize-to-annotation-resolution step. Hugging Face backends load
lazily under the "hf:" prefix and need the optional [hf] extras.
"""

import numpy as np
from PIL import Image


class ModelLoadError(RuntimeError):
    """Raised when a model id is unknown or its backend cannot load."""


# luminance weights for RGB reduction
_LUMA = np.array([0.299, 0.587, 0.114])

_INTERNAL_RES = 32  # toy models predict on a coarse square grid


def _to_gray(image: np.ndarray) -> np.ndarray:
    if image.ndim == 2:
        return image.astype(np.float64)
    return image[..., :3].astype(np.float64) @ _LUMA


def _downsample(field: np.ndarray, size: int) -> np.ndarray:
    img = Image.fromarray(field.astype(np.float32), mode="F")
    return np.asarray(img.resize((size, size), Image.BILINEAR), np.float32)


def _toy_luma(image: np.ndarray, seed: int) -> np.ndarray:
    """Bright pixels read as near: inverse depth proportional to luminance."""
    gray = _to_gray(image) / 255.0
    return _downsample(gray + 0.01, _INTERNAL_RES)


def _toy_dome(image: np.ndarray, seed: int) -> np.ndarray:
    """Content-independent radial dome, nearest at the image center."""
    axis = np.linspace(-1.0, 1.0, _INTERNAL_RES)
    yy, xx = np.meshgrid(axis, axis, indexing="ij")
    return (2.0 - np.hypot(yy, xx)).astype(np.float32)


def _toy_noise(image: np.ndarray, seed: int) -> np.ndarray:
    """Seeded random field; pins the generator so reruns are identical."""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.1, 1.0, (_INTERNAL_RES, _INTERNAL_RES)).astype(np.float32)


_BUILTIN = {
    "toy-luma": _toy_luma,
    "toy-dome": _toy_dome,
    "toy-noise": _toy_noise,
}


def available_models() -> list:
    return sorted(_BUILTIN) + ["hf:<repo> (requires the [hf] extras)"]


def _load_hf(repo: str, seed: int):
    try:
        import torch
        from transformers import pipeline
    except ImportError as exc:
        raise ModelLoadError(
            f"hf:{repo} needs torch and transformers (install the [hf] extras)"
        ) from exc
    torch.manual_seed(seed)  # pin stochastic backends (diffusion samplers)
    try:
        pipe = pipeline("depth-estimation", model=repo, torch_dtype=torch.float32)
    except Exception as exc:
        raise ModelLoadError(f"hf:{repo}: {exc}") from exc

    def predict(image: np.ndarray, _seed: int) -> np.ndarray:
        if image.ndim == 2:
            image = np.stack([image] * 3, axis=-1)
        out = pipe(Image.fromarray(image))
        depth = out["predicted_depth"]
        return np.asarray(depth.squeeze().float().cpu().numpy(), np.float32)

    return predict


def load_model(model_id: str, seed: int = 0):
    """Return predict(image_u8, seed) -> float32 2-D field."""
    if model_id in _BUILTIN:
        return _BUILTIN[model_id]
    if model_id.startswith("hf:"):
        return _load_hf(model_id[3:], seed)
    raise ModelLoadError(f"unknown model {model_id!r}; try one of {available_models()}")
