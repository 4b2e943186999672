"""Grayscale PFM reader/writer matching the prediction-store format.

Header: "Pf", then "W H", then a scale whose sign encodes endianness
(negative = little-endian). Scanlines are stored bottom-up as float32.
"""

import numpy as np


def write_pfm(path, field: np.ndarray) -> None:
    arr = np.asarray(field, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"PFM field must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("PFM field must be finite")
    h, w = arr.shape
    header = f"Pf\n{w} {h}\n-1.0\n".encode("ascii")
    body = np.flipud(arr).astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def read_pfm(path) -> np.ndarray:
    data = open(path, "rb").read()
    tokens = data.split(maxsplit=3)
    if len(tokens) < 4 or tokens[0] != b"Pf":
        raise ValueError(f"{path}: not a grayscale PFM")
    w, h = int(tokens[1]), int(tokens[2])
    scale_token, _, rest = tokens[3].partition(b"\n")
    scale = float(scale_token)
    dtype = "<f4" if scale < 0 else ">f4"
    flat = np.frombuffer(rest[: w * h * 4], dtype=dtype)
    if flat.size != w * h:
        raise ValueError(f"{path}: truncated PFM body")
    return np.flipud(flat.reshape(h, w)).astype(np.float32)
