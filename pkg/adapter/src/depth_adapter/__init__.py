"""Depth-model inference adapter.

Runs a registered monocular depth model over a directory of images (or
the ids listed in a benchmark manifest) and writes the results as a
prediction store: one PFM raster per sample at the input image's
resolution, plus a store.json describing polarity and provenance. The
store layout is consumed by the evaluation toolkit through its CLI; the
two packages share only the on-disk formats.
"""

from .export import ExportResult, export_store
from .models import ModelLoadError, available_models

__version__ = "0.1.0"

__all__ = ["ExportResult", "export_store", "ModelLoadError", "available_models", "__version__"]
