"""Benchmark toolkit for multi-hypothesis monocular depth.

Provides the Laplacian visual-prompt transforms, the multi-layer ordinal
metric suite (SRA, layer preference, ML-SRA), the hypothesis-ordering
combiner, benchmark statistics, and a boundary-interpolation baseline.
Depth predictions are consumed from on-disk stores (PFM / 16-bit PNG)
produced by any backend.
"""

__version__ = "0.1.0"

from .errors import ToolkitError, ValidationFailure, MissingData

__all__ = ["ToolkitError", "ValidationFailure", "MissingData", "__version__"]
