"""Exception types shared across the toolkit.

Two branches matter for CLI exit codes: ValidationFailure (bad inputs,
exit 2) and MissingData (absent files/predictions, exit 3).
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ValidationFailure(ToolkitError):
    """Input violates a documented contract."""


class MissingData(ToolkitError):
    """A required file or prediction is absent."""


# --- raster / transform ---

class ImageTooSmall(ValidationFailure):
    pass


class NonFiniteInput(ValidationFailure):
    pass


class WrongChannelCount(ValidationFailure):
    pass


class NonBinaryMask(ValidationFailure):
    pass


class DimMismatch(ValidationFailure):
    pass


# --- manifest ---

class SchemaError(ValidationFailure):
    pass


class BoundsError(ValidationFailure):
    pass


class MaskMismatch(ValidationFailure):
    pass


class DuplicateId(ValidationFailure):
    pass


# --- depth stores ---

class MissingPrediction(MissingData):
    def __init__(self, sample_id: str, message: str = ""):
        self.sample_id = sample_id
        super().__init__(message or f"no prediction for sample {sample_id!r}")


class FormatError(ValidationFailure):
    pass


class NonFiniteDepth(ValidationFailure):
    pass


# --- metrics / reports ---

class SubsetMismatch(ValidationFailure):
    pass


class EmptyCalibration(ValidationFailure):
    pass


class TagMissing(ValidationFailure):
    pass


# --- baseline ---

class NoBoundary(ValidationFailure):
    pass
