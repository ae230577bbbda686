"""Exception types shared across the package."""


class CorrnetError(Exception):
    """Base class for all package errors."""


class ParameterError(CorrnetError, ValueError):
    pass


class ConnectivityError(CorrnetError):
    pass


class SelectionError(ParameterError):
    pass


class ShapeError(CorrnetError, ValueError):
    pass


class DivergenceError(CorrnetError, FloatingPointError):
    """Raised when an integration produces a non-finite state."""

    def __init__(self, step: int):
        super().__init__(f"divergence at step {step}")
        self.step = step


class DegenerateSeriesError(CorrnetError, ValueError):
    """Raised for zero-variance inputs where a correlation is undefined."""

    def __init__(self, message: str = "degenerate series", row: int | None = None):
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)
        self.row = row


class TrainingDivergence(CorrnetError, FloatingPointError):
    def __init__(self, epoch: int, batch: int):
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


class FormatError(CorrnetError, ValueError):
    """Base class for malformed or foreign binary files."""


class BadMagicError(FormatError):
    pass


class VersionMismatchError(FormatError):
    pass


class TruncationError(FormatError):
    pass


class ShapeMismatchError(FormatError):
    pass


class StageError(CorrnetError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
