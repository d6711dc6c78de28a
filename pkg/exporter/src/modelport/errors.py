class ExportError(Exception):
    """Base class for exporter failures."""


class UnsupportedFamily(ExportError):
    """The estimator class has no interchange mapping."""


class ExtractionError(ExportError):
    """The estimator has an unexpected internal structure."""


class MismatchError(ExportError):
    """Source model and exported model disagree on at least one point."""

    def __init__(self, message: str, indices=None):
        super().__init__(message)
        self.indices = list(indices or [])
