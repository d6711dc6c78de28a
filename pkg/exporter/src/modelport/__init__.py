"""modelport: scikit-learn -> deltabound interchange exporter."""

from .convert import FAMILIES, detect_family, export_model
from .errors import ExportError, ExtractionError, MismatchError, UnsupportedFamily
from .verify import sample_points, verify_roundtrip

__version__ = "0.1.0"

__all__ = [
    "FAMILIES",
    "ExportError",
    "ExtractionError",
    "MismatchError",
    "UnsupportedFamily",
    "detect_family",
    "export_model",
    "sample_points",
    "verify_roundtrip",
    "__version__",
]
