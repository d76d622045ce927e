"""deidkit: cross-domain clinical de-identification toolkit."""

from .errors import (
    AnnotationError,
    ConfigError,
    CorpusFormatError,
    DeidError,
    HarmonizationError,
    NumericsError,
    TrainingError,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationError",
    "ConfigError",
    "CorpusFormatError",
    "DeidError",
    "HarmonizationError",
    "NumericsError",
    "TrainingError",
    "__version__",
]
