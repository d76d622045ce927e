"""Exception hierarchy shared across the toolkit."""


class DeidError(Exception):
    """Base class for all toolkit errors."""


class CorpusFormatError(DeidError):
    """Raised when a corpus file or record violates the line format."""


class AnnotationError(DeidError):
    """Raised for invalid, overlapping, or token-misaligned annotations."""


class HarmonizationError(DeidError):
    """Raised when harmonization meets an unknown source label."""


class ConfigError(DeidError):
    """Raised for invalid configs, plans, or synthetic specs."""


class NumericsError(DeidError):
    """Raised for non-finite gradients and checkpoint mismatches."""


class TrainingError(DeidError):
    """Raised when a training plan cannot be executed."""
