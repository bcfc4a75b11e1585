"""Exception types raised by the ivox library and CLI."""


class IvoxError(Exception):
    """Base class for all ivox errors."""


class UnsupportedFormatError(IvoxError):
    """Audio or model file violates the expected on-disk format."""


class SignalTooShortError(IvoxError):
    """Signal has fewer samples than one analysis frame."""


class InvalidConfigError(IvoxError):
    """A configuration value is out of its allowed range."""


class EmptySequenceError(IvoxError):
    """An operation requiring at least one frame received none."""


class DimensionMismatchError(IvoxError):
    """Vector or matrix dimensions are inconsistent."""


class TooFewFramesError(IvoxError):
    """Not enough feature frames for the requested model size."""


class EmptyUtteranceError(IvoxError):
    """Adaptation requires at least one feature frame."""


class TooFewSupervectorsError(IvoxError):
    """Subspace training needs at least two supervectors."""


class RankDeficientError(IvoxError):
    """Fewer usable eigenpairs than requested (strict mode only)."""


class ZeroVectorError(IvoxError):
    """Cosine operations are undefined for zero-norm vectors."""


class InvalidThresholdError(IvoxError):
    """Decision thresholds must lie in [0, 1]."""


class DuplicateTargetError(IvoxError):
    """Target ids in a target list must be unique."""


class EmptyTargetListError(IvoxError):
    """Identification requires at least one enrolled target."""
