"""Exception hierarchy shared across the package."""


class DmAlignError(Exception):
    """Base class for all dmalign errors."""


class EmptyCaption(DmAlignError):
    """Raised when a caption contains no usable tokens."""


class DimensionMismatch(DmAlignError):
    """Raised when grids, vectors or masks do not share the expected shape."""


class MalformedPath(DmAlignError):
    """Raised when a span alignment path violates its structural invariants."""


class CaptionMismatch(DmAlignError):
    """Raised when two alignment paths do not describe the same caption pair."""


class NonFiniteLoss(DmAlignError):
    """Raised when a training step produces NaN or infinite loss."""


class InvalidScheduleBounds(DmAlignError):
    """Raised for noise-schedule parameters outside their valid range."""


class BadDimensions(DmAlignError):
    """Raised when an image is incompatible with the latent codec factor."""


class IndexOutOfRange(DmAlignError):
    """Raised when alignment indices do not fit the captions they refer to."""


class ProviderUnavailable(DmAlignError):
    """Raised when a remote provider cannot be reached."""


class MissingEmbedding(DmAlignError):
    """Raised when a file-backed embedding provider has no entry for a span."""


class EmptyMaskRegion(DmAlignError):
    """Raised when a metric is evaluated over an empty pixel region."""


class ZeroVector(DmAlignError):
    """Raised when a similarity needs a direction but got a zero vector."""


class StageError(DmAlignError):
    """Wraps a failure inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class DegenerateCovariance(UserWarning):
    """Warning emitted when covariance eigenvalues had to be clipped at zero."""
