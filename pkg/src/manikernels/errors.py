"""Exception types shared across the library."""


class ManiKernelsError(Exception):
    """Base class for every error raised by this library."""


class BadShapeError(ManiKernelsError):
    """Input array has the wrong shape for the requested operation."""


class DimMismatchError(ManiKernelsError):
    """Two operands that must share dimensions do not."""


class NonSymmetricError(ManiKernelsError):
    """Matrix violates the symmetry tolerance."""


class NotSpdError(ManiKernelsError):
    """Matrix is not symmetric positive definite."""


class NotPsdError(ManiKernelsError):
    """Kernel matrix fails the positive semi-definiteness audit."""


class NoConvergenceError(ManiKernelsError):
    """Iterative solver hit its iteration cap before converging."""


class ZeroExponentError(ManiKernelsError):
    """Matrix power requested with exponent zero."""


class EmptySetError(ManiKernelsError):
    """An operation over a point set received no points."""


class UnsupportedMetricError(ManiKernelsError):
    """The selected metric does not support the requested operation."""


class NumericalError(ManiKernelsError):
    """Intermediate value strayed outside its valid range beyond roundoff."""


class RankDeficientError(ManiKernelsError):
    """Matrix does not have the column rank the operation requires."""


class BadParamError(ManiKernelsError):
    """Hyperparameter out of its valid range (k, l, dims, grid, C, p, ...)."""


class OneClassError(ManiKernelsError):
    """Binary training set contains a single class."""


class SingularScatterError(ManiKernelsError):
    """Within-class scatter is singular and no ridge was requested."""


class RectOutOfBoundsError(ManiKernelsError):
    """Rectangle extends outside the feature stack."""


class TooFewPixelsError(ManiKernelsError):
    """Rectangle holds too few pixels for a covariance estimate."""


class TooSmallError(ManiKernelsError):
    """Image too small for derivative filters."""


class FrameMismatchError(ManiKernelsError):
    """Video frames disagree in number or size."""


class NoPositivesError(ManiKernelsError):
    """Subwindow ranking requires at least one positive sample."""


class ClampWarning(UserWarning):
    """Roundoff-scale eigenvalue or singular value was clamped."""
