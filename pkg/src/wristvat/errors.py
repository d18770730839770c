"""Exception types raised across the wristvat pipeline."""


class WristvatError(Exception):
    """Base class for all wristvat errors."""


# ingest
class ParseError(WristvatError):
    """Input file is malformed for the declared format."""


class EmptyRecording(WristvatError):
    """Recording file contains no samples."""


class NonFiniteSample(WristvatError):
    """Recording contains NaN or infinite acceleration values."""


# sigproc
class WindowTooShort(WristvatError):
    """Rolling window covers fewer than two samples."""


class DegenerateFrame(WristvatError):
    """Frame has zero covariance (constant signal)."""


class SeriesTooShort(WristvatError):
    """Series shorter than the requested lag range."""


class ZeroVariance(WristvatError):
    """Series is constant; autocorrelation undefined."""


class ZeroVarianceAxis(WristvatError):
    """One axis of a frame is constant; z-scoring undefined."""


# dynamics
class FrameTooShort(WristvatError):
    """Frame has fewer than two samples."""


class AllPointsTrimmed(WristvatError):
    """Outlier trimming left fewer than two points."""


class FrameTooShortForScale(WristvatError):
    """Delay embedding leaves too little overlap at this delay spacing."""


class ZeroVarianceChannel(WristvatError):
    """A delay-embedded channel is constant; correlation undefined."""


# gait / sleep aggregation
class InsufficientFrames(WristvatError):
    """Fewer than two frames available for summary statistics."""


# model
class MissingCovariate(WristvatError):
    """Subject record lacks one of the six covariates."""


class DegenerateDesign(WristvatError):
    """All design columns have zero variance."""


class FeatureMismatch(WristvatError):
    """Prediction feature columns differ from training columns."""


class ConstantInput(WristvatError):
    """Correlation of a constant sequence is undefined."""


class TooFewRows(WristvatError):
    """Not enough subjects for cross-validation."""


class WeightMismatch(WristvatError):
    """Fusion weights malformed or do not sum to one."""


class CategoryTooSmall(WristvatError):
    """BMI category has fewer than three members."""
