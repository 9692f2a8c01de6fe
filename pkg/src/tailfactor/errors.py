"""Typed error hierarchy shared across the library."""


class TailFactorError(Exception):
    """Base class for all domain errors raised by this package."""


class ZeroColumnError(TailFactorError):
    """A loading matrix has a column with zero l1-norm."""


class InvalidAlphaError(TailFactorError):
    """Tail index alpha must be strictly positive."""


class DimensionMismatchError(TailFactorError):
    """Vectors or measures with incompatible dimensions."""


class MaxTrialsExceededError(TailFactorError):
    """Rejection sampler failed to accept within the trial budget."""


class WorstCaseDimensionError(TailFactorError):
    """The worst-case latent law is only defined for two factors."""


class NoExceedancesError(TailFactorError):
    """No sample exceeded the threshold."""


class TooFewPointsError(TailFactorError):
    """Fewer points than clusters requested."""


class NearSingularError(TailFactorError):
    """Matrix inversion hit a pivot or determinant below tolerance."""


class NoSolutionError(TailFactorError):
    """Estimating equation has no positive solution."""


class DegenerateDesignError(TailFactorError):
    """Regression design matrix is degenerate (all abscissae equal)."""


class SolverFailureError(TailFactorError):
    """Transport solver could not certify optimality (internal bug)."""


class ConfigError(TailFactorError):
    """Invalid configuration document."""


class ExperimentAbortedError(TailFactorError):
    """Every replicate failed for some grid point."""


class IoError(TailFactorError):
    """Filesystem problem while emitting outputs."""
