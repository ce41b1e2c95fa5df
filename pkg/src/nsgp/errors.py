"""Exception types shared across the package."""


class NsgpError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(NsgpError, ValueError):
    """A parameter value violates its documented range or type."""


class ConfigurationError(NsgpError, ValueError):
    """A configuration is internally inconsistent or incomplete."""


class DataError(NsgpError, ValueError):
    """Input data is malformed: bad shapes, missing values, unparsable rows."""


class NumericalError(NsgpError, RuntimeError):
    """A numerical operation failed beyond recovery."""


class NotPositiveDefiniteError(NumericalError):
    """A matrix required to be positive definite could not be factorized."""


class RankDeficiencyError(NumericalError):
    """A design matrix (or its whitened projection) is rank deficient."""


class SkipComponentError(NsgpError):
    """A mixture component has too few neighbors for a local fit.

    Carries the component index, the observed neighborhood size, and the
    minimum required so the caller can decide how to proceed.
    """

    def __init__(self, index, count, required):
        self.index = index
        self.count = count
        self.required = required
        super().__init__(
            f"component {index}: neighborhood has {count} observations, "
            f"needs at least {required}"
        )


class UnfittableConfigurationError(NsgpError):
    """Every mixture component was skipped; the model cannot be fit."""
