"""Exception types shared across the package."""


class LandauLabError(Exception):
    """Base class for all package errors."""


class GridConfigError(LandauLabError, ValueError):
    """Invalid grid or run configuration."""


class NonFiniteFieldError(LandauLabError, FloatingPointError):
    """A field contains NaN/inf at some node."""


class DegenerateDistributionError(LandauLabError, ValueError):
    """Distribution has zero mass or zero temperature and cannot be normalized."""


class OverflowGuardError(LandauLabError, OverflowError):
    """A stretched-exponential weight would overflow double precision."""


class StepSizeError(LandauLabError, RuntimeError):
    """Explicit time step would produce a negative density."""


class InsufficientDataError(LandauLabError, ValueError):
    """Not enough samples for a fit or diagnostic."""


class ParameterDomainError(LandauLabError, ValueError):
    """A parameter lies outside the admissible window of the estimate."""
