"""Exception types shared across the library."""


class TwindockError(Exception):
    """Base class for all library errors."""


class RankDeficientDesign(TwindockError):
    """Regression design matrix is singular or too ill-conditioned to solve."""


class SingularModel(TwindockError):
    """Fitted rudder coefficient matrix is not invertible."""


class RangeViolation(TwindockError):
    """An actuator command lies outside its admissible range."""


class DegenerateScale(TwindockError):
    """Nondimensionalization denominator is not strictly positive."""


class SingularAllocation(TwindockError):
    """The combined configuration/force matrix cannot be inverted."""


class NonFiniteState(TwindockError):
    """Simulation state became NaN or infinite (parameter blow-up)."""


class ConfigError(TwindockError):
    """Scenario configuration is invalid or references missing files."""


class DivergedRun(TwindockError):
    """The simulated ship left the configured bounding box."""
