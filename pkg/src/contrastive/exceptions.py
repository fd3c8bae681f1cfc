"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Input array has the wrong length or shape."""


class ConfigError(ValueError):
    """A configuration value violates its contract."""


class DataError(ValueError):
    """Malformed or unusable input data."""


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during training."""


class NoContrastiveClassError(RuntimeError):
    """Every candidate class has a degenerate gradient difference."""


class DegenerateStepError(RuntimeError):
    """Projection step has a (numerically) zero gradient difference."""


class SurrogateDegenerateError(RuntimeError):
    """Neighborhood does not contain two distinct predicted classes."""


class ExplanationError(ValueError):
    """A predicate cannot be scored or rendered."""
