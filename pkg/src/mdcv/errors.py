"""Exception types shared across the package."""


class InvalidConfigError(ValueError):
    """A configuration value violates its documented constraints."""


class SchemaError(ValueError):
    """Two frames (or a frame and a fitted object) disagree on columns."""


class FitError(ValueError):
    """A model or imputer could not be fit on the given data."""


class ImputationError(ValueError):
    """A missing cell could not be imputed (no usable donor information)."""


class NumericError(ValueError):
    """Non-finite values where finite numbers are required."""


class MetricError(ValueError):
    """A requested metric is undefined for the given inputs."""
