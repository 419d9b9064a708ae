"""Exception types shared across the toolkit."""


class SeesimError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameterError(SeesimError, ValueError):
    """A physical parameter is out of its admissible range."""


class NonFiniteInputError(SeesimError, ValueError):
    """An input array contains NaN or infinite entries."""


class StepSizeError(SeesimError, RuntimeError):
    """An incremental update exceeds the configured step-size policy."""


class SingularSystemError(SeesimError, RuntimeError):
    """The augmented kinetostatic system is singular or too ill-conditioned."""


class EmptyCloudError(SeesimError, ValueError):
    """A pose cloud required for an analysis is empty."""


class InsufficientSamplesError(SeesimError, ValueError):
    """Too few repeated samples to compute statistics."""


class ConfigError(SeesimError, ValueError):
    """Configuration document is invalid. Carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ScenarioError(SeesimError, ValueError):
    """Scenario document is invalid or incomplete."""
