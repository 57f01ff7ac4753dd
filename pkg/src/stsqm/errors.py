"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """Input outside the domain an operation accepts."""


class SingularCoefficientError(DomainError):
    """A coefficient with a 1/V factor was evaluated where V is too close to zero."""


class StepSizeError(DomainError):
    """An x-step would amplify some mode beyond the configured bound."""

    def __init__(self, message: str, spectral_radius: float, bound: float):
        super().__init__(message)
        self.spectral_radius = spectral_radius
        self.bound = bound


class NoSupportError(DomainError):
    """A conditional density has a vanishing denominator."""


class TruncationError(DomainError):
    """A momentum cutoff discards too much of the norm."""


class WindowError(DomainError):
    """A finite evaluation window misses too much probability mass."""

    def __init__(self, message: str, captured_mass: float, suggested: tuple[float, float]):
        super().__init__(message)
        self.captured_mass = captured_mass
        self.suggested = suggested


class ConfigError(ValueError):
    """Scenario configuration failed validation."""


class StageError(RuntimeError):
    """A scenario stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
