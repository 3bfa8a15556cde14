"""Exception hierarchy shared across the package."""

from __future__ import annotations

__all__ = [
    "WarmupLabError",
    "ConstructionError",
    "EvaluationError",
    "CapacityError",
    "ScheduleError",
    "InconsistentFStarError",
    "OutOfHorizonError",
    "CapabilityError",
    "FitError",
    "SamplerError",
    "InconsistencyError",
    "ConfigError",
]


class WarmupLabError(Exception):
    """Base class for all package-specific errors."""


class ConstructionError(WarmupLabError):
    """A problem instance cannot be built from the given parameters."""


class EvaluationError(WarmupLabError):
    """An objective evaluation produced a non-finite or malformed result."""


class CapacityError(WarmupLabError):
    """A dense operation was requested beyond its supported size."""


class ScheduleError(WarmupLabError):
    """A step-size policy cannot produce a step for the given state."""


class InconsistentFStarError(ScheduleError):
    """Observed loss fell below the declared optimum by more than 1e-12."""


class OutOfHorizonError(ScheduleError):
    """A finite schedule was queried past its total iteration count."""


class CapabilityError(WarmupLabError):
    """The objective lacks an optional capability required by the operation."""


class FitError(WarmupLabError):
    """The sample design is too degenerate to fit."""


class SamplerError(WarmupLabError):
    """A region sampler could not satisfy its constraints."""


class InconsistencyError(WarmupLabError):
    """Inputs contradict a documented consistency condition."""


class ConfigError(WarmupLabError):
    """A config file failed to parse or validate."""
