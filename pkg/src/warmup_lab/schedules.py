"""Step-size policies: loss-adaptive warm-up rules and classic decay shapes.

The centerpiece is ``TheoreticalAdaptive``: with curvature constants
``(h0, h1)`` the rule eta = theta / (10*h0 + 20*h1*gap) starts small where the
loss gap is large (high curvature) and grows toward theta/(10*h0) as the run
approaches the optimum — a warm-up whose length is dictated by the problem.
``PracticalClipped`` is the optimum-free surrogate: it divides any base
schedule by max{1, loss/C}.  The remaining shapes (constant, linear-warmup,
warmup-stable-decay, cosine) are conventional horizon-based schedules.

All policies are immutable and ``step_size`` is a pure function of
(policy, state), so trajectories are exactly reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InconsistentFStarError, OutOfHorizonError, ScheduleError

__all__ = [
    "StepState",
    "StepPolicy",
    "Constant",
    "TheoreticalAdaptive",
    "PracticalClipped",
    "LinearWarmup",
    "WSD",
    "Cosine",
    "step_size",
    "policy_horizon",
    "max_safe_constant_step",
]

# Negative loss gaps beyond this are treated as an inconsistent optimum value
# rather than rounding noise.
GAP_TOLERANCE = 1e-12

# WSD's default decay target, as a fraction of the peak rate.
WSD_FLOOR_FRACTION = 1e-5


@dataclass(frozen=True)
class StepState:
    """What a policy may consult: the iterate index and the loss it just saw.

    ``current_loss`` is the full loss for deterministic runs and the
    mini-batch loss for stochastic ones; ``batch_f_star`` carries the batch's
    own optimal value when the driver knows it (interpolation setting) and
    takes precedence over a policy-level optimum.
    """

    iter: int
    current_loss: float
    batch_f_star: float | None = None


@dataclass(frozen=True)
class StepPolicy:
    """Base class for the policy union; use the concrete subclasses."""

    def _value(self, state: StepState) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(StepPolicy):
    """Fixed step size."""

    eta: float

    def __post_init__(self) -> None:
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ScheduleError(f"constant step must be positive, got {self.eta}")

    def _value(self, state: StepState) -> float:
        return self.eta


@dataclass(frozen=True)
class TheoreticalAdaptive(StepPolicy):
    """eta = theta / (10*h0 + 20*h1*gap), gap = current_loss - f_star.

    ``f_star`` is the baseline of the curvature certificate in use (which may
    be 0 for raw-loss certificates), not necessarily the objective's optimum.
    A ``None`` optimum makes the policy refuse to run rather than guess;
    ``StepState.batch_f_star`` overrides it when the driver supplies a
    per-batch value.
    """

    h0: float
    h1: float
    theta: float = 1.0
    f_star: float | None = 0.0

    def __post_init__(self) -> None:
        if not (self.h0 > 0 and math.isfinite(self.h0)):
            raise ScheduleError(f"h0 must be positive, got {self.h0}")
        if not (self.h1 >= 0 and math.isfinite(self.h1)):
            raise ScheduleError(f"h1 must be non-negative, got {self.h1}")
        if not (0.0 < self.theta <= 1.0):
            raise ScheduleError(f"theta must lie in (0, 1], got {self.theta}")

    def _value(self, state: StepState) -> float:
        f_star = state.batch_f_star
        if f_star is None:
            f_star = self.f_star
        if f_star is None:
            raise ScheduleError(
                "adaptive policy has no optimum value to compute the loss gap; "
                "set f_star or use a loss-clipped policy instead"
            )
        gap = state.current_loss - f_star
        if gap < -GAP_TOLERANCE:
            raise InconsistentFStarError(
                f"loss {state.current_loss} is below the declared optimum "
                f"{f_star} by more than {GAP_TOLERANCE}"
            )
        gap = max(gap, 0.0)
        return self.theta / (10.0 * self.h0 + 20.0 * self.h1 * gap)


@dataclass(frozen=True)
class PracticalClipped(StepPolicy):
    """Divides a base schedule by max{1, current_loss / c}.

    Needs no optimum value: early on (loss >> c) the effective step is tiny
    and it recovers the base schedule exactly once the loss falls to c.
    """

    base: StepPolicy
    c: float

    def __post_init__(self) -> None:
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ScheduleError(f"clip level c must be positive, got {self.c}")
        if not isinstance(self.base, StepPolicy):
            raise ScheduleError("base must be a StepPolicy")

    def _value(self, state: StepState) -> float:
        return self.base._value(state) / max(1.0, state.current_loss / self.c)


@dataclass(frozen=True)
class LinearWarmup(StepPolicy):
    """Linear ramp to ``peak`` over ``warmup_iters``, then linear decay to
    ``floor`` at the final iterate (triangular shape)."""

    peak: float
    warmup_iters: int
    total_iters: int
    floor: float

    def __post_init__(self) -> None:
        _check_positive_rate("peak", self.peak)
        _check_positive_rate("floor", self.floor)
        if not (0 < self.warmup_iters < self.total_iters):
            raise ScheduleError(
                "need 0 < warmup_iters < total_iters, got "
                f"{self.warmup_iters} / {self.total_iters}"
            )
        if self.floor > self.peak:
            raise ScheduleError("floor exceeds peak")

    def _value(self, state: StepState) -> float:
        it = _check_horizon(state.iter, self.total_iters)
        if it < self.warmup_iters:
            return self.peak * (it + 1) / self.warmup_iters
        frac = (it - self.warmup_iters + 1) / (self.total_iters - self.warmup_iters)
        return self.peak + frac * (self.floor - self.peak)


@dataclass(frozen=True)
class WSD(StepPolicy):
    """Warmup-stable-decay: ramp (possibly absent), hold at peak, then decay
    linearly to ``floor`` (default ``1e-5 * peak``) over the last
    ``decay_iters`` iterates."""

    peak: float
    warmup_iters: int
    decay_iters: int
    total_iters: int
    floor: float | None = None

    def __post_init__(self) -> None:
        _check_positive_rate("peak", self.peak)
        if self.floor is None:
            object.__setattr__(self, "floor", WSD_FLOOR_FRACTION * self.peak)
        _check_positive_rate("floor", self.floor)
        if self.floor > self.peak:
            raise ScheduleError("floor exceeds peak")
        if self.warmup_iters < 0 or self.decay_iters < 1:
            raise ScheduleError("need warmup_iters >= 0 and decay_iters >= 1")
        if self.warmup_iters + self.decay_iters > self.total_iters:
            raise ScheduleError("warmup + decay windows exceed total_iters")

    def _value(self, state: StepState) -> float:
        it = _check_horizon(state.iter, self.total_iters)
        if it < self.warmup_iters:
            return self.peak * (it + 1) / self.warmup_iters
        decay_start = self.total_iters - self.decay_iters
        if it < decay_start:
            return self.peak
        frac = (it - decay_start + 1) / self.decay_iters
        return self.peak + frac * (self.floor - self.peak)


@dataclass(frozen=True)
class Cosine(StepPolicy):
    """Half-cosine decay from ``peak`` at iterate 0 to ``floor`` at the last."""

    peak: float
    total_iters: int
    floor: float

    def __post_init__(self) -> None:
        _check_positive_rate("peak", self.peak)
        _check_positive_rate("floor", self.floor)
        if self.floor > self.peak:
            raise ScheduleError("floor exceeds peak")
        if self.total_iters < 2:
            raise ScheduleError("cosine schedule needs total_iters >= 2")

    def _value(self, state: StepState) -> float:
        it = _check_horizon(state.iter, self.total_iters)
        phase = math.pi * it / (self.total_iters - 1)
        return self.floor + (self.peak - self.floor) * 0.5 * (1.0 + math.cos(phase))


def _check_positive_rate(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise ScheduleError(f"{name} must be a positive finite rate, got {value}")


def _check_horizon(it: int, total_iters: int) -> int:
    if it >= total_iters:
        raise OutOfHorizonError(
            f"iterate {it} is past the schedule horizon {total_iters}"
        )
    return it


def step_size(policy: StepPolicy, state: StepState) -> float:
    """Evaluate a policy: positive finite step or a schedule error.

    Raises ``InconsistentFStarError`` when the consulted loss undershoots the
    declared optimum, ``OutOfHorizonError`` past a finite schedule's end, and
    plain ``ScheduleError`` for non-finite inputs or degenerate outputs.
    """
    if state.iter < 0:
        raise ScheduleError(f"negative iterate index {state.iter}")
    if not math.isfinite(state.current_loss):
        raise ScheduleError(f"non-finite loss {state.current_loss}")
    eta = policy._value(state)
    if not (eta > 0 and math.isfinite(eta)):
        raise ScheduleError(f"policy emitted invalid step {eta}")
    return eta


def policy_horizon(policy: StepPolicy) -> int | None:
    """Number of iterates a finite schedule covers, or None if unbounded."""
    if isinstance(policy, (LinearWarmup, WSD, Cosine)):
        return policy.total_iters
    if isinstance(policy, PracticalClipped):
        return policy_horizon(policy.base)
    return None


def max_safe_constant_step(f_w0: float, h1: float) -> float:
    """Divergence threshold 2*(log f_w0 + 1)/(f_w0 * h1) for constant-step GD.

    On the exponential-tailed quadratic family, constant steps above this
    value blow up from a start with loss ``f_w0``; steps at half of it
    converge.  Requires ``f_w0 >= 1`` (the regime where the threshold is the
    binding constraint) and ``h1 > 0``.
    """
    if not (f_w0 >= 1.0 and math.isfinite(f_w0)):
        raise ScheduleError(f"threshold needs starting loss >= 1, got {f_w0}")
    if not (h1 > 0 and math.isfinite(h1)):
        raise ScheduleError(f"h1 must be positive, got {h1}")
    return 2.0 * (math.log(f_w0) + 1.0) / (f_w0 * h1)
