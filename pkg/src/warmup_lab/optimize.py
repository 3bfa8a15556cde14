"""Gradient-descent drivers with fully recorded, reproducible trajectories.

``run_gd`` and ``run_sgd`` implement the bare update w <- w - eta * g with a
pluggable step policy and record every iterate: loss, gradient norm, the step
taken, and (optionally, after ``attach_distance_tracking``) the distance to
the solution set.  Divergence is a recorded outcome, never an exception: the
lower-bound demonstrations are *supposed* to blow up and must terminate
cleanly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .core import Array, EvalRecord, Objective, ParamPoint
from .errors import CapabilityError
from .schedules import ScheduleError, StepPolicy, StepState, step_size

__all__ = [
    "StopRule",
    "Trajectory",
    "run_gd",
    "run_sgd",
    "attach_distance_tracking",
    "PRNG_ID",
]

StopReason = Literal["max_iters", "grad_tol", "loss_tol", "diverged", "step_error"]

# Project-wide generator: 64-bit PCG behind numpy's Generator front end.
# Recorded in run metadata so trajectories stay comparable across builds.
PRNG_ID = "numpy.random.PCG64"

# |f| or ||w|| beyond this counts as divergence.
DIVERGENCE_GUARD_DEFAULT = 1e12

# Keep every iterate's parameters up to this dimension; thin above it.
SNAPSHOT_DENSE_DIM = 100
SNAPSHOT_STRIDE = 10


@dataclass(frozen=True)
class StopRule:
    """Termination targets, checked in order: divergence, gradient norm,
    loss gap, iteration budget."""

    max_iters: int
    grad_tol: float | None = None
    loss_tol: float | None = None
    divergence_guard: float = DIVERGENCE_GUARD_DEFAULT

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.divergence_guard <= 0:
            raise ValueError("divergence_guard must be positive")


@dataclass(frozen=True)
class Trajectory:
    """One run's complete record.

    ``records[k]`` describes iterate k; its ``step_size`` is the step taken
    *from* that iterate (the terminal record carries 0.0, so monotonicity
    checks over steps should exclude it).  ``snapshots`` holds (iter, point)
    pairs — every iterate for small problems, thinned for large ones.
    ``batches`` (stochastic runs only) holds the component indices drawn at
    each step, aligned with records[:-1].
    """

    records: tuple[EvalRecord, ...]
    snapshots: tuple[tuple[int, ParamPoint], ...]
    policy_id: str
    problem_id: str
    seed: int | None
    stop_reason: StopReason
    prng: str | None = None
    batches: tuple[tuple[int, ...], ...] | None = None

    @property
    def n_steps(self) -> int:
        return len(self.records) - 1

    @property
    def final(self) -> EvalRecord:
        return self.records[-1]

    def snapshot_map(self) -> dict[int, ParamPoint]:
        return dict(self.snapshots)


def _keep_snapshot(k: int, dim: int, terminal: bool) -> bool:
    if dim <= SNAPSHOT_DENSE_DIM or terminal or k == 0:
        return True
    return k % SNAPSHOT_STRIDE == 0


class _Recorder:
    """Accumulates records/snapshots under the thinning rule."""

    def __init__(self, dim: int) -> None:
        self.dim = dim
        self.records: list[EvalRecord] = []
        self.snapshots: list[tuple[int, ParamPoint]] = []

    def add(self, k: int, w: ParamPoint, f: float, grad_norm: float,
            eta: float, terminal: bool) -> None:
        self.records.append(EvalRecord(iter=k, f=f, grad_norm=grad_norm,
                                       step_size=eta))
        if _keep_snapshot(k, self.dim, terminal):
            self.snapshots.append((k, w))


def _norm(v: Array) -> float:
    return float(np.linalg.norm(v))


def _drive(obj: Objective, w0: ParamPoint, policy: StepPolicy, stop: StopRule,
           eval_fn, policy_state_fn, on_step=None) -> tuple[_Recorder, StopReason]:
    """Shared GD/SGD loop; eval_fn returns (loss, gradient) for the iterate."""
    rec = _Recorder(w0.dim)
    w = w0
    k = 0
    while True:
        f, g = eval_fn(w, k)
        gn = _norm(g) if np.all(np.isfinite(g)) else math.inf
        finite = math.isfinite(f) and math.isfinite(gn)
        if not finite or abs(f) > stop.divergence_guard \
                or _norm(w.data) > stop.divergence_guard:
            rec.add(k, w, f, gn, 0.0, terminal=True)
            return rec, "diverged"
        if stop.grad_tol is not None and gn <= stop.grad_tol:
            rec.add(k, w, f, gn, 0.0, terminal=True)
            return rec, "grad_tol"
        if stop.loss_tol is not None:
            gap = f - (obj.f_star if obj.f_star is not None else 0.0)
            if gap <= stop.loss_tol:
                rec.add(k, w, f, gn, 0.0, terminal=True)
                return rec, "loss_tol"
        if k >= stop.max_iters:
            rec.add(k, w, f, gn, 0.0, terminal=True)
            return rec, "max_iters"
        try:
            eta = step_size(policy, policy_state_fn(k, f))
        except ScheduleError:
            rec.add(k, w, f, gn, 0.0, terminal=True)
            return rec, "step_error"
        rec.add(k, w, f, gn, eta, terminal=False)
        w = w.with_data(w.data - eta * g)
        if on_step is not None:
            on_step(k)
        k += 1


def run_gd(obj: Objective, w0: ParamPoint, policy: StepPolicy,
           stop: StopRule) -> Trajectory:
    """Full-gradient descent under ``policy`` until a stop condition fires."""
    if w0.dim != obj.dim:
        raise ValueError(f"point dim {w0.dim} != objective dim {obj.dim}")

    def eval_fn(w: ParamPoint, k: int):
        return float(obj.value(w)), obj.gradient(w)

    def state_fn(k: int, f: float) -> StepState:
        return StepState(iter=k, current_loss=f)

    rec, reason = _drive(obj, w0, policy, stop, eval_fn, state_fn)
    return Trajectory(
        records=tuple(rec.records),
        snapshots=tuple(rec.snapshots),
        policy_id=type(policy).__name__,
        problem_id=obj.name,
        seed=None,
        stop_reason=reason,
    )


def run_sgd(obj: Objective, w0: ParamPoint, policy: StepPolicy,
            batch_size: int, seed: int, stop: StopRule) -> Trajectory:
    """Mini-batch descent: per step, draw ``batch_size`` component indices
    without replacement from the seeded generator, step along the batch
    gradient, and let the policy consult the batch loss.

    The recorded ``f`` column is the mini-batch loss (the quantity the policy
    sees); with ``batch_size == n`` every batch is the full set and the run
    matches ``run_gd`` exactly.
    """
    if obj.n_components is None or obj.value_i is None or obj.gradient_i is None:
        raise CapabilityError(f"{obj.name} has no per-component losses")
    n = obj.n_components
    if not (1 <= batch_size <= n):
        raise ValueError(f"batch_size must be in [1, {n}], got {batch_size}")
    if w0.dim != obj.dim:
        raise ValueError(f"point dim {w0.dim} != objective dim {obj.dim}")

    rng = np.random.Generator(np.random.PCG64(seed))
    full = batch_size == n
    batches: list[tuple[int, ...]] = []
    current: dict[str, tuple[int, ...]] = {}

    def eval_fn(w: ParamPoint, k: int):
        if full:
            idx = tuple(range(n))
            f, g = float(obj.value(w)), obj.gradient(w)
        else:
            idx = tuple(int(i) for i in np.sort(rng.choice(n, size=batch_size,
                                                           replace=False)))
            f, g = obj.batch_value(w, idx), obj.batch_gradient(w, idx)
        current["batch"] = idx
        return f, g

    def state_fn(k: int, f: float) -> StepState:
        return StepState(iter=k, current_loss=f,
                         batch_f_star=obj.component_f_star)

    def on_step(k: int) -> None:
        batches.append(current["batch"])

    rec, reason = _drive(obj, w0, policy, stop, eval_fn, state_fn, on_step)
    return Trajectory(
        records=tuple(rec.records),
        snapshots=tuple(rec.snapshots),
        policy_id=type(policy).__name__,
        problem_id=obj.name,
        seed=seed,
        stop_reason=reason,
        prng=PRNG_ID,
        batches=tuple(batches),
    )


def attach_distance_tracking(traj: Trajectory, obj: Objective) -> Trajectory:
    """Fill ``dist_to_solution`` on every record that has a snapshot.

    Distance is ``||w - project(w)||`` via the objective's exact projector.
    Returns a new trajectory; the input is unchanged.
    """
    if obj.project_solution is None:
        raise CapabilityError(f"{obj.name} has no solution projector")
    if not traj.snapshots:
        raise CapabilityError("trajectory retained no snapshots")
    dists: dict[int, float] = {}
    for k, w in traj.snapshots:
        proj = obj.project_solution(w)
        dists[k] = _norm(w.data - proj.data)
    records = tuple(
        replace(r, dist_to_solution=dists[r.iter]) if r.iter in dists else r
        for r in traj.records
    )
    return replace(traj, records=records)
