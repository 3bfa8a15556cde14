"""Empirical curvature estimation: secant traces, spectral norms, and fits.

Three layers:

1. ``local_smoothness_trace`` turns a recorded trajectory into (loss gap,
   local smoothness) samples via the gradient secant between consecutive
   iterates — for stochastic runs, with the mismatched-batch pairing that a
   step-by-step probe of a live run produces.
2. ``hessian_spectral_norm`` measures ||H(w)|| directly: dense symmetric
   eigensolve in low dimension, two-restart power iteration on
   finite-difference Hessian-vector products above it.
3. ``fit_h0h1`` regresses smoothness on loss gap (optionally gap**rho),
   either as ordinary least squares or as a dominating envelope line; and
   ``verify_certificate`` checks an analytic certificate pointwise over a
   sampled region.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .core import Objective, ParamPoint, dense_hessian_fd, finite_diff_hvp
from .errors import FitError, SamplerError
from .optimize import Trajectory
from .problems.types import SmoothnessCertificate, make_balanced_init

__all__ = [
    "SmoothnessSample",
    "SmoothnessTrace",
    "H0H1Fit",
    "CertViolation",
    "CertificateReport",
    "local_smoothness_trace",
    "hessian_spectral_norm",
    "power_iteration_spectral_norm",
    "fit_h0h1",
    "verify_certificate",
    "box_sampler",
    "gaussian_sampler",
    "balanced_sampler",
    "floor_sampler",
]

# Steps shorter than this give meaningless secants and are skipped (counted).
MIN_STEP_NORM = 1e-14

# Dimension at or below which the dense eigensolve replaces power iteration.
DENSE_EIG_MAX_DIM = 50

# Rejection-sampling attempt cap for constrained regions.
REJECTION_CAP = 10_000

Sampler = Callable[[np.random.Generator], ParamPoint]


@dataclass(frozen=True)
class SmoothnessSample:
    """One (loss gap, local smoothness) measurement."""

    loss_gap: float
    smoothness: float
    iter: int
    method: Literal["trajectory_secant", "power_iteration", "dense_eig"]


class SmoothnessTrace(list):
    """List of samples; ``skipped`` counts degenerate steps that gave none."""

    def __init__(self, samples: Sequence[SmoothnessSample], skipped: int = 0):
        super().__init__(samples)
        self.skipped = skipped


@dataclass(frozen=True)
class H0H1Fit:
    """Line fit of smoothness on loss_gap**rho.

    ``max_violation`` is the largest amount by which any sample exceeds the
    fitted line; envelope fits keep it at zero by construction.
    """

    h0_hat: float
    h1_hat: float
    r_squared: float
    max_violation: float
    mode: Literal["ols", "envelope"]
    rho: float = 1.0

    def bound(self, loss_gap: float) -> float:
        return self.h0_hat + self.h1_hat * max(loss_gap, 0.0) ** self.rho


def local_smoothness_trace(obj: Objective, traj: Trajectory) -> SmoothnessTrace:
    """Gradient-secant smoothness along a trajectory, paired with loss.

    For each consecutive snapshot pair (w_k, w_{k+1}) the sample is
    ||g(w_{k+1}) - g(w_k)|| / ||w_{k+1} - w_k|| with the loss recorded at
    iterate k.  Stochastic runs use the recorded batches with the natural
    live-probe mismatch: the new batch's gradient at the new point against
    the previous batch's gradient at the old point.  Loss gaps subtract the
    objective's optimum when known, raw loss otherwise.
    """
    snaps = traj.snapshot_map()
    f_star = obj.f_star if obj.f_star is not None else 0.0
    records = {r.iter: r for r in traj.records}
    samples: list[SmoothnessSample] = []
    skipped = 0

    stochastic = traj.batches is not None
    start = 1 if stochastic else 0
    for k in range(start, traj.n_steps):
        if k not in snaps or (k + 1) not in snaps:
            continue
        w_prev, w_next = snaps[k], snaps[k + 1]
        dw = float(np.linalg.norm(w_next.data - w_prev.data))
        if dw < MIN_STEP_NORM:
            skipped += 1
            continue
        if stochastic:
            g_next = obj.batch_gradient(w_next, traj.batches[k])
            g_prev = obj.batch_gradient(w_prev, traj.batches[k - 1])
        else:
            g_next = obj.gradient(w_next)
            g_prev = obj.gradient(w_prev)
        s = float(np.linalg.norm(g_next - g_prev)) / dw
        gap = max(records[k].f - f_star, 0.0)
        if not (math.isfinite(s) and math.isfinite(gap)):
            skipped += 1
            continue
        samples.append(SmoothnessSample(loss_gap=gap, smoothness=s, iter=k,
                                        method="trajectory_secant"))
    return SmoothnessTrace(samples, skipped)


def power_iteration_spectral_norm(obj: Objective, w: ParamPoint,
                                  tol: float = 1e-6, max_iters: int = 200,
                                  seed: int = 0, restarts: int = 2) -> float:
    """||H(w)|| via power iteration on finite-difference HVPs.

    Absolute-value Rayleigh estimates converge to the largest |eigenvalue|
    (the spectral norm for the symmetric Hessian).  ``restarts`` independent
    random starts guard against an unlucky orthogonal initialization; the
    largest converged estimate wins.  Non-convergence warns and returns the
    best estimate seen.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    best = 0.0
    converged_any = False
    for _ in range(restarts):
        v = rng.standard_normal(w.dim)
        v /= float(np.linalg.norm(v))
        prev = math.inf
        est = 0.0
        converged = False
        for _ in range(max_iters):
            hv = finite_diff_hvp(obj, w, v)
            norm_hv = float(np.linalg.norm(hv))
            if norm_hv == 0.0:
                est = 0.0
                converged = True
                break
            est = abs(float(np.dot(v, hv)))
            if abs(est - prev) <= tol * max(est, 1.0e-30):
                converged = True
                break
            prev = est
            v = hv / norm_hv
        best = max(best, est)
        converged_any = converged_any or converged
    if not converged_any:
        warnings.warn(
            f"power iteration did not converge within {max_iters} iterations; "
            f"returning best estimate {best:.6g}",
            RuntimeWarning,
            stacklevel=2,
        )
    return best


def hessian_spectral_norm(obj: Objective, w: ParamPoint, tol: float = 1e-6,
                          max_iters: int = 200, seed: int = 0) -> float:
    """||H(w)||: dense FD eigensolve for dim <= 50, power iteration above."""
    if w.dim <= DENSE_EIG_MAX_DIM:
        hess = dense_hessian_fd(obj, w)
        return float(np.max(np.abs(np.linalg.eigvalsh(hess))))
    return power_iteration_spectral_norm(obj, w, tol=tol, max_iters=max_iters,
                                         seed=seed)


def fit_h0h1(samples: Sequence[SmoothnessSample], mode: str = "ols",
             rho: float = 1.0) -> H0H1Fit:
    """Fit smoothness = h0 + h1 * loss_gap**rho over the samples.

    ``ols`` clips the least-squares line at zero coefficients; ``envelope``
    keeps the OLS slope but raises the intercept until every sample lies on
    or below the line.
    """
    if mode not in ("ols", "envelope"):
        raise ValueError(f"unknown fit mode {mode!r}")
    if len(samples) < 3:
        raise FitError(f"need at least 3 samples, got {len(samples)}")
    x = np.array([s.loss_gap for s in samples], dtype=np.float64) ** rho
    y = np.array([s.smoothness for s in samples], dtype=np.float64)
    if float(np.ptp(x)) == 0.0:
        raise FitError("degenerate design: all loss gaps equal")
    slope, intercept = (float(c) for c in np.polyfit(x, y, 1))
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res == 0.0 else 0.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))

    if mode == "ols":
        h1_hat = max(slope, 0.0)
        h0_hat = max(intercept, 0.0)
    else:
        h1_hat = max(slope, 0.0)
        h0_hat = max(float(np.max(y - h1_hat * x)), 0.0)
    max_violation = max(0.0, float(np.max(y - (h0_hat + h1_hat * x))))
    return H0H1Fit(h0_hat=h0_hat, h1_hat=h1_hat, r_squared=r_squared,
                   max_violation=max_violation, mode=mode, rho=rho)


@dataclass(frozen=True)
class CertViolation:
    """One sampled point whose curvature exceeded the certified bound."""

    index: int
    loss: float
    smoothness: float
    bound: float
    excess: float


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of a pointwise certificate check over a sampled region."""

    n_points: int
    tol: float
    worst_margin: float
    violations: tuple[CertViolation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def verify_certificate(obj: Objective, cert: SmoothnessCertificate,
                       sampler: Sampler, n_points: int = 500,
                       tol: float | None = None, seed: int = 0) -> CertificateReport:
    """Check ||H(w)|| <= h0 + h1 * gap**rho + tol at region-sampled points.

    ``sampler(rng)`` must yield points inside the certificate's region.  The
    default tolerance scales with the certificate, 1e-6 * (1 + h0).  Analytic
    Hessians are used when the objective provides them; finite differences
    otherwise.
    """
    if tol is None:
        tol = 1e-6 * (1.0 + cert.h0)
    rng = np.random.Generator(np.random.PCG64(seed))
    violations: list[CertViolation] = []
    worst = -math.inf
    for i in range(n_points):
        w = sampler(rng)
        loss = float(obj.value(w))
        if obj.hessian is not None:
            smooth = float(np.max(np.abs(np.linalg.eigvalsh(obj.hessian(w)))))
        else:
            smooth = hessian_spectral_norm(obj, w, seed=seed + i)
        bound = cert.bound(loss)
        margin = smooth - bound
        worst = max(worst, margin)
        if margin > tol:
            violations.append(CertViolation(index=i, loss=loss,
                                            smoothness=smooth, bound=bound,
                                            excess=margin))
    return CertificateReport(n_points=n_points, tol=tol, worst_margin=worst,
                             violations=tuple(violations))


def box_sampler(obj: Objective, radius: float | None = None) -> Sampler:
    """Uniform sampler over the box [-R, R]^dim.

    R defaults to the objective's advertised ``sample_radius`` (chosen by the
    scalar constructions to keep their exponential tails within safe range).
    """
    r = float(obj.info["sample_radius"]) if radius is None else float(radius)
    shapes = obj.shapes
    dim = obj.dim

    def sample(rng: np.random.Generator) -> ParamPoint:
        return ParamPoint(rng.uniform(-r, r, size=dim), shapes)

    return sample


def gaussian_sampler(obj: Objective, scale: float = 1.0) -> Sampler:
    """Standard-normal sampler (times ``scale``) for unconstrained regions."""
    shapes = obj.shapes
    dim = obj.dim

    def sample(rng: np.random.Generator) -> ParamPoint:
        return ParamPoint(scale * rng.standard_normal(dim), shapes)

    return sample


def balanced_sampler(layer_dims: Sequence[int],
                     scale_range: tuple[float, float] = (0.5, 2.5)) -> Sampler:
    """Strongly balanced weight chains with randomized singular profiles."""
    dims = tuple(int(n) for n in layer_dims)
    lo, hi = scale_range

    def sample(rng: np.random.Generator) -> ParamPoint:
        scale = float(rng.uniform(lo, hi))
        seed = int(rng.integers(0, 2**63 - 1))
        return make_balanced_init(dims, mode="strong", scale=scale, seed=seed)

    return sample


def floor_sampler(layer_dims: Sequence[int], floors: Sequence[float | None],
                  norm_range: tuple[float, float] = (1.6, 2.6),
                  cap: int = REJECTION_CAP) -> Sampler:
    """Weakly balanced chains with per-layer lambda_min floors, by rejection.

    ``floors[i]`` (None = unconstrained) lower-bounds lambda_min(W_i^T W_i)
    for layer i; every layer is rescaled to one shared Frobenius norm drawn
    from ``norm_range``.  Exceeding ``cap`` attempts for any layer raises
    ``SamplerError``.
    """
    dims = tuple(int(n) for n in layer_dims)
    n_layers = len(dims) - 1
    floor_list = list(floors) + [None] * (n_layers - len(list(floors)))

    def sample(rng: np.random.Generator) -> ParamPoint:
        norm = float(rng.uniform(*norm_range))
        named = []
        for i in range(n_layers):
            need = floor_list[i]
            for _ in range(cap):
                w = rng.standard_normal((dims[i], dims[i + 1]))
                w *= norm / float(np.linalg.norm(w))
                if need is None:
                    break
                if float(np.linalg.eigvalsh(w.T @ w)[0]) >= need:
                    break
            else:
                raise SamplerError(
                    f"layer {i + 1}: no point with lambda_min >= {need} found "
                    f"in {cap} attempts at norm {norm:.3g}"
                )
            named.append((f"W{i + 1}", w))
        return ParamPoint.from_arrays(named)

    return sample
