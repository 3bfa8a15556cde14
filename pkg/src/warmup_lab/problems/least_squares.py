"""Overparameterized least squares with an exact projector onto solutions."""

from __future__ import annotations

import numpy as np

from ..core import Array, Objective, ParamPoint
from ..errors import ConstructionError
from .types import SmoothnessCertificate

__all__ = ["make_interpolating_least_squares"]


def make_interpolating_least_squares(n: int, d: int, seed: int = 0) -> Objective:
    """Mean of n squared linear residuals in d > n dimensions, optimum 0.

    Data: columns x_i ~ N(0, I_d), planted w_dagger ~ N(0, I_d), targets
    y = X^T w_dagger, so every component attains 0 simultaneously.  The
    solution set is the affine subspace {w : X^T w = y}; ``project_solution``
    is the exact Euclidean projector onto it.  The certificate
    (max_i ||x_i||^2, 0) bounds the Hessian of the full loss and of every
    batch mean simultaneously.
    """
    if not (1 <= n < d):
        raise ConstructionError(
            f"need d > n >= 1 for an interpolating system, got n={n}, d={d}"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal((d, n))
    w_dagger = rng.standard_normal(d)
    y = x.T @ w_dagger
    gram = x.T @ x  # (n, n), full rank with probability one
    if np.linalg.matrix_rank(gram) < n:
        raise ConstructionError("sampled design is rank deficient; reseed")
    h0 = float(np.max(np.sum(x * x, axis=0)))
    shapes = (("w", (d,)),)

    def value(w: ParamPoint) -> float:
        r = x.T @ w.data - y
        return 0.5 * float(np.mean(r * r))

    def gradient(w: ParamPoint) -> Array:
        r = x.T @ w.data - y
        return x @ r / n

    def value_i(w: ParamPoint, i: int) -> float:
        r = float(x[:, i] @ w.data - y[i])
        return 0.5 * r * r

    def gradient_i(w: ParamPoint, i: int) -> Array:
        r = float(x[:, i] @ w.data - y[i])
        return r * x[:, i]

    def hessian(w: ParamPoint) -> Array:
        return x @ x.T / n

    def project(w: ParamPoint) -> ParamPoint:
        r = x.T @ w.data - y
        return w.with_data(w.data - x @ np.linalg.solve(gram, r))

    return Objective(
        name="interpolating_least_squares",
        dim=d,
        shapes=shapes,
        value=value,
        gradient=gradient,
        hessian=hessian,
        f_star=0.0,
        n_components=n,
        value_i=value_i,
        gradient_i=gradient_i,
        component_f_star=0.0,
        project_solution=project,
        certificate=SmoothnessCertificate(
            h0=h0, h1=0.0, f_star=0.0, region="unconstrained",
        ),
        info={"n": float(n), "d": float(d), "h0": h0},
    )
