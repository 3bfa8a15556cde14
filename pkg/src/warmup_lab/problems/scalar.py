"""One-dimensional constructions with exactly known curvature behavior.

These are the workhorses for step-size threshold experiments: a quadratic
core capped by exponential tails (curvature grows linearly with the loss),
a long flat "runway" that any small constant step must traverse, and a
gradient-dominated variant with an exactly known PL constant.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import Array, Objective, ParamPoint
from ..errors import ConstructionError
from .types import SmoothnessCertificate

__all__ = [
    "make_exp_quadratic",
    "make_runway",
    "make_pl_lower_bound",
    "make_pl_sin_quadratic",
]

# Loss ceiling used to pick certificate-sampling radii: keeps the exponental
# tails well inside float range so FD curvature probes stay accurate.
_SAMPLE_LOSS_CAP = 1e4

# PL-constant grid pinned by contract: uniform on [-10, 10], origin excluded.
_PL_GRID_POINTS = 20_001
_PL_GRID_EXCLUSION = 1e-8


def _exp(x: float) -> float:
    """exp saturating to +inf (divergent runs must not raise)."""
    if x > 709.0:
        return math.inf
    return math.exp(x)


def _scalar_objective(name: str, f, fp, fpp, **kw) -> Objective:
    def value(w: ParamPoint) -> float:
        return f(float(w.data[0]))

    def gradient(w: ParamPoint) -> Array:
        return np.array([fp(float(w.data[0]))])

    def hessian(w: ParamPoint) -> Array:
        return np.array([[fpp(float(w.data[0]))]])

    def project(w: ParamPoint) -> ParamPoint:
        return ParamPoint.scalar(0.0)

    return Objective(
        name=name,
        dim=1,
        shapes=(("w", (1,)),),
        value=value,
        gradient=gradient,
        hessian=hessian,
        project_solution=project,
        **kw,
    )


def make_exp_quadratic(h1: float, m_value: float | None = None) -> Objective:
    """Quadratic core with exponential tails; curvature = 2*h1*loss - h1.

    f(w) = h1 w^2/2 + 1/2 on |w| <= 1/sqrt(h1), exp(sqrt(h1)|w| - 1) outside;
    C^2 at the junctions, optimum 1/2 at w = 0.  Satisfies
    ``|f''| <= h1/2 + h1*f`` with equality at w = 0 and on the tails.

    ``m_value`` (> 1) picks the recommended start: f(w0_recommended) = m_value.
    """
    if h1 <= 0:
        raise ConstructionError(f"h1 must be positive, got {h1}")
    rt = math.sqrt(h1)
    r = 1.0 / rt

    def f(w: float) -> float:
        if abs(w) <= r:
            return 0.5 * h1 * w * w + 0.5
        return _exp(rt * abs(w) - 1.0)

    def fp(w: float) -> float:
        if abs(w) <= r:
            return h1 * w
        return math.copysign(rt * _exp(rt * abs(w) - 1.0), w)

    def fpp(w: float) -> float:
        if abs(w) <= r:
            return h1
        return h1 * _exp(rt * abs(w) - 1.0)

    info = {
        "h1": float(h1),
        "sample_radius": (math.log(_SAMPLE_LOSS_CAP) + 1.0) / rt,
    }
    if m_value is not None:
        if m_value <= 1.0:
            raise ConstructionError(
                f"m_value must exceed 1 (tail regime), got {m_value}"
            )
        info["w0_recommended"] = (math.log(m_value) + 1.0) / rt
    return _scalar_objective(
        "exp_quadratic", f, fp, fpp,
        f_star=0.5,
        certificate=SmoothnessCertificate(
            h0=0.5 * h1, h1=h1, f_star=0.0, region="unconstrained",
        ),
        info=info,
    )


def make_runway(h0: float, h1: float, delta: float) -> Objective:
    """Quadratic basin, flat plateau of slope m = sqrt(2 h0 delta), exp tail.

    f is C^1 (curvature jumps at the junctions), f(X1) = delta, f(X2) = 1,
    optimum 0 at w = 0.  A constant-step method entering at X2 must spend
    ~ (X2-X1)/(eta*m) iterations on the plateau.
    """
    if h0 <= 0 or h1 <= 0:
        raise ConstructionError("h0 and h1 must be positive")
    if not (0.0 < delta < 1.0):
        raise ConstructionError(f"delta must lie in (0,1), got {delta}")
    m = math.sqrt(2.0 * h0 * delta)
    x1 = math.sqrt(2.0 * delta / h0)
    x2 = x1 + (1.0 - delta) / m
    rt = math.sqrt(h1)
    a = m / rt
    b = 1.0 - a
    if a > 1.0:
        raise ConstructionError(
            "exponential tail needs m <= sqrt(h1); decrease delta or h0"
        )

    def f(w: float) -> float:
        aw = abs(w)
        if aw <= x1:
            return 0.5 * h0 * w * w
        if aw <= x2:
            return m * (aw - x1) + delta
        return a * _exp(rt * (aw - x2)) + b

    def fp(w: float) -> float:
        aw = abs(w)
        if aw <= x1:
            return h0 * w
        if aw <= x2:
            return math.copysign(m, w)
        return math.copysign(a * rt * _exp(rt * (aw - x2)), w)

    def fpp(w: float) -> float:
        aw = abs(w)
        if aw <= x1:
            return h0
        if aw <= x2:
            return 0.0
        return a * h1 * _exp(rt * (aw - x2))

    return _scalar_objective(
        "runway", f, fp, fpp,
        f_star=0.0,
        certificate=SmoothnessCertificate(
            h0=h0, h1=h1, f_star=0.0, region="unconstrained",
        ),
        info={
            "h0": float(h0),
            "h1": float(h1),
            "delta": float(delta),
            "x1": x1,
            "x2": x2,
            "slope_m": m,
            "sample_radius": x2 + (math.log(_SAMPLE_LOSS_CAP) + 1.0) / rt,
        },
    )


def make_pl_lower_bound(c0: float, mu: float, h1: float) -> Objective:
    """Gradient-dominated basin (PL constant exactly mu) with an exp tail.

    f = mu w^2/2 up to w_c = sqrt(2 c0/mu) (where f = c0), then an
    exponential continuation with matched value and slope.
    """
    if c0 <= 0 or mu <= 0 or h1 <= 0:
        raise ConstructionError("c0, mu, h1 must all be positive")
    wc = math.sqrt(2.0 * c0 / mu)
    rt = math.sqrt(h1)
    a = math.sqrt(2.0 * c0 * mu / h1)
    b = c0 - a
    if b < -0.5 * a:
        # keeps the PL ratio minimized on the core (see mu below)
        raise ConstructionError(
            "tail too heavy: need c0 >= mu/(2 h1) for the PL constant "
            "to stay mu"
        )

    def f(w: float) -> float:
        aw = abs(w)
        if aw <= wc:
            return 0.5 * mu * w * w
        return a * _exp(rt * (aw - wc)) + b

    def fp(w: float) -> float:
        aw = abs(w)
        if aw <= wc:
            return mu * w
        return math.copysign(a * rt * _exp(rt * (aw - wc)), w)

    def fpp(w: float) -> float:
        aw = abs(w)
        if aw <= wc:
            return mu
        return a * h1 * _exp(rt * (aw - wc))

    h0_cert = mu + h1 * max(0.0, a - c0)
    return _scalar_objective(
        "pl_lower_bound", f, fp, fpp,
        f_star=0.0,
        certificate=SmoothnessCertificate(
            h0=h0_cert, h1=h1, f_star=0.0, region="unconstrained",
        ),
        info={
            "mu": float(mu),
            "c0": float(c0),
            "h1": float(h1),
            "w_c": wc,
            "sample_radius": wc + (math.log(_SAMPLE_LOSS_CAP) + 1.0) / rt,
        },
    )


def make_pl_sin_quadratic() -> Objective:
    """f(w) = w^2 + 3 sin^2(w): nonconvex, gradient dominated, optimum 0.

    The PL constant is estimated at construction as the minimum of
    f'^2/(2f) over a fixed 20001-point grid on [-10, 10] (the origin's
    removable singularity excluded); outside that window the ratio is
    monotonically larger.  Stored in ``info["mu"]``.
    """

    def f(w: float) -> float:
        return w * w + 3.0 * math.sin(w) ** 2

    def fp(w: float) -> float:
        return 2.0 * w + 3.0 * math.sin(2.0 * w)

    def fpp(w: float) -> float:
        return 2.0 + 6.0 * math.cos(2.0 * w)

    grid = np.linspace(-10.0, 10.0, _PL_GRID_POINTS)
    grid = grid[np.abs(grid) > _PL_GRID_EXCLUSION]
    fv = grid**2 + 3.0 * np.sin(grid) ** 2
    gv = 2.0 * grid + 3.0 * np.sin(2.0 * grid)
    mu = float(np.min(gv**2 / (2.0 * fv)))

    return _scalar_objective(
        "pl_sin_quadratic", f, fp, fpp,
        f_star=0.0,
        certificate=SmoothnessCertificate(
            h0=8.0, h1=0.25, f_star=0.0, region="unconstrained",
        ),
        info={"mu": mu, "sample_radius": 10.0},
    )
