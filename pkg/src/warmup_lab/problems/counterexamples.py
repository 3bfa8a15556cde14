"""Objectives whose curvature/gradient ratio defeats gradient-based bounds.

Each construction exposes a ``witness`` family: ``witness(m)`` returns a
point where the ratio ||H|| / (1 + ||grad||) is large and growing in m,
showing that no bound of the form L0 + L1*||grad|| can hold globally even
though a loss-based curvature bound may.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import Array, Objective, ParamPoint
from ..errors import ConstructionError

__all__ = ["make_counterexample", "COUNTEREXAMPLE_KINDS"]

COUNTEREXAMPLE_KINDS = (
    "sum_sin_square",
    "affine_cos_exp",
    "two_layer_l2",
    "balanced_two_layer",
)

# Tolerance for the adaptive Simpson quadrature used by sum_sin_square.
_QUAD_TOL = 1e-11


def _adaptive_simpson(fn, a: float, b: float, tol: float = _QUAD_TOL,
                      max_depth: int = 40) -> float:
    """Classic recursive Simpson with Richardson acceptance test."""

    def simpson(lo: float, hi: float, flo: float, fmid: float, fhi: float):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = fn(lm)
        frm = fn(rm)
        left = simpson(lo, mid, flo, flm, fmid)
        right = simpson(mid, hi, fmid, frm, fhi)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return (
            recurse(lo, mid, flo, flm, fmid, left, eps / 2.0, depth + 1)
            + recurse(mid, hi, fmid, frm, fhi, right, eps / 2.0, depth + 1)
        )

    if a == b:
        return 0.0
    fa, fb = fn(a), fn(b)
    fm = fn(0.5 * (a + b))
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def _scalar_ce(name: str, f, fp, fpp, witness_w) -> Objective:
    def value(w: ParamPoint) -> float:
        return f(float(w.data[0]))

    def gradient(w: ParamPoint) -> Array:
        return np.array([fp(float(w.data[0]))])

    def hessian(w: ParamPoint) -> Array:
        return np.array([[fpp(float(w.data[0]))]])

    def witness(m: int) -> ParamPoint:
        return ParamPoint.scalar(witness_w(m))

    return Objective(
        name=name,
        dim=1,
        shapes=(("w", (1,)),),
        value=value,
        gradient=gradient,
        hessian=hessian,
        witness=witness,
    )


def _make_sum_sin_square() -> Objective:
    """Sum of two tame terms whose oscillations reinforce: f' = 2 sin(w^2).

    Each summand has derivative ±w + sin(w^2) (curvature bounded by
    3 + 3|gradient|); the sum's curvature 4w cos(w^2) grows linearly in w
    while its gradient stays in [-2, 2].  Witnesses at w_m = sqrt(m*pi).
    """
    cache: dict[float, float] = {}

    def f(w: float) -> float:
        key = round(w, 12)
        if key not in cache:
            cache[key] = _adaptive_simpson(
                lambda u: 2.0 * math.sin(u * u), 0.0, w
            )
        return cache[key]

    def fp(w: float) -> float:
        return 2.0 * math.sin(w * w)

    def fpp(w: float) -> float:
        return 4.0 * w * math.cos(w * w)

    return _scalar_ce(
        "sum_sin_square", f, fp, fpp,
        witness_w=lambda m: math.sqrt(m * math.pi),
    )


def _make_affine_cos_exp() -> Objective:
    """f(w) = cos(w) e^w: a benign 2-D function after an affine squeeze.

    The parent g(y1, y2) = cos(y1) e^{y1} e^{y2} has curvature controlled by
    its gradient; restricting to y1 = y2 = w doubles the exponent's growth
    against the same oscillation, and at w_m = pi/4 + 2 pi m the gradient
    vanishes while curvature ~ e^w explodes.
    """

    def f(w: float) -> float:
        if w > 700.0:
            return math.inf
        return math.cos(w) * math.exp(w)

    def fp(w: float) -> float:
        if w > 700.0:
            return math.inf
        return math.exp(w) * (math.cos(w) - math.sin(w))

    def fpp(w: float) -> float:
        if w > 700.0:
            return math.inf
        return -2.0 * math.sin(w) * math.exp(w)

    return _scalar_ce(
        "affine_cos_exp", f, fp, fpp,
        witness_w=lambda m: 0.25 * math.pi + 2.0 * math.pi * m,
    )


def _make_two_layer_l2(lam1: float, lam2: float) -> Objective:
    """f(u, v) = (u tanh(v))^2/2 + lam1 u^2/2 + lam2 v^2/2.

    Along the ray v = 0 the gradient is (lam1 u, 0) — tiny for small lam1 —
    while the (v, v) curvature is u^2 + lam2.  Witness(m) puts u = 10 m.
    """
    if lam1 <= 0 or lam2 <= 0:
        raise ConstructionError("lam1 and lam2 must be positive")

    def parts(w: ParamPoint) -> tuple[float, float]:
        return float(w.data[0]), float(w.data[1])

    def value(w: ParamPoint) -> float:
        u, v = parts(w)
        s = math.tanh(v)
        return 0.5 * (u * s) ** 2 + 0.5 * lam1 * u * u + 0.5 * lam2 * v * v

    def gradient(w: ParamPoint) -> Array:
        u, v = parts(w)
        s = math.tanh(v)
        sp = 1.0 - s * s
        return np.array([
            u * s * s + lam1 * u,
            u * u * s * sp + lam2 * v,
        ])

    def hessian(w: ParamPoint) -> Array:
        u, v = parts(w)
        s = math.tanh(v)
        sp = 1.0 - s * s
        spp = -2.0 * s * sp
        return np.array([
            [s * s + lam1, 2.0 * u * s * sp],
            [2.0 * u * s * sp, u * u * (sp * sp + s * spp) + lam2],
        ])

    def witness(m: int) -> ParamPoint:
        return ParamPoint.from_arrays([("w", np.array([10.0 * m, 0.0]))])

    return Objective(
        name="two_layer_l2",
        dim=2,
        shapes=(("w", (2,)),),
        value=value,
        gradient=gradient,
        hessian=hessian,
        witness=witness,
        info={"lam1": float(lam1), "lam2": float(lam2)},
    )


def _make_balanced_two_layer() -> Objective:
    """||Y - W1 W2||^2 stationary family with unbounded curvature.

    X = I_3, Y = diag(1, 2, 3).  The witness curve W1(t), W2(t) keeps the
    gradient exactly zero (in floating point too) while the Hessian grows
    like 2 t^2; witness(m) uses t = m + 1.
    """
    y = np.diag([1.0, 2.0, 3.0])

    def split(w: ParamPoint) -> tuple[Array, Array]:
        return w.block("W1"), w.block("W2")

    def value(w: ParamPoint) -> float:
        w1, w2 = split(w)
        return float(np.sum((y - w1 @ w2) ** 2))

    def gradient(w: ParamPoint) -> Array:
        w1, w2 = split(w)
        r = y - w1 @ w2
        return np.concatenate([
            (-2.0 * r @ w2.T).ravel(),
            (-2.0 * w1.T @ r).ravel(),
        ])

    def hessian(w: ParamPoint) -> Array:
        w1, w2 = split(w)
        r = y - w1 @ w2
        n1, n2 = w1.size, w2.size
        dim = n1 + n2
        out = np.zeros((dim, dim))
        # exact bilinear form: d2f[(E1,E2),(F1,F2)] =
        #   2<E1 W2 + W1 E2, F1 W2 + W1 F2> - 2<R, E1 F2 + F1 E2>
        basis = []
        for i in range(n1):
            e1 = np.zeros(n1)
            e1[i] = 1.0
            basis.append((e1.reshape(w1.shape), np.zeros_like(w2)))
        for j in range(n2):
            e2 = np.zeros(n2)
            e2[j] = 1.0
            basis.append((np.zeros_like(w1), e2.reshape(w2.shape)))
        prods = [e1 @ w2 + w1 @ e2 for e1, e2 in basis]
        for a, (ea1, ea2) in enumerate(basis):
            for b in range(a, len(basis)):
                eb1, eb2 = basis[b]
                val = 2.0 * float(np.sum(prods[a] * prods[b])) \
                    - 2.0 * float(np.sum(r * (ea1 @ eb2 + eb1 @ ea2)))
                out[a, b] = val
                out[b, a] = val
        return out

    def witness(m: int) -> ParamPoint:
        t = float(m + 1)
        w1 = np.zeros((3, 2))
        w1[0, 0] = t
        w2 = np.zeros((2, 3))
        w2[0, 0] = 1.0 / t
        w2[1, 0] = math.sqrt(t * t - 1.0 / (t * t))
        return ParamPoint.from_arrays([("W1", w1), ("W2", w2)])

    return Objective(
        name="balanced_two_layer",
        dim=12,
        shapes=(("W1", (3, 2)), ("W2", (2, 3))),
        value=value,
        gradient=gradient,
        hessian=hessian,
        witness=witness,
    )


def make_counterexample(kind: str, lam1: float = 1e-12,
                        lam2: float = 1e-12) -> Objective:
    """Build one of the named counterexample objectives.

    ``lam1``/``lam2`` only apply to ``two_layer_l2`` (vanishing
    regularization keeps the witness gradient tiny).
    """
    if kind == "sum_sin_square":
        return _make_sum_sin_square()
    if kind == "affine_cos_exp":
        return _make_affine_cos_exp()
    if kind == "two_layer_l2":
        return _make_two_layer_l2(lam1, lam2)
    if kind == "balanced_two_layer":
        return _make_balanced_two_layer()
    raise ConstructionError(
        f"unknown counterexample {kind!r}; choose from {COUNTEREXAMPLE_KINDS}"
    )
