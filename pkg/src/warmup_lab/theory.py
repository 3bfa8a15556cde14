"""Closed-form curvature constants, closure transforms, iteration-count
predictors, and inequality checkers.

The constant calculators evaluate gnarly closed forms; each is transcribed
twice in deliberately different algebraic arrangements and the two results
must agree to 1e-12 relative before a certificate is emitted (the
double-entry rule — a typo in one transcription cannot silently ship).

Iteration predictors come in two families: ``upper_*`` bounds that measured
runs must stay below, and ``lower_*`` bounds that constant-step runs on the
worst-case constructions must exceed.  The checkers audit the inequalities
the step-size theory rests on, pointwise or along recorded trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np

from .core import Array, Objective, ParamPoint
from .errors import ConstructionError, InconsistencyError
from .optimize import Trajectory
from .problems.types import ActivationSpec, DatasetPair, SmoothnessCertificate

__all__ = [
    "BoundPrediction",
    "CheckViolation",
    "CheckReport",
    "deep_linear_constants",
    "semi_linear_constants",
    "deep_leaky_constants",
    "two_layer_mse_constants",
    "two_layer_ce_constants",
    "l0l1_to_h0h1",
    "sum_params",
    "affine_params",
    "rho_reduction",
    "predict_bound",
    "check_gradient_bound",
    "check_descent_step",
    "check_condition",
    "check_linear_decrease",
    "BOUND_KINDS",
]

# Relative disagreement between the two transcriptions that aborts a
# calculator instead of emitting a certificate.
DOUBLE_ENTRY_RTOL = 1e-12

BOUND_KINDS = (
    "upper_aiming",
    "upper_pl",
    "upper_nonconvex",
    "lower_nonconvex",
    "lower_convex",
    "lower_pl",
)


# ---------------------------------------------------------------------------
# Double-entry plumbing and the nu = exp(-nu) fixed point.
# ---------------------------------------------------------------------------

def _double_entry(name: str, first: Sequence[float],
                  second: Sequence[float]) -> None:
    for a, b in zip(first, second):
        if abs(a - b) > DOUBLE_ENTRY_RTOL * max(abs(a), abs(b), 1.0):
            raise InconsistencyError(
                f"{name}: transcriptions disagree ({a!r} vs {b!r})"
            )


@lru_cache(maxsize=1)
def _nu() -> float:
    """The unique positive root of nu = exp(-nu), about 0.567143."""
    nu = 0.5
    for _ in range(200):
        nxt = 0.5 * (nu + math.exp(-nu))  # damped fixed point
        if abs(nxt - nu) < 1e-16:
            nu = nxt
            break
        nu = nxt
    if abs(nu - math.exp(-nu)) > 1e-14:
        raise InconsistencyError("fixed point nu = exp(-nu) did not converge")
    return nu


# ---------------------------------------------------------------------------
# Constant calculators.
# ---------------------------------------------------------------------------

def _check_dataset_for_constants(data: DatasetPair) -> None:
    if data.lambda_min <= 0:
        raise ConstructionError(
            "input Gram matrix X X^T is singular (lambda_min "
            f"{data.lambda_min}); the constants divide by it"
        )


def _deep_linear_entry_a(l: int, d: int, x2: float, yf: float,
                         lam: float) -> tuple[float, float]:
    base = 2.0 * d ** ((l - 1) / 2.0)
    e_big = (2.0 * l - 2.0) / l          # exponent pair on the squared term
    e_small = (l - 2.0) / l
    inv_big = (1.0 / lam) ** (e_big / 2.0)
    inv_small = (1.0 / lam) ** (e_small / 2.0)
    bar_h0 = 4.0 * l * l * (
        base ** e_big * inv_big * yf ** e_big * x2 * x2
        + base ** e_small * inv_small * yf ** e_small * x2
    )
    h1 = 4.0 * l * l * (
        base ** e_big * inv_big * x2 * x2
        + base ** e_small * inv_small * x2
        + base ** e_small * inv_small * yf ** e_small * x2
    )
    return bar_h0, h1

def _deep_linear_entry_b(l: int, d: int, x2: float, yf: float,
                         lam: float) -> tuple[float, float]:
    # same constants, regrouped: powers written as exp(c*log(.)) on the
    # combined products rather than factor-by-factor
    def p(val: float, num: float, den: float) -> float:
        return math.exp((num / den) * math.log(val)) if val != 1.0 else 1.0

    base = 2.0 * p(float(d), l - 1, 2)
    big_combo = p(base * base * yf * yf / lam, l - 1, l)      # [base^2 yf^2/lam]^((l-1)/l)
    big_noyf = p(base * base / lam, l - 1, l)
    small_combo = p(base * base * yf * yf / lam, l - 2, 2 * l)
    small_noyf = p(base * base / lam, l - 2, 2 * l)
    bar_h0 = 4.0 * l * l * (big_combo * x2 * x2 + small_combo * x2)
    h1 = 4.0 * l * l * (
        big_noyf * x2 * x2 + small_noyf * x2 + small_combo * x2
    )
    return bar_h0, h1


def deep_linear_constants(data: DatasetPair, layer_dims: Sequence[int],
                          f_star: float | None = None) -> SmoothnessCertificate:
    """Curvature certificate for the deep linear squared loss on strongly
    balanced weights.

    Uses depth, input dimension, ||X||_2, ||Y||_F, and lambda_min(X X^T).
    ``f_star`` shifts between the gap form and the raw-loss form of the same
    bound; None emits the raw-loss (baseline 0) certificate, marked
    conservative.
    """
    dims = [int(n) for n in layer_dims]
    l = len(dims) - 1
    if l < 2:
        raise ConstructionError(f"need depth >= 2, got {l}")
    _check_dataset_for_constants(data)
    d = dims[-1]
    args = (l, d, data.x_spectral, data.y_frob, data.lambda_min)
    a = _deep_linear_entry_a(*args)
    b = _deep_linear_entry_b(*args)
    _double_entry("deep_linear_constants", a, b)
    bar_h0, h1 = a
    fs = 0.0 if f_star is None else float(f_star)
    h0 = 2.0 * bar_h0 + h1 * (1.0 + fs)
    region = "strongly_balanced"
    if f_star is None:
        region += ";conservative_baseline"
    return SmoothnessCertificate(h0=h0, h1=h1, f_star=fs, rho=1.0,
                                 region=region)


def _semi_linear_entry_a(l: int, d: int, x2: float, yf2: float, lam: float,
                         b: float, h: float) -> tuple[float, float]:
    e = (l - 2.0) / (2.0 * l - 2.0)
    core = h * b * b * lam
    dpow = float(d) ** (l - 2)
    h0 = l * l * (
        16.0 * dpow * yf2 / core * x2 * x2
        + 2.0 * (4.0 * dpow * yf2 / core) ** e * x2
        + 2.0 * (4.0 * dpow / core) ** e * x2
    )
    h1 = l * l * (
        16.0 * dpow / core * x2 * x2
        + 2.0 * (4.0 * dpow * yf2 / core) ** e * x2
        + 2.0 * (4.0 * dpow / core) ** e * x2
    )
    return h0, h1

def _semi_linear_entry_b(l: int, d: int, x2: float, yf2: float, lam: float,
                         b: float, h: float) -> tuple[float, float]:
    # regrouped: shared tail terms computed once from ratios
    core = (h * b * b) * lam
    dpow = math.prod([float(d)] * (l - 2)) if l > 2 else 1.0
    ratio_y = 4.0 * dpow * yf2 / core
    ratio_1 = 4.0 * dpow / core
    e = (l - 2.0) / (2.0 * l - 2.0)
    tail = 2.0 * x2 * (ratio_y ** e + ratio_1 ** e)
    h0 = l * l * (4.0 * ratio_y * x2 * x2 + tail)
    h1 = l * l * (4.0 * ratio_1 * x2 * x2 + tail)
    return h0, h1


def semi_linear_constants(data: DatasetPair, layer_dims: Sequence[int],
                          b: float, h: float) -> SmoothnessCertificate:
    """Certificate for the squared loss with one leaky activation wrapping
    the whole linear chain, on weakly balanced weights whose outer layer has
    lambda_min(W1^T W1) >= h.

    ``b`` is the activation's negative-side slope in (0, 1]; ``h`` the
    singular-value floor.
    """
    dims = [int(n) for n in layer_dims]
    l = len(dims) - 1
    if l < 2:
        raise ConstructionError(f"need depth >= 2, got {l}")
    if not (0.0 < b <= 1.0):
        raise ConstructionError(f"slope b must lie in (0, 1], got {b}")
    if h <= 0:
        raise ConstructionError(f"floor h must be positive, got {h}")
    _check_dataset_for_constants(data)
    d = dims[-1]
    yf2 = data.y_frob ** 2
    args = (l, d, data.x_spectral, yf2, data.lambda_min, b, h)
    first = _semi_linear_entry_a(*args)
    second = _semi_linear_entry_b(*args)
    _double_entry("semi_linear_constants", first, second)
    h0, h1 = first
    return SmoothnessCertificate(
        h0=h0, h1=h1, f_star=0.0, rho=1.0,
        region=f"weakly_balanced;lambda_min(W1^T W1)>={h:g}",
    )


def _deep_leaky_entry_a(l: int, x2: float, yf: float, lam: float,
                        slopes: Sequence[float],
                        floors: Sequence[float]) -> tuple[float, float]:
    denom = math.sqrt(lam)
    d_prod = lam
    for h_i, b_i in zip(floors, slopes):
        denom *= math.sqrt(h_i) * b_i
        d_prod *= h_i * b_i * b_i
    g = 2.0 * yf / denom
    grown = 4.0 * l * l * g ** (2 * l - 2) * x2 * x2
    h0 = (
        2.0 * l * (l - 1) * g ** (l - 2) * x2
        + grown
        + 2.0 * l * (l - 1) * (4.0 / d_prod) ** ((l - 2) / 2.0) * x2
        + 2.0 * l * l * (4.0 / d_prod) ** ((2 * l - 2) / 2.0) * x2 * x2
    )
    h1 = h0 - grown
    return h0, h1

def _deep_leaky_entry_b(l: int, x2: float, yf: float, lam: float,
                        slopes: Sequence[float],
                        floors: Sequence[float]) -> tuple[float, float]:
    # h1 built from its own three terms instead of h0 minus the grown term
    d_prod = lam * math.prod(h * s * s for h, s in zip(floors, slopes))
    g2 = 4.0 * yf * yf / d_prod        # g^2 without the intermediate sqrt
    qtr = 4.0 / d_prod
    term_lin = 2.0 * l * (l - 1) * x2 * (g2 ** ((l - 2) / 2.0)
                                         + qtr ** ((l - 2) / 2.0))
    term_sq_flat = 2.0 * l * l * x2 * x2 * qtr ** (l - 1)
    h1 = term_lin + term_sq_flat
    h0 = h1 + 4.0 * l * l * x2 * x2 * g2 ** (l - 1)
    return h0, h1


def deep_leaky_constants(data: DatasetPair, layer_dims: Sequence[int],
                         slopes: Sequence[float],
                         h_list: Sequence[float]) -> SmoothnessCertificate:
    """Certificate for the per-junction leaky network: the bound grows as
    gap**(depth-1), so the certificate carries rho = depth - 1.

    Region: weakly balanced weights with lambda_min(W_i^T W_i) >= h_list[i]
    for every layer except the innermost.
    """
    dims = [int(n) for n in layer_dims]
    l = len(dims) - 1
    if l < 2:
        raise ConstructionError(f"need depth >= 2, got {l}")
    if len(slopes) != l - 1 or len(h_list) != l - 1:
        raise ConstructionError(
            f"need {l - 1} slopes and floors for depth {l}"
        )
    if any(not (0.0 < b <= 1.0) for b in slopes):
        raise ConstructionError("every slope must lie in (0, 1]")
    if any(h <= 0 for h in h_list):
        raise ConstructionError("every floor must be positive")
    _check_dataset_for_constants(data)
    args = (l, data.x_spectral, data.y_frob, data.lambda_min,
            tuple(float(b) for b in slopes), tuple(float(h) for h in h_list))
    first = _deep_leaky_entry_a(*args)
    second = _deep_leaky_entry_b(*args)
    _double_entry("deep_leaky_constants", first, second)
    h0, h1 = first
    floors = ",".join(f"{h:g}" for h in h_list)
    return SmoothnessCertificate(
        h0=h0, h1=h1, f_star=0.0, rho=float(l - 1),
        region=f"weakly_balanced;lambda_min(W_i^T W_i)>=[{floors}]",
    )


def _require_activation_constants(act: ActivationSpec) -> tuple[float, float, float]:
    if act.c1 is None or act.c2 is None or act.c3 is None:
        raise ConstructionError(
            f"activation {act.kind!r} lacks the derivative bounds c1/c2/c3"
        )
    return act.c1, act.c2, act.c3


def _two_layer_mse_entry_a(c1, c2, c3, x2, lam1, lam2):
    h0 = 4.0 * c2 * x2 + 2.0 * (lam1 + lam2)
    h1 = (
        4.0 / lam1 * (2.0 * c2 * c2 + c3 + 4.0 * c1 * c2) * x2 * x2
        + 8.0 / lam2 * (c1 * c1 + 2.0 * c1 * c2) * x2 * x2
        + 2.0 * c3 * x2 * x2
        + 4.0 * c2 * x2
    )
    return h0, h1

def _two_layer_mse_entry_b(c1, c2, c3, x2, lam1, lam2):
    h0 = 2.0 * (2.0 * c2 * x2 + lam1 + lam2)
    x2sq = x2 * x2
    h1 = x2sq * (
        (8.0 * c2 * c2 + 4.0 * c3 + 16.0 * c1 * c2) / lam1
        + (8.0 * c1 * c1 + 16.0 * c1 * c2) / lam2
        + 2.0 * c3
    ) + 4.0 * c2 * x2
    return h0, h1


def two_layer_mse_constants(act: ActivationSpec, x_spectral: float,
                            lam1: float, lam2: float) -> SmoothnessCertificate:
    """Certificate for the two-layer squared loss with L2 regularization.

    Unconstrained region: the regularizers themselves keep the weights in
    check, at the price of the 1/lambda factors (positive lambdas required).
    The bound's baseline is 0 (raw loss form).
    """
    if lam1 <= 0 or lam2 <= 0:
        raise ConstructionError("lam1 and lam2 must be positive")
    c1, c2, c3 = _require_activation_constants(act)
    a = _two_layer_mse_entry_a(c1, c2, c3, x_spectral, lam1, lam2)
    b = _two_layer_mse_entry_b(c1, c2, c3, x_spectral, lam1, lam2)
    _double_entry("two_layer_mse_constants", a, b)
    return SmoothnessCertificate(h0=a[0], h1=a[1], f_star=0.0, rho=1.0,
                                 region="unconstrained")


def _two_layer_ce_entry_a(c1, c2, c3, x2, lam1, lam2):
    h0 = lam1 + lam2
    h1 = (
        2.0 / lam1 * (c2 * c2 + c3 + 2.0 * c1 * c2) * x2 * x2
        + 2.0 / lam2 * (c1 * c1 + 2.0 * c1 * c2) * x2 * x2
        + 2.0 * c2 * x2
        + c3 * x2 * x2
    )
    return h0, h1

def _two_layer_ce_entry_b(c1, c2, c3, x2, lam1, lam2):
    h0 = lam2 + lam1
    x2sq = x2 * x2
    h1 = x2sq * (
        (2.0 * c2 * c2 + 2.0 * c3 + 4.0 * c1 * c2) / lam1
        + (2.0 * c1 * c1 + 4.0 * c1 * c2) / lam2
        + c3
    ) + 2.0 * c2 * x2
    return h0, h1


def two_layer_ce_constants(act: ActivationSpec, x_spectral: float,
                           lam1: float, lam2: float) -> SmoothnessCertificate:
    """Certificate for the two-layer binary cross-entropy loss with L2."""
    if lam1 <= 0 or lam2 <= 0:
        raise ConstructionError("lam1 and lam2 must be positive")
    c1, c2, c3 = _require_activation_constants(act)
    a = _two_layer_ce_entry_a(c1, c2, c3, x_spectral, lam1, lam2)
    b = _two_layer_ce_entry_b(c1, c2, c3, x_spectral, lam1, lam2)
    _double_entry("two_layer_ce_constants", a, b)
    return SmoothnessCertificate(h0=a[0], h1=a[1], f_star=0.0, rho=1.0,
                                 region="unconstrained")


# ---------------------------------------------------------------------------
# Closures: containment of gradient-based smoothness, sums, affine maps, and
# the rho > 1 reduction.
# ---------------------------------------------------------------------------

def l0l1_to_h0h1(l0: float, l1: float) -> tuple[float, float]:
    """Convert a gradient-based bound ||H|| <= l0 + l1*||grad|| to loss-based
    constants: h0 = l0 + l0*l1/nu, h1 = (4*l1**2 + nu*l1)/(2*nu).

    Monotone in both arguments; l1 = 0 maps a plain-smooth bound to itself.
    """
    if l0 < 0 or l1 < 0:
        raise ValueError("l0 and l1 must be non-negative")
    nu = _nu()
    h0 = l0 + l0 * l1 / nu
    h1 = (4.0 * l1 * l1 + nu * l1) / (2.0 * nu)
    return h0, h1


def sum_params(cert_f: SmoothnessCertificate, cert_g: SmoothnessCertificate,
               h_star: float) -> SmoothnessCertificate:
    """Certificate for f + g given certificates for the summands.

    ``h_star`` is the (known or lower-bounded) optimal value of the sum; it
    must be at least the sum of the parts' baselines.  h1 = max of the two,
    h0 picks up the baseline mismatch.
    """
    if cert_f.rho != 1.0 or cert_g.rho != 1.0:
        raise InconsistencyError("summation closure needs rho = 1 on both parts")
    if h_star < cert_f.f_star + cert_g.f_star - 1e-12:
        raise InconsistencyError(
            f"sum optimum {h_star} is below the parts' combined baseline "
            f"{cert_f.f_star + cert_g.f_star}"
        )
    h1 = max(cert_f.h1, cert_g.h1)
    h0 = (cert_f.h0 + cert_g.h0 + h1 * h_star
          - cert_f.h1 * cert_f.f_star - cert_g.h1 * cert_g.f_star)
    if h0 < 0:
        raise InconsistencyError(f"combined h0 came out negative ({h0})")
    region = cert_f.region if cert_f.region == cert_g.region \
        else f"{cert_f.region} & {cert_g.region}"
    return SmoothnessCertificate(h0=h0, h1=h1, f_star=float(h_star), rho=1.0,
                                 region=region)


def affine_params(cert_g: SmoothnessCertificate, a_matrix: Array,
                  f_star: float) -> SmoothnessCertificate:
    """Certificate for f(w) = g(A w + b) given g's certificate.

    ``f_star`` is f's optimal value; the composition cannot go below g's
    optimum, so f_star >= cert_g.f_star is required. Both constants scale by
    ||A||^2 and h0 absorbs the baseline shift.
    """
    if cert_g.rho != 1.0:
        raise InconsistencyError("affine closure needs rho = 1")
    if f_star < cert_g.f_star - 1e-12:
        raise InconsistencyError(
            f"composed optimum {f_star} is below the inner baseline "
            f"{cert_g.f_star}"
        )
    a2 = float(np.linalg.norm(np.asarray(a_matrix, dtype=np.float64), 2))
    h0 = a2 * a2 * (cert_g.h0 + cert_g.h1 * (f_star - cert_g.f_star))
    h1 = a2 * a2 * cert_g.h1
    return SmoothnessCertificate(h0=h0, h1=h1, f_star=float(f_star), rho=1.0,
                                 region=cert_g.region)


def rho_reduction(k0: float, k_rho: float, rho: float,
                  delta0: float) -> tuple[float, float]:
    """Reduce a gap**rho certificate to a plain rho = 1 pair valid on the
    sublevel set {f <= f(w0)}: (k0, k_rho * delta0**(rho - 1))."""
    if rho < 1.0:
        raise ValueError(f"rho must be >= 1, got {rho}")
    if delta0 <= 0:
        raise ValueError(f"initial gap must be positive, got {delta0}")
    return k0, k_rho * delta0 ** (rho - 1.0)


# ---------------------------------------------------------------------------
# Iteration-count predictors.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundPrediction:
    """A predicted iteration count with the inputs that produced it."""

    kind: str
    iters: float
    inputs: dict[str, float]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.iters) and self.iters >= 0):
            raise InconsistencyError(
                f"{self.kind}: predicted count {self.iters} is not a "
                "finite non-negative number"
            )


def _need(kind: str, inputs: dict[str, float], *names: str) -> list[float]:
    out = []
    for name in names:
        if name not in inputs or inputs[name] is None:
            raise ValueError(f"{kind} needs input {name!r}")
        out.append(float(inputs[name]))
    return out


def _log_gap_factor(kind: str, delta0: float) -> float:
    if math.log(delta0) + 1.0 <= 0.0:
        raise ValueError(
            f"{kind}: initial gap {delta0} too small (needs log(gap)+1 > 0)"
        )
    return delta0 / (math.log(delta0) + 1.0)


def predict_bound(kind: str, **inputs: float) -> BoundPrediction:
    """Evaluate one of the named iteration-count expressions.

    upper_aiming(h0, h1, dist0, eps, theta):
        20*h0*dist0^2/(theta^2*eps) + 40*h1*dist0^2/theta^2
    upper_pl(h0, h1, delta0, eps, mu):
        40*h1*delta0/mu + (20*h0/mu)*log(h0/(2*h1*eps)), clipped at 0
    upper_nonconvex(h0, h1, delta0, eps):
        20*(h0+2*h1*delta0)*delta0 / (eps^2 * (1 + h1*delta0/(2*h0+4*h1*delta0)))
        (the simplified form, valid once the count exceeds 6)
    lower_nonconvex(h1, delta0, eps):
        [h1*delta0/(log delta0 + 1)] * (delta0 - 2*eps^2)/(8*eps^2)
    lower_convex(h1, delta0, eps):
        [h1*delta0/(log delta0 + 1)] * (delta0 - eps)/(4*eps)
    lower_pl(h1, delta0, eps, mu):
        [h1/(4*mu)] * [delta0/(log delta0 + 1)] * log(delta0/eps)

    ``upper_*`` accept h1 = 0 where the terms vanish gracefully; ``lower_*``
    and upper_pl require h1 > 0 (they are vacuous otherwise).
    """
    if kind not in BOUND_KINDS:
        raise ValueError(f"unknown bound kind {kind!r}; choose from {BOUND_KINDS}")

    if kind == "upper_aiming":
        h0, h1, dist0, eps, theta = _need(kind, inputs, "h0", "h1", "dist0",
                                          "eps", "theta")
        if h0 <= 0 or h1 < 0 or eps <= 0 or dist0 < 0 or not 0 < theta <= 1:
            raise ValueError(f"{kind}: invalid inputs {inputs}")
        iters = (20.0 * h0 * dist0 ** 2 / (theta ** 2 * eps)
                 + 40.0 * h1 * dist0 ** 2 / theta ** 2)
    elif kind == "upper_pl":
        h0, h1, delta0, eps, mu = _need(kind, inputs, "h0", "h1", "delta0",
                                        "eps", "mu")
        if h0 <= 0 or h1 <= 0 or delta0 < 0 or eps <= 0 or mu <= 0:
            raise ValueError(f"{kind}: invalid inputs {inputs}")
        iters = max(
            0.0,
            40.0 * h1 * delta0 / mu
            + (20.0 * h0 / mu) * math.log(h0 / (2.0 * h1 * eps)),
        )
    elif kind == "upper_nonconvex":
        h0, h1, delta0, eps = _need(kind, inputs, "h0", "h1", "delta0", "eps")
        if h0 <= 0 or h1 < 0 or delta0 < 0 or eps <= 0:
            raise ValueError(f"{kind}: invalid inputs {inputs}")
        damp = 1.0 + h1 * delta0 / (2.0 * h0 + 4.0 * h1 * delta0)
        iters = 20.0 * (h0 + 2.0 * h1 * delta0) * delta0 / (eps ** 2 * damp)
    elif kind == "lower_nonconvex":
        h1, delta0, eps = _need(kind, inputs, "h1", "delta0", "eps")
        if h1 <= 0 or eps <= 0 or delta0 <= 2.0 * eps ** 2:
            raise ValueError(f"{kind}: invalid inputs {inputs}")
        iters = (h1 * _log_gap_factor(kind, delta0)
                 * (delta0 - 2.0 * eps ** 2) / (8.0 * eps ** 2))
    elif kind == "lower_convex":
        h1, delta0, eps = _need(kind, inputs, "h1", "delta0", "eps")
        if h1 <= 0 or eps <= 0 or eps >= delta0:
            raise ValueError(f"{kind}: invalid inputs {inputs}")
        iters = (h1 * _log_gap_factor(kind, delta0)
                 * (delta0 - eps) / (4.0 * eps))
    else:  # lower_pl
        h1, delta0, eps, mu = _need(kind, inputs, "h1", "delta0", "eps", "mu")
        if h1 <= 0 or eps <= 0 or mu <= 0 or eps > delta0:
            raise ValueError(f"{kind}: invalid inputs {inputs}")
        iters = (h1 / (4.0 * mu) * _log_gap_factor(kind, delta0)
                 * math.log(delta0 / eps))
    used = {k: float(v) for k, v in inputs.items() if v is not None}
    return BoundPrediction(kind=kind, iters=iters, inputs=used)


# ---------------------------------------------------------------------------
# Inequality checkers.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckViolation:
    """One failed check: the point/step index and the signed excess."""

    index: int
    margin: float
    note: str = ""


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a pointwise/trajectory inequality check.

    ``worst_margin`` is the largest signed violation over in-scope items
    (negative = everything held with room); out-of-scope items (premise not
    satisfied) are counted, never silently dropped.
    """

    name: str
    n_checked: int
    n_out_of_scope: int
    worst_margin: float
    violations: tuple[CheckViolation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def _gap(value: float, baseline: float) -> float:
    return max(value - baseline, 0.0)


def check_gradient_bound(obj: Objective, cert: SmoothnessCertificate,
                         points: Sequence[ParamPoint],
                         rel_tol: float = 1e-9) -> CheckReport:
    """Check ||grad f(w)||^2 <= (9/4)*(h0 + 3*h1*gap)*gap at each point."""
    if cert.rho != 1.0:
        raise InconsistencyError("gradient bound check needs a rho = 1 certificate")
    violations: list[CheckViolation] = []
    worst = -math.inf
    for i, w in enumerate(points):
        gap = _gap(float(obj.value(w)), cert.f_star)
        lhs = float(np.sum(obj.gradient(w) ** 2))
        rhs = 2.25 * (cert.h0 + 3.0 * cert.h1 * gap) * gap
        margin = lhs - rhs
        worst = max(worst, margin)
        if margin > rel_tol * max(1.0, rhs):
            violations.append(CheckViolation(index=i, margin=margin))
    return CheckReport(name="gradient_bound", n_checked=len(points),
                       n_out_of_scope=0, worst_margin=worst,
                       violations=tuple(violations))


def check_descent_step(obj: Objective, cert: SmoothnessCertificate,
                       w: ParamPoint, eta: float,
                       tol: float | None = None) -> CheckReport:
    """Check one gradient step's guaranteed decrease:
    f(w - eta*g) <= f(w) - eta*||g||^2 + (h0 + h1*gap)*eta^2*||g||^2,
    valid under the premise eta*||g|| <= 1/sqrt(h1).

    A point failing the premise is reported out-of-scope, not checked.
    """
    if cert.rho != 1.0:
        raise InconsistencyError("descent check needs a rho = 1 certificate")
    f_w = float(obj.value(w))
    g = obj.gradient(w)
    gn2 = float(np.sum(g * g))
    gn = math.sqrt(gn2)
    if tol is None:
        tol = 1e-9 * (1.0 + abs(f_w))
    premise_cap = math.inf if cert.h1 == 0 else 1.0 / math.sqrt(cert.h1)
    if eta * gn > premise_cap:
        return CheckReport(name="descent_step", n_checked=0, n_out_of_scope=1,
                           worst_margin=-math.inf, violations=())
    gap = _gap(f_w, cert.f_star)
    f_next = float(obj.value(w.with_data(w.data - eta * g)))
    rhs = f_w - eta * gn2 + (cert.h0 + cert.h1 * gap) * eta * eta * gn2
    margin = f_next - rhs
    violations = (CheckViolation(index=0, margin=margin),) if margin > tol else ()
    return CheckReport(name="descent_step", n_checked=1, n_out_of_scope=0,
                       worst_margin=margin, violations=violations)


def check_condition(kind: Literal["aiming", "pl", "interpolation"],
                    obj: Objective, points: Sequence[ParamPoint],
                    theta: float | None = None, mu: float | None = None,
                    tol: float = 1e-9) -> CheckReport:
    """Check a landscape condition pointwise.

    aiming(theta):  <grad f(w), w - proj(w)>  >=  theta * gap
    pl(mu):         ||grad f(w)||^2           >=  2 * mu * gap
    interpolation:  every component loss at the projected solution equals
                    the shared optimum.
    """
    from .errors import CapabilityError

    violations: list[CheckViolation] = []
    worst = -math.inf
    n_checked = 0
    if kind == "aiming":
        if theta is None:
            raise ValueError("aiming check needs theta")
        if obj.project_solution is None:
            raise CapabilityError(f"{obj.name} has no solution projector")
        f_star = obj.f_star if obj.f_star is not None else 0.0
        for i, w in enumerate(points):
            gap = _gap(float(obj.value(w)), f_star)
            proj = obj.project_solution(w)
            lhs = float(np.dot(obj.gradient(w), w.data - proj.data))
            rhs = theta * gap
            margin = rhs - lhs
            worst = max(worst, margin)
            n_checked += 1
            if margin > tol * max(1.0, abs(rhs)):
                violations.append(CheckViolation(index=i, margin=margin))
    elif kind == "pl":
        if mu is None:
            raise ValueError("pl check needs mu")
        f_star = obj.f_star if obj.f_star is not None else 0.0
        for i, w in enumerate(points):
            gap = _gap(float(obj.value(w)), f_star)
            lhs = float(np.sum(obj.gradient(w) ** 2))
            rhs = 2.0 * mu * gap
            margin = rhs - lhs
            worst = max(worst, margin)
            n_checked += 1
            if margin > tol * max(1.0, abs(rhs)):
                violations.append(CheckViolation(index=i, margin=margin))
    elif kind == "interpolation":
        if obj.value_i is None or obj.n_components is None \
                or obj.component_f_star is None:
            raise CapabilityError(
                f"{obj.name} lacks components with a shared optimum"
            )
        for i, w in enumerate(points):
            p = obj.project_solution(w) if obj.project_solution else w
            for j in range(obj.n_components):
                margin = abs(obj.value_i(p, j) - obj.component_f_star)
                worst = max(worst, margin)
                n_checked += 1
                if margin > tol * (1.0 + abs(obj.component_f_star)):
                    violations.append(CheckViolation(
                        index=i, margin=margin, note=f"component {j}"))
    else:
        raise ValueError(f"unknown condition kind {kind!r}")
    return CheckReport(name=f"condition_{kind}", n_checked=n_checked,
                       n_out_of_scope=0, worst_margin=worst,
                       violations=tuple(violations))


def check_linear_decrease(obj: Objective, cert: SmoothnessCertificate,
                          theta: float, dist0: float, traj: Trajectory,
                          tol: float = 1e-12) -> CheckReport:
    """Check per-step geometric loss-gap decrease along an adaptive run:
    while gap_k >= h0/(2*h1), require
    gap_{k+1} <= (1 - theta^3/(80*h1*dist0^2)) * gap_k.

    Steps already below the gap threshold are out of scope (the guarantee
    only speaks about the high-loss phase).
    """
    if cert.h1 <= 0:
        raise InconsistencyError("linear decrease needs h1 > 0")
    if not (0 < theta <= 1) or dist0 <= 0:
        raise ValueError("need theta in (0,1] and dist0 > 0")
    f_star = obj.f_star if obj.f_star is not None else cert.f_star
    threshold = cert.h0 / (2.0 * cert.h1)
    factor = 1.0 - theta ** 3 / (80.0 * cert.h1 * dist0 ** 2)
    violations: list[CheckViolation] = []
    worst = -math.inf
    n_checked = 0
    n_skip = 0
    records = traj.records
    for k in range(len(records) - 1):
        gap_k = _gap(records[k].f, f_star)
        if gap_k < threshold:
            n_skip += 1
            continue
        gap_next = _gap(records[k + 1].f, f_star)
        margin = gap_next - factor * gap_k
        worst = max(worst, margin)
        n_checked += 1
        if margin > tol * (1.0 + gap_k):
            violations.append(CheckViolation(index=k, margin=margin))
    return CheckReport(name="linear_decrease", n_checked=n_checked,
                       n_out_of_scope=n_skip, worst_margin=worst,
                       violations=tuple(violations))
