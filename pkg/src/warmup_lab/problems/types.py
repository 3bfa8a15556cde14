"""Shared problem-side types: datasets, activations, certificates, inits."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..core import Array, ParamPoint
from ..errors import ConstructionError

__all__ = [
    "DatasetPair",
    "ActivationSpec",
    "SmoothnessCertificate",
    "activation",
    "make_dataset",
    "make_balanced_init",
    "balance_diagnostics",
]

# Grid used to re-verify tanh's second-derivative bound at construction time.
_TANH_CHECK_GRID = np.linspace(-6.0, 6.0, 4001)

# |tanh''| peaks at 4/(3*sqrt(3)) ~ 0.76980; we carry the slightly rounded-up
# constant so the bound stays valid.
TANH_C3 = 0.7699


@dataclass(frozen=True)
class SmoothnessCertificate:
    """Analytic curvature bound: ``||H(w)||_2 <= h0 + h1*(f(w)-f_star)^rho``.

    ``f_star`` is the bound's own baseline, which may be below the
    objective's true optimum (a raw-loss bound uses baseline 0).  ``region``
    names the weight-space assumptions under which the bound was proved.
    """

    h0: float
    h1: float
    f_star: float = 0.0
    rho: float = 1.0
    region: str = "unconstrained"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.h0) and self.h0 >= 0):
            raise ConstructionError(f"h0 must be finite >= 0, got {self.h0}")
        if not (math.isfinite(self.h1) and self.h1 >= 0):
            raise ConstructionError(f"h1 must be finite >= 0, got {self.h1}")
        if not math.isfinite(self.f_star):
            raise ConstructionError("certificate baseline must be finite")
        if self.rho < 1.0:
            raise ConstructionError(f"rho must be >= 1, got {self.rho}")

    def bound(self, loss: float) -> float:
        """Curvature bound at a point with the given loss value."""
        gap = max(loss - self.f_star, 0.0)
        return self.h0 + self.h1 * gap ** self.rho


@dataclass(frozen=True)
class ActivationSpec:
    """Elementwise activation with the constants its curvature bounds use.

    ``c1`` bounds |phi(x)|/|x|, ``c2`` bounds |phi'|, ``c3`` bounds |phi''|
    (None when the activation has no second derivative, e.g. leaky ReLU).
    """

    kind: str
    fn: Callable[[Array], Array]
    deriv: Callable[[Array], Array]
    c1: float
    c2: float
    c3: float | None
    slope: float = 1.0

    def __call__(self, x: Array) -> Array:
        return self.fn(x)


def activation(kind: str, slope: float = 0.1) -> ActivationSpec:
    """Build one of the supported activations by name.

    ``identity``, ``tanh``, or ``leaky_relu`` (with negative-side slope
    ``slope`` in (0, 1]; its subgradient at 0 takes the slope branch).
    """
    if kind == "identity":
        return ActivationSpec(
            kind="identity",
            fn=lambda x: np.asarray(x, dtype=np.float64),
            deriv=lambda x: np.ones_like(np.asarray(x, dtype=np.float64)),
            c1=1.0, c2=1.0, c3=0.0,
        )
    if kind == "tanh":
        worst = float(np.max(np.abs(
            -2.0 * np.tanh(_TANH_CHECK_GRID)
            * (1.0 - np.tanh(_TANH_CHECK_GRID) ** 2)
        )))
        if worst > TANH_C3:
            raise ConstructionError(
                f"tanh curvature constant violated on check grid: {worst}"
            )
        return ActivationSpec(
            kind="tanh",
            fn=np.tanh,
            deriv=lambda x: 1.0 - np.tanh(x) ** 2,
            c1=1.0, c2=1.0, c3=TANH_C3,
        )
    if kind == "leaky_relu":
        if not (0.0 < slope <= 1.0):
            raise ConstructionError(f"leaky slope must be in (0,1], got {slope}")
        b = float(slope)
        return ActivationSpec(
            kind="leaky_relu",
            fn=lambda x: np.where(x > 0, x, b * x),
            deriv=lambda x: np.where(x > 0, 1.0, b),
            c1=1.0, c2=1.0, c3=None,
            slope=b,
        )
    raise ConstructionError(f"unknown activation {kind!r}")


@dataclass(frozen=True)
class DatasetPair:
    """Input/target matrices with the input Gram statistics precomputed.

    ``X`` is (d, m) with samples as columns, ``Y`` is (c, m).  ``lambda_min``
    is the smallest eigenvalue of X X^T, fixed at construction.
    """

    X: Array
    Y: Array
    lambda_min: float
    x_spectral: float
    y_frob: float

    @property
    def input_dim(self) -> int:
        return int(self.X.shape[0])

    @property
    def n_samples(self) -> int:
        return int(self.X.shape[1])

    @property
    def output_dim(self) -> int:
        return int(self.Y.shape[0])


def make_dataset(X: Array, Y: Array) -> DatasetPair:
    X = np.array(X, dtype=np.float64)
    Y = np.array(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2:
        raise ConstructionError("X and Y must be matrices")
    if X.shape[1] != Y.shape[1]:
        raise ConstructionError(
            f"X has {X.shape[1]} samples but Y has {Y.shape[1]}"
        )
    X.setflags(write=False)
    Y.setflags(write=False)
    lam = float(np.linalg.eigvalsh(X @ X.T)[0])
    return DatasetPair(
        X=X,
        Y=Y,
        lambda_min=max(lam, 0.0),
        x_spectral=float(np.linalg.norm(X, 2)),
        y_frob=float(np.linalg.norm(Y)),
    )


def _layer_names(n_layers: int) -> list[str]:
    return [f"W{i + 1}" for i in range(n_layers)]


def make_balanced_init(layer_dims: Sequence[int], mode: str = "strong",
                       scale: float = 1.0, seed: int = 0) -> ParamPoint:
    """Random weight chain W1..Wl, balanced across consecutive layers.

    ``strong`` shares one singular-value profile across all layers through
    orthogonal factors (W_i^T W_i = W_{i+1} W_{i+1}^T exactly); ``weak``
    only equalizes Frobenius norms.  ``scale`` fixes every layer's Frobenius
    norm.  The shared profile has length min(layer_dims), so every dimension
    must be >= 1 for the construction to have full shared rank.
    """
    dims = [int(n) for n in layer_dims]
    if len(dims) < 2:
        raise ConstructionError("need at least one layer (two dims)")
    if any(n < 1 for n in dims):
        raise ConstructionError(
            "strong balance shares a rank-min(dims) singular profile across "
            f"layers; every dimension must be >= 1, got {dims}"
        )
    if scale <= 0:
        raise ConstructionError(f"scale must be positive, got {scale}")
    rng = np.random.Generator(np.random.PCG64(seed))
    names = _layer_names(len(dims) - 1)
    if mode == "weak":
        ws = []
        for i in range(len(dims) - 1):
            w = rng.standard_normal((dims[i], dims[i + 1]))
            w *= scale / float(np.linalg.norm(w))
            ws.append(w)
        return ParamPoint.from_arrays(list(zip(names, ws)))
    if mode != "strong":
        raise ConstructionError(f"unknown balance mode {mode!r}")
    r = min(dims)
    profile = rng.uniform(0.5, 1.5, size=r)
    profile *= scale / math.sqrt(float(np.sum(profile * profile)))
    qs = []
    for n in dims:
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        qs.append(q)
    ws = []
    for i in range(len(dims) - 1):
        sig = np.zeros((dims[i], dims[i + 1]))
        sig[:r, :r] = np.diag(profile)
        ws.append(qs[i] @ sig @ qs[i + 1].T)
    return ParamPoint.from_arrays(list(zip(names, ws)))


def balance_diagnostics(w: ParamPoint) -> dict[str, float]:
    """Balance residuals and smallest-Gram eigenvalues of a weight chain.

    Works on any ParamPoint whose blocks are the W1..Wl of a network
    objective.  Returns the largest strong-balance residual
    max_i ||W_i^T W_i - W_{i+1} W_{i+1}^T||_F, the largest weak-balance
    (Frobenius norm) spread, and lambda_min(W_i^T W_i) per layer.
    """
    mats = [w.block(name) for name, _ in w.shapes if name.startswith("W")]
    out: dict[str, float] = {}
    strong = 0.0
    for i in range(len(mats) - 1):
        res = float(np.linalg.norm(
            mats[i].T @ mats[i] - mats[i + 1] @ mats[i + 1].T
        ))
        strong = max(strong, res)
    norms = [float(np.linalg.norm(m)) for m in mats]
    out["strong_balance_residual"] = strong
    out["weak_balance_spread"] = max(norms) - min(norms) if norms else 0.0
    for i, m in enumerate(mats):
        out[f"lambda_min_W{i + 1}"] = float(np.linalg.eigvalsh(m.T @ m)[0])
    return out
