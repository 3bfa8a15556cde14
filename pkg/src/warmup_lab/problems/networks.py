"""Matrix-product and shallow-network training objectives.

All of these measure squared or logistic error of a layered linear map on a
fixed synthetic dataset; they differ in where (if anywhere) an elementwise
nonlinearity sits and in regularization.  Gradients are analytic (backprop);
Hessians are probed by finite differences downstream.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from ..core import Array, Objective, ParamPoint
from ..errors import ConstructionError
from .types import ActivationSpec, DatasetPair

__all__ = [
    "make_deep_linear",
    "make_semi_linear",
    "make_deep_leaky",
    "make_two_layer_mse_l2",
    "make_two_layer_ce_l2",
]


def _layer_shapes(layer_dims: Sequence[int]) -> tuple[tuple[str, tuple[int, ...]], ...]:
    dims = [int(n) for n in layer_dims]
    return tuple(
        (f"W{i + 1}", (dims[i], dims[i + 1])) for i in range(len(dims) - 1)
    )


def _check_dims(data: DatasetPair, layer_dims: Sequence[int],
                min_depth: int = 2) -> list[int]:
    dims = [int(n) for n in layer_dims]
    depth = len(dims) - 1
    if depth < min_depth:
        raise ConstructionError(f"need depth >= {min_depth}, got {depth}")
    if any(n < 1 for n in dims):
        raise ConstructionError(f"all layer dims must be >= 1, got {dims}")
    if dims[0] != data.output_dim:
        raise ConstructionError(
            f"first dim {dims[0]} != target rows {data.output_dim}"
        )
    if dims[-1] != data.input_dim:
        raise ConstructionError(
            f"last dim {dims[-1]} != input rows {data.input_dim}"
        )
    return dims


def _mats(w: ParamPoint, depth: int) -> list[Array]:
    return [w.block(f"W{i + 1}") for i in range(depth)]


def make_deep_linear(data: DatasetPair, layer_dims: Sequence[int],
                     f_star: float | None = None) -> Objective:
    """Frobenius error of a depth-l linear factorization: ||Y - W1..Wl X||^2.

    ``f_star`` should be supplied when known (0 for a planted interpolating
    target); it is left None otherwise.
    """
    dims = _check_dims(data, layer_dims)
    depth = len(dims) - 1
    x, y = data.X, data.Y

    def value(w: ParamPoint) -> float:
        out = x
        for m in reversed(_mats(w, depth)):
            out = m @ out
        return float(np.sum((y - out) ** 2))

    def gradient(w: ParamPoint) -> Array:
        ws = _mats(w, depth)
        # prefix[i] = W1..Wi (prefix[0] = I), suffix[i] = W_{i+1}..Wl
        prefixes = [None] * (depth + 1)
        acc = None
        for i, m in enumerate(ws):
            acc = m if acc is None else acc @ m
            prefixes[i + 1] = acc
        suffixes = [None] * (depth + 1)
        acc = None
        for i in range(depth - 1, -1, -1):
            acc = ws[i] if acc is None else ws[i] @ acc
            suffixes[i] = acc
        r = y - prefixes[depth] @ x
        rx = -2.0 * (r @ x.T)
        grads = []
        for i in range(depth):
            g = rx
            if i > 0:
                g = prefixes[i].T @ g
            if i < depth - 1:
                g = g @ suffixes[i + 1].T
            grads.append(g.ravel())
        return np.concatenate(grads)

    return Objective(
        name="deep_linear",
        dim=sum(dims[i] * dims[i + 1] for i in range(depth)),
        shapes=_layer_shapes(dims),
        value=value,
        gradient=gradient,
        f_star=f_star,
        info={"depth": float(depth)},
    )


def make_semi_linear(data: DatasetPair, layer_dims: Sequence[int],
                     slope: float = 0.5,
                     f_star: float | None = None) -> Objective:
    """||Y - W1 phi(W2..Wl X)||^2 with a single leaky nonlinearity.

    The activation wraps the *entire* linear chain below the first layer.
    Use ``balance_diagnostics`` to monitor lambda_min(W1^T W1) and the
    balance residuals of any iterate.
    """
    dims = _check_dims(data, layer_dims)
    depth = len(dims) - 1
    if not (0.0 < slope <= 1.0):
        raise ConstructionError(f"slope must be in (0,1], got {slope}")
    x, y = data.X, data.Y
    b = float(slope)

    def forward(ws: list[Array]):
        z = x
        for m in reversed(ws[1:]):
            z = m @ z
        a = np.where(z >= 0, z, b * z)
        return z, a, y - ws[0] @ a

    def value(w: ParamPoint) -> float:
        _, _, r = forward(_mats(w, depth))
        return float(np.sum(r * r))

    def gradient(w: ParamPoint) -> Array:
        ws = _mats(w, depth)
        z, a, r = forward(ws)
        grads = [(-2.0 * r @ a.T).ravel()]
        delta = (ws[0].T @ (-2.0 * r)) * np.where(z >= 0, 1.0, b)
        # linear chain below: d/dW_i of (W2..Wl X) against sensitivity delta
        chain = ws[1:]
        n = len(chain)
        prefixes = [None] * (n + 1)
        acc = None
        for i, m in enumerate(chain):
            acc = m if acc is None else acc @ m
            prefixes[i + 1] = acc
        tails = [None] * (n + 1)
        tails[n] = x
        for i in range(n - 1, -1, -1):
            tails[i] = chain[i] @ tails[i + 1]
        for i in range(n):
            g = delta
            if i > 0:
                g = prefixes[i].T @ g
            g = g @ tails[i + 1].T
            grads.append(g.ravel())
        return np.concatenate(grads)

    return Objective(
        name="semi_linear",
        dim=sum(dims[i] * dims[i + 1] for i in range(depth)),
        shapes=_layer_shapes(dims),
        value=value,
        gradient=gradient,
        f_star=f_star,
        info={"depth": float(depth), "slope": b},
    )


def make_deep_leaky(data: DatasetPair, layer_dims: Sequence[int],
                    slopes: Sequence[float]) -> Objective:
    """||Y - W1 phi_1(W2 phi_2(... W_l X))||^2, one leaky unit per junction."""
    dims = _check_dims(data, layer_dims)
    depth = len(dims) - 1
    bs = [float(s) for s in slopes]
    if len(bs) != depth - 1:
        raise ConstructionError(
            f"need {depth - 1} slopes for depth {depth}, got {len(bs)}"
        )
    if any(not (0.0 < s <= 1.0) for s in bs):
        raise ConstructionError(f"slopes must be in (0,1], got {bs}")
    x, y = data.X, data.Y

    def forward(ws: list[Array]):
        # activations[i] = input to W_{i+1}; activations[depth-1] feeds W1..
        zs: list[Array] = [None] * depth          # z[i] = W_{i+1} a_{i+1}
        acts: list[Array] = [None] * (depth + 1)  # a[depth] = x
        acts[depth] = x
        for i in range(depth - 1, 0, -1):
            zs[i] = ws[i] @ acts[i + 1]
            acts[i] = np.where(zs[i] >= 0, zs[i], bs[i - 1] * zs[i])
        out = ws[0] @ acts[1]
        return zs, acts, y - out

    def value(w: ParamPoint) -> float:
        _, _, r = forward(_mats(w, depth))
        return float(np.sum(r * r))

    def gradient(w: ParamPoint) -> Array:
        ws = _mats(w, depth)
        zs, acts, r = forward(ws)
        grads: list[Array] = [np.zeros(0)] * depth
        delta = -2.0 * r
        grads[0] = (delta @ acts[1].T).ravel()
        for i in range(1, depth):
            delta = (ws[i - 1].T @ delta) * np.where(
                zs[i] >= 0, 1.0, bs[i - 1]
            )
            grads[i] = (delta @ acts[i + 1].T).ravel()
        return np.concatenate(grads)

    return Objective(
        name="deep_leaky",
        dim=sum(dims[i] * dims[i + 1] for i in range(depth)),
        shapes=_layer_shapes(dims),
        value=value,
        gradient=gradient,
        info={"depth": float(depth)},
    )


def _two_layer_shapes(c: int, hidden: int, d: int):
    return (("W1", (c, hidden)), ("W2", (hidden, d)))


def make_two_layer_mse_l2(data: DatasetPair, act: ActivationSpec,
                          hidden: int, lam1: float, lam2: float) -> Objective:
    """||Y - W1 phi(W2 X)||^2 + (lam1/2)||W1||^2 + (lam2/2)||W2||^2.

    Needs a twice-differentiable activation; per-sample components are
    exposed for mini-batch training (f_i = m * sample-i error + penalty, so
    any batch mean is an unbiased surrogate of the full loss).
    """
    if act.c3 is None:
        raise ConstructionError(
            f"{act.kind} has no curvature constant; use tanh or identity"
        )
    if lam1 <= 0 or lam2 <= 0:
        raise ConstructionError("lam1 and lam2 must be positive")
    if hidden < 1:
        raise ConstructionError(f"hidden width must be >= 1, got {hidden}")
    x, y = data.X, data.Y
    c, d, m = data.output_dim, data.input_dim, data.n_samples

    def split(w: ParamPoint) -> tuple[Array, Array]:
        return w.block("W1"), w.block("W2")

    def reg(w1: Array, w2: Array) -> float:
        return 0.5 * lam1 * float(np.sum(w1 * w1)) \
            + 0.5 * lam2 * float(np.sum(w2 * w2))

    def value(w: ParamPoint) -> float:
        w1, w2 = split(w)
        r = y - w1 @ act(w2 @ x)
        return float(np.sum(r * r)) + reg(w1, w2)

    def gradient(w: ParamPoint) -> Array:
        w1, w2 = split(w)
        hmat = act(w2 @ x)
        r = y - w1 @ hmat
        g1 = -2.0 * r @ hmat.T + lam1 * w1
        g2 = ((w1.T @ (-2.0 * r)) * act.deriv(w2 @ x)) @ x.T + lam2 * w2
        return np.concatenate([g1.ravel(), g2.ravel()])

    def value_i(w: ParamPoint, i: int) -> float:
        w1, w2 = split(w)
        xi = x[:, i:i + 1]
        ri = y[:, i:i + 1] - w1 @ act(w2 @ xi)
        return m * float(np.sum(ri * ri)) + reg(w1, w2)

    def gradient_i(w: ParamPoint, i: int) -> Array:
        w1, w2 = split(w)
        xi = x[:, i:i + 1]
        hi = act(w2 @ xi)
        ri = y[:, i:i + 1] - w1 @ hi
        g1 = -2.0 * m * ri @ hi.T + lam1 * w1
        g2 = ((w1.T @ (-2.0 * m * ri)) * act.deriv(w2 @ xi)) @ xi.T \
            + lam2 * w2
        return np.concatenate([g1.ravel(), g2.ravel()])

    return Objective(
        name="two_layer_mse_l2",
        dim=c * hidden + hidden * d,
        shapes=_two_layer_shapes(c, hidden, d),
        value=value,
        gradient=gradient,
        n_components=m,
        value_i=value_i,
        gradient_i=gradient_i,
        info={
            "lam1": float(lam1),
            "lam2": float(lam2),
            "x_spectral": data.x_spectral,
        },
    )


def make_two_layer_ce_l2(data: DatasetPair, act: ActivationSpec,
                         hidden: int, lam1: float, lam2: float) -> Objective:
    """Binary cross-entropy of a two-layer net plus L2 (targets in {0,1}).

    The logit row is Z = W1 phi(W2 X) (one output unit); the loss sums
    softplus(z_j) - y_j z_j over samples, which equals the negative
    log-likelihood of sigmoid(z) and stays finite for any logits.
    """
    if act.c3 is None:
        raise ConstructionError(
            f"{act.kind} has no curvature constant; use tanh or identity"
        )
    if lam1 <= 0 or lam2 <= 0:
        raise ConstructionError("lam1 and lam2 must be positive")
    if hidden < 1:
        raise ConstructionError(f"hidden width must be >= 1, got {hidden}")
    if data.output_dim != 1:
        raise ConstructionError("binary targets must form a single row")
    y = data.Y
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ConstructionError("targets must be 0/1 valued")
    x = data.X
    d, m = data.input_dim, data.n_samples

    def split(w: ParamPoint) -> tuple[Array, Array]:
        return w.block("W1"), w.block("W2")

    def reg(w1: Array, w2: Array) -> float:
        return 0.5 * lam1 * float(np.sum(w1 * w1)) \
            + 0.5 * lam2 * float(np.sum(w2 * w2))

    def value(w: ParamPoint) -> float:
        w1, w2 = split(w)
        z = w1 @ act(w2 @ x)
        ce = np.logaddexp(0.0, z) - y * z
        return float(np.sum(ce)) + reg(w1, w2)

    def gradient(w: ParamPoint) -> Array:
        w1, w2 = split(w)
        hmat = act(w2 @ x)
        z = w1 @ hmat
        p = 1.0 / (1.0 + np.exp(-z))
        dz = p - y
        g1 = dz @ hmat.T + lam1 * w1
        g2 = ((w1.T @ dz) * act.deriv(w2 @ x)) @ x.T + lam2 * w2
        return np.concatenate([g1.ravel(), g2.ravel()])

    def value_i(w: ParamPoint, i: int) -> float:
        w1, w2 = split(w)
        xi = x[:, i:i + 1]
        z = w1 @ act(w2 @ xi)
        ce = np.logaddexp(0.0, z) - y[:, i:i + 1] * z
        return m * float(np.sum(ce)) + reg(w1, w2)

    def gradient_i(w: ParamPoint, i: int) -> Array:
        w1, w2 = split(w)
        xi = x[:, i:i + 1]
        hi = act(w2 @ xi)
        z = w1 @ hi
        p = 1.0 / (1.0 + np.exp(-z))
        dz = m * (p - y[:, i:i + 1])
        g1 = dz @ hi.T + lam1 * w1
        g2 = ((w1.T @ dz) * act.deriv(w2 @ xi)) @ xi.T + lam2 * w2
        return np.concatenate([g1.ravel(), g2.ravel()])

    return Objective(
        name="two_layer_ce_l2",
        dim=hidden + hidden * d,
        shapes=_two_layer_shapes(1, hidden, d),
        value=value,
        gradient=gradient,
        n_components=m,
        value_i=value_i,
        gradient_i=gradient_i,
        info={
            "lam1": float(lam1),
            "lam2": float(lam2),
            "x_spectral": data.x_spectral,
        },
    )
