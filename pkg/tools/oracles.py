"""Standalone oracle computations for values frozen in the test suite.

Every function here is written independently of the warmup_lab package (no
imports from it) so test expectations can be cross-checked against a second
implementation. Run as a script to print the full report:

    python tools/oracles.py
"""

from __future__ import annotations

import math

import numpy as np


# ---------------------------------------------------------------------------
# Fixed-point constant nu = exp(-nu), and the (L0,L1) -> (H0,H1) map hand case.
# ---------------------------------------------------------------------------

def omega_constant() -> float:
    import mpmath

    mpmath.mp.dps = 30
    nu = mpmath.lambertw(1)
    return float(nu)


def l0l1_hand_case() -> tuple[float, float]:
    """(H0, H1) for L0 = L1 = 1: H0 = 1 + 1/nu, H1 = (4 + nu)/(2 nu)."""
    import mpmath

    mpmath.mp.dps = 30
    nu = mpmath.lambertw(1)
    h0 = 1 + 1 / nu
    h1 = (4 + nu) / (2 * nu)
    return float(h0), float(h1)


# ---------------------------------------------------------------------------
# Hand cases for the closed-form constant calculators (exact sympy arithmetic).
# ---------------------------------------------------------------------------

def deep_linear_hand_case() -> dict[str, float]:
    """Depth 2, X = Y = I_2, optimum 0.

    Inputs: depth l = 2, input dim d = 2, ||X||_2 = 1, ||Y||_F = sqrt(2),
    lambda_min(X X^T) = 1.
    """
    import sympy as sp

    l = 2
    d = sp.Integer(2)
    x2 = sp.Integer(1)          # spectral norm of X
    yf = sp.sqrt(2)             # Frobenius norm of Y
    lam = sp.Integer(1)         # lambda_min(X X^T)
    base = 2 * d ** sp.Rational(l - 1, 2)

    bar_h0 = 4 * l**2 * (
        base ** sp.Rational(2 * l - 2, l)
        * (1 / lam) ** sp.Rational(2 * l - 2, 2 * l)
        * yf ** sp.Rational(2 * l - 2, l)
        * x2**2
        + base ** sp.Rational(l - 2, l)
        * (1 / lam) ** sp.Rational(l - 2, 2 * l)
        * yf ** sp.Rational(l - 2, l)
        * x2
    )
    h1 = 4 * l**2 * (
        base ** sp.Rational(2 * l - 2, l)
        * (1 / lam) ** sp.Rational(2 * l - 2, 2 * l)
        * x2**2
        + base ** sp.Rational(l - 2, l)
        * (1 / lam) ** sp.Rational(l - 2, 2 * l)
        * x2
        + base ** sp.Rational(l - 2, l)
        * (1 / lam) ** sp.Rational(l - 2, 2 * l)
        * yf ** sp.Rational(l - 2, l)
        * x2
    )
    f_star = sp.Integer(0)
    h0 = 2 * bar_h0 + h1 * (1 + f_star)
    return {
        "bar_h0": float(bar_h0),
        "h1": float(h1),
        "h0": float(h0),
    }


def semi_linear_hand_case() -> tuple[float, float]:
    """Depth 2, slope b=1, floor h=1, X = Y = I_2 -> (H0, H1) = (144, 80)."""
    import sympy as sp

    l = 2
    d = sp.Integer(2)
    x2 = sp.Integer(1)
    yf2 = sp.Integer(2)  # ||Y||_F^2
    lam = sp.Integer(1)
    h = sp.Integer(1)
    b = sp.Integer(1)
    e = sp.Rational(l - 2, 2 * l - 2)
    core = h * b**2 * lam
    h0 = l**2 * (
        16 * d ** (l - 2) * yf2 / core * x2**2
        + 2 * (4 * d ** (l - 2) * yf2 / core) ** e * x2
        + 2 * (4 * d ** (l - 2) / core) ** e * x2
    )
    h1 = l**2 * (
        16 * d ** (l - 2) / core * x2**2
        + 2 * (4 * d ** (l - 2) * yf2 / core) ** e * x2
        + 2 * (4 * d ** (l - 2) / core) ** e * x2
    )
    return float(h0), float(h1)


def deep_leaky_hand_case() -> tuple[float, float]:
    """Depth 3, slopes (1/2, 1/2), floors (1, 1), X = Y = I_2."""
    import sympy as sp

    l = 3
    yf = sp.sqrt(2)
    x2 = sp.Integer(1)
    lam = sp.Integer(1)
    hs = [sp.Integer(1), sp.Integer(1)]
    bs = [sp.Rational(1, 2), sp.Rational(1, 2)]
    denom = sp.sqrt(lam)
    d_prod = lam
    for h_i, b_i in zip(hs, bs):
        denom *= sp.sqrt(h_i) * b_i
        d_prod *= h_i * b_i**2
    g = 2 * yf / denom
    h0 = (
        2 * l * (l - 1) * g ** (l - 2) * x2
        + 4 * l**2 * g ** (2 * l - 2) * x2**2
        + 2 * l * (l - 1) * (4 / d_prod) ** sp.Rational(l - 2, 2) * x2
        + 2 * l**2 * (4 / d_prod) ** sp.Rational(2 * l - 2, 2) * x2**2
    )
    h1 = h0 - 4 * l**2 * g ** (2 * l - 2) * x2**2
    return float(h0), float(h1)


def two_layer_mse_hand_case() -> tuple[float, float]:
    """tanh activation, ||X||_2 = 1, lambda1 = lambda2 = 1 -> H0 = 8."""
    import sympy as sp

    c1, c2, c3 = sp.Integer(1), sp.Integer(1), sp.Rational(7699, 10000)
    x2 = sp.Integer(1)
    lam1 = lam2 = sp.Integer(1)
    h0 = 4 * c2 * x2 + 2 * (lam1 + lam2)
    h1 = (
        4 / lam1 * (2 * c2**2 + c3 + 4 * c1 * c2) * x2**2
        + 8 / lam2 * (c1**2 + 2 * c1 * c2) * x2**2
        + 2 * c3 * x2**2
        + 4 * c2 * x2
    )
    return float(h0), float(h1)


def two_layer_ce_hand_case() -> tuple[float, float]:
    """tanh activation, ||X||_2 = 1, lambda1 = lambda2 = 1 -> H0 = 2."""
    import sympy as sp

    c1, c2, c3 = sp.Integer(1), sp.Integer(1), sp.Rational(7699, 10000)
    x2 = sp.Integer(1)
    lam1 = lam2 = sp.Integer(1)
    h0 = lam1 + lam2
    h1 = (
        2 / lam1 * (c2**2 + c3 + 2 * c1 * c2) * x2**2
        + 2 / lam2 * (c1**2 + 2 * c1 * c2) * x2**2
        + 2 * c2 * x2
        + c3 * x2**2
    )
    return float(h0), float(h1)


# ---------------------------------------------------------------------------
# One-dimensional constructions, standalone.
# ---------------------------------------------------------------------------

def _exp(x: float) -> float:
    """exp saturating to inf instead of raising OverflowError."""
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def exp_quadratic(h1: float):
    """Returns (f, f', f'') callables for the two-sided exp-capped quadratic."""
    r = 1.0 / math.sqrt(h1)

    def f(w: float) -> float:
        if abs(w) <= r:
            return 0.5 * h1 * w * w + 0.5
        return _exp(math.sqrt(h1) * abs(w) - 1.0)

    def fp(w: float) -> float:
        if abs(w) <= r:
            return h1 * w
        s = math.copysign(1.0, w)
        return s * math.sqrt(h1) * _exp(math.sqrt(h1) * abs(w) - 1.0)

    def fpp(w: float) -> float:
        if abs(w) <= r:
            return h1
        return h1 * _exp(math.sqrt(h1) * abs(w) - 1.0)

    return f, fp, fpp


def runway(h0: float, h1: float, delta: float):
    m = math.sqrt(2.0 * h0 * delta)
    x1 = math.sqrt(2.0 * delta / h0)
    x2 = x1 + (1.0 - delta) / m
    a = m / math.sqrt(h1)
    b = 1.0 - a

    def f(w: float) -> float:
        aw = abs(w)
        if aw <= x1:
            return 0.5 * h0 * w * w
        if aw <= x2:
            return m * (aw - x1) + delta
        return a * math.exp(math.sqrt(h1) * (aw - x2)) + b

    def fp(w: float) -> float:
        aw = abs(w)
        s = math.copysign(1.0, w)
        if aw <= x1:
            return h0 * w
        if aw <= x2:
            return s * m
        return s * a * math.sqrt(h1) * math.exp(math.sqrt(h1) * (aw - x2))

    def fpp(w: float) -> float:
        aw = abs(w)
        if aw <= x1:
            return h0
        if aw <= x2:
            return 0.0
        return a * h1 * math.exp(math.sqrt(h1) * (aw - x2))

    return f, fp, fpp, dict(m=m, x1=x1, x2=x2, a=a, b=b)


def pl_lower(c0: float, mu: float, h1: float):
    wc = math.sqrt(2.0 * c0 / mu)
    a = math.sqrt(2.0 * c0 * mu / h1)
    b = c0 - a

    def f(w: float) -> float:
        aw = abs(w)
        if aw <= wc:
            return 0.5 * mu * w * w
        return a * math.exp(math.sqrt(h1) * (aw - wc)) + b

    def fp(w: float) -> float:
        aw = abs(w)
        s = math.copysign(1.0, w)
        if aw <= wc:
            return mu * w
        return s * a * math.sqrt(h1) * math.exp(math.sqrt(h1) * (aw - wc))

    def fpp(w: float) -> float:
        aw = abs(w)
        if aw <= wc:
            return mu
        return a * h1 * math.exp(math.sqrt(h1) * (aw - wc))

    return f, fp, fpp, dict(wc=wc, a=a, b=b)


def scan_certificate_1d(f, fpp, h0: float, h1: float, radius: float,
                        n: int = 200001) -> float:
    """Worst signed margin f''(w) - (h0 + h1 f(w)) over a dense grid (<0 = ok)."""
    ws = np.linspace(-radius, radius, n)
    worst = -np.inf
    for w in ws:
        margin = fpp(float(w)) - (h0 + h1 * f(float(w)))
        worst = max(worst, margin)
    return worst


def criterion4_sim() -> dict:
    """Divergence above the safe threshold: H1=1, f(w0)=e^3, eta=1.1x."""
    f, fp, _ = exp_quadratic(1.0)
    w0 = math.log(math.exp(3.0)) + 1.0  # = 4: f(w0) = e^3
    m = f(w0)
    eta_star = 2.0 * (math.log(m) + 1.0) / (m * 1.0)
    eta = 1.1 * eta_star
    w = w0
    traj = [w]
    for _ in range(20):
        w = w - eta * fp(w)
        traj.append(w)
        if not math.isfinite(w) or not math.isfinite(f(w)) or abs(w) > 1e12:
            break
    abs_traj = [abs(t) for t in traj]
    increases = sum(
        1 for i in range(len(traj) - 1) if abs_traj[i + 1] > abs_traj[i]
    )
    # 0.5x threshold: run 10^4 steps, expect no guard trip
    eta_half = 0.5 * eta_star
    w = w0
    peak = abs(w)
    for _ in range(10_000):
        w = w - eta_half * fp(w)
        peak = max(peak, abs(w))
        if not math.isfinite(w) or abs(w) > 1e12:
            break
    return dict(
        eta_threshold=eta_star,
        diverging_traj=traj,
        strict_increases=increases,
        half_step_final_w=w,
        half_step_peak=peak,
    )


def criterion5_sim() -> dict:
    """Runway crossing count vs the case-1 lower-bound formula."""
    h0, h1, eps = 1.0, 4.0, 0.05
    delta = 2.0 * eps * eps
    f, fp, _, info = runway(h0, h1, delta)
    w0 = info["x2"]
    m0 = f(w0)
    eta = 2.0 * (math.log(m0) + 1.0) / (m0 * h1)
    w = w0
    k = 0
    while abs(fp(w)) > eps and k < 100_000:
        w = w - eta * fp(w)
        k += 1
    delta0 = f(w0)  # optimum is 0
    predicted = (h1 * delta0 / (math.log(delta0) + 1.0)) \
        * (delta0 - 2.0 * eps * eps) / (8.0 * eps * eps)
    return dict(eta=eta, measured=k, predicted=predicted, f_w0=m0)


def criterion7_sim() -> dict:
    """Knife-edge: constant step at the exact threshold from w0=6, H1=1."""
    f, fp, _ = exp_quadratic(1.0)
    w0 = 6.0
    m = f(w0)                      # e^5
    eta = 2.0 * (math.log(m) + 1.0) / m
    w = w0
    const_iters = None
    path = [w]
    for k in range(1, 10_001):
        w = w - eta * fp(w)
        path.append(w)
        if not math.isfinite(w) or abs(w) > 1e12 or not math.isfinite(f(w)):
            const_iters = ("diverged", k)
            break
        if f(w) - 0.5 <= 1e-3:
            const_iters = ("converged", k)
            break
    if const_iters is None:
        const_iters = ("max_iters", 10_000)

    # adaptive run with the raw-loss certificate (H1/2, H1), baseline 0
    w = w0
    adapt_iters = None
    for k in range(1, 10_001):
        loss = f(w)
        if loss - 0.5 <= 1e-3:
            adapt_iters = k - 1
            break
        step = 1.0 / (10.0 * 0.5 + 20.0 * 1.0 * loss)
        w = w - step * fp(w)
    if adapt_iters is None:
        adapt_iters = 10_000
    return dict(
        eta=eta,
        w1=path[1],
        first_bounces=path[:8],
        constant=const_iters,
        adaptive=adapt_iters,
    )


def pl_sin_mu_fine() -> dict:
    """PL constant of w^2 + 3 sin^2 w over [-10, 10], 2,000,001-point grid."""
    w = np.linspace(-10.0, 10.0, 2_000_001)
    w = w[np.abs(w) > 1e-8]
    fv = w**2 + 3.0 * np.sin(w) ** 2
    gv = 2.0 * w + 3.0 * np.sin(2.0 * w)
    ratio = gv**2 / (2.0 * fv)
    i = int(np.argmin(ratio))
    # also the coarse 20001-point grid the implementation is pinned to
    wc = np.linspace(-10.0, 10.0, 20_001)
    wc = wc[np.abs(wc) > 1e-8]
    fc = wc**2 + 3.0 * np.sin(wc) ** 2
    gc = 2.0 * wc + 3.0 * np.sin(2.0 * wc)
    rc = gc**2 / (2.0 * fc)
    return dict(
        mu_fine=float(ratio[i]),
        argmin=float(w[i]),
        mu_coarse=float(np.min(rc)),
    )


def criterion6_ls_sim(seed: int = 7) -> dict:
    """Interpolating least squares n=10, d=20: GD iterations vs aiming bound."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n, d = 10, 20
    x = rng.standard_normal((d, n))
    w_true = rng.standard_normal(d)
    y = x.T @ w_true
    h0 = float(np.max(np.sum(x * x, axis=0)))
    gram = x.T @ x

    def project(w):
        r = x.T @ w - y
        return w - x @ np.linalg.solve(gram, r)

    w = np.zeros(d)
    dist0 = float(np.linalg.norm(w - project(w)))
    eta = 1.0 / (10.0 * h0)
    iters = {}
    f0 = 0.5 * np.mean((x.T @ w - y) ** 2)
    k = 0
    for eps in (1e-2, 1e-4):
        while 0.5 * np.mean((x.T @ w - y) ** 2) > eps and k < 200_000:
            g = x @ (x.T @ w - y) / n
            w = w - eta * g
            k += 1
        iters[eps] = k
    bound = {
        eps: 20.0 * h0 * dist0**2 / (1.0 * eps) for eps in (1e-2, 1e-4)
    }
    return dict(h0=h0, dist0=dist0, f0=float(f0), measured=iters, bound=bound)


def criterion6_pl_sim() -> dict:
    """pl_sin_quadratic adaptive run vs the PL upper bound, cert (8, 0.25)."""
    mu = pl_sin_mu_fine()["mu_fine"]
    h0, h1 = 8.0, 0.25
    w = 3.0
    f0 = w**2 + 3.0 * math.sin(w) ** 2
    eps = 1e-3
    k = 0
    while (w**2 + 3.0 * math.sin(w) ** 2) > eps and k < 100_000:
        loss = w**2 + 3.0 * math.sin(w) ** 2
        step = 1.0 / (10.0 * h0 + 20.0 * h1 * loss)
        w = w - step * (2.0 * w + 3.0 * math.sin(2.0 * w))
        k += 1
    delta0 = f0
    bound = 40.0 * h1 * delta0 / mu + (20.0 * h0 / mu) * math.log(
        h0 / (2.0 * h1 * eps)
    )
    return dict(mu=mu, measured=k, bound=bound, delta0=delta0)


def envelope_fit_sim() -> dict:
    """Envelope fit of f'' on f for the exp-capped quadratic, H1 = 1."""
    f, _, fpp = exp_quadratic(1.0)
    ws = np.linspace(0.0, 3.0, 401)
    xs = np.array([f(float(w)) for w in ws])
    ys = np.array([fpp(float(w)) for w in ws])
    slope, intercept = np.polyfit(xs, ys, 1)
    slope = max(slope, 0.0)
    env_intercept = max(0.0, float(np.max(ys - slope * xs)))
    return dict(ols_slope=float(slope), ols_intercept=float(intercept),
                envelope_intercept=env_intercept)


def smoothness_fit_sim(seed: int = 3, batch: int = 64, noise: float = 0.1,
                       init_scale: float = 1.5, n_steps: int = 2000) -> dict:
    """Standalone two-layer tanh MSE SGD probe: secant smoothness vs loss fit.

    d=4, hidden=16, m=64, c=2, lambda=(1e-3, 1e-3), constant step 1e-4.
    Returns the OLS R^2 and slope of smoothness on mini-batch loss.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    d, hdim, m, c = 4, 16, 64, 2
    x = rng.standard_normal((d, m))
    w1_t = rng.standard_normal((c, hdim)) / math.sqrt(hdim)
    w2_t = rng.standard_normal((hdim, d)) / math.sqrt(d)
    y = w1_t @ np.tanh(w2_t @ x) + noise * rng.standard_normal((c, m))
    lam1 = lam2 = 1e-3

    w1 = init_scale * rng.standard_normal((c, hdim))
    w2 = init_scale * rng.standard_normal((hdim, d))

    def batch_loss_grad(w1, w2, idx):
        xb = x[:, idx]
        yb = y[:, idx]
        h = np.tanh(w2 @ xb)
        r = yb - w1 @ h
        scale = m / len(idx)  # per-sample sum scaled to full-dataset scale
        loss = scale * np.sum(r * r) + 0.5 * lam1 * np.sum(w1 * w1) \
            + 0.5 * lam2 * np.sum(w2 * w2)
        g1 = -2.0 * scale * (r @ h.T) + lam1 * w1
        gh = -(2.0 * scale) * (w1.T @ r) * (1.0 - h * h)
        g2 = gh @ xb.T + lam2 * w2
        return loss, g1, g2

    eta = 1e-4
    prev_idx = None
    losses, smooth = [], []
    for _ in range(n_steps):
        idx = rng.choice(m, size=batch, replace=False)
        loss, g1, g2 = batch_loss_grad(w1, w2, idx)
        w1n = w1 - eta * g1
        w2n = w2 - eta * g2
        # secant: this batch's gradient at w_{k+1} minus the previous batch's
        # gradient at w_k, over the step length
        if prev_idx is not None:
            _, gp1, gp2 = batch_loss_grad(w1, w2, prev_idx)
            _, gn1, gn2 = batch_loss_grad(w1n, w2n, idx)
            num = math.sqrt(
                np.sum((gn1 - gp1) ** 2) + np.sum((gn2 - gp2) ** 2)
            )
            den = math.sqrt(np.sum((w1n - w1) ** 2) + np.sum((w2n - w2) ** 2))
            if den > 1e-14:
                losses.append(loss)
                smooth.append(num / den)
        prev_idx = idx
        w1, w2 = w1n, w2n

    xs = np.asarray(losses)
    ys = np.asarray(smooth)
    slope, intercept = np.polyfit(xs, ys, 1)
    yhat = slope * xs + intercept
    ss_res = float(np.sum((ys - yhat) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    return dict(slope=float(slope), intercept=float(intercept), r2=r2,
                n=len(xs), loss_first=float(xs[0]), loss_last=float(xs[-1]))


def sgd_contraction_sim() -> dict:
    """Criterion-8 style check: per-step distance contraction, 10 seeds."""
    worst = -np.inf
    for seed in range(10):
        rng = np.random.Generator(np.random.PCG64(seed))
        n, d, batch = 10, 20, 2
        x = rng.standard_normal((d, n))
        w_true = rng.standard_normal(d)
        y = x.T @ w_true
        h0 = float(np.max(np.sum(x * x, axis=0)))
        gram = x.T @ x

        def dist(w):
            r = x.T @ w - y
            return float(np.linalg.norm(x @ np.linalg.solve(gram, r)))

        w = np.zeros(d)
        eta = 1.0 / (10.0 * h0)
        prev = dist(w)
        for _ in range(2000):
            idx = rng.choice(n, size=batch, replace=False)
            xb = x[:, idx]
            g = xb @ (xb.T @ w - y[idx]) / batch
            w = w - eta * g
            now = dist(w)
            worst = max(worst, now - prev)
            prev = now
    return dict(worst_increase=worst)


def _balanced_floor_chain(dims, floors, seed, norm_target, cap=10_000):
    """Weakly balanced chain with lambda_min floors on the leading layers."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n_layers = len(dims) - 1
    ws = []
    for i in range(n_layers):
        need = floors[i] if i < len(floors) else None
        for _ in range(cap):
            w = rng.standard_normal((dims[i], dims[i + 1]))
            w *= norm_target / float(np.linalg.norm(w))
            if need is None:
                break
            if float(np.linalg.eigvalsh(w.T @ w)[0]) >= need:
                break
        else:
            raise RuntimeError("rejection cap hit")
        ws.append(w)
    return ws


def semi_linear_spot_check(seed: int = 5) -> dict:
    """FD Hessian vs bound for depth-2 semi-linear at region points."""
    h0, h1 = semi_linear_hand_case()
    x = np.eye(2)
    y = np.eye(2)
    b = 1.0
    h_floor = 1.0

    def act(z):
        return np.where(z >= 0, z, b * z)

    def loss(ws):
        return float(np.sum((y - ws[0] @ act(ws[1] @ x)) ** 2))

    worst = -np.inf
    checked = 0
    rng = np.random.Generator(np.random.PCG64(seed))
    for _ in range(200):
        # W1 with lambda_min floor, W2 weakly balanced to the same norm
        t = rng.uniform(1.6, 2.6)
        try:
            w1 = _balanced_floor_chain([2, 2], [h_floor], int(rng.integers(1e9)),
                                       t, cap=200)[0]
        except RuntimeError:
            continue
        w2 = rng.standard_normal((2, 2))
        w2 *= t / float(np.linalg.norm(w2))
        ws0 = [w1, w2]
        v0 = np.concatenate([w.ravel() for w in ws0])

        def unflat(v):
            return [v[:4].reshape(2, 2), v[4:].reshape(2, 2)]

        n = v0.size
        h = 1e-5
        hess = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                vpp = v0.copy(); vpp[i] += h; vpp[j] += h
                vpm = v0.copy(); vpm[i] += h; vpm[j] -= h
                vmp = v0.copy(); vmp[i] -= h; vmp[j] += h
                vmm = v0.copy(); vmm[i] -= h; vmm[j] -= h
                hess[i, j] = (
                    loss(unflat(vpp)) - loss(unflat(vpm))
                    - loss(unflat(vmp)) + loss(unflat(vmm))
                ) / (4 * h * h)
        spec = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (hess + hess.T)))))
        bound = h0 + h1 * loss(ws0)
        worst = max(worst, spec - bound)
        checked += 1
        if checked >= 25:
            break
    return dict(worst_margin=worst, checked=checked, h0=h0, h1=h1)


def deep_leaky_spot_check(seed: int = 9) -> dict:
    """FD Hessian vs H0 + H1 f^2 for depth-3 leaky net at region points."""
    h0, h1 = deep_leaky_hand_case()
    x = np.eye(2)
    y = np.eye(2)
    bs = [0.5, 0.5]
    floors = [1.0, 1.0]

    def act(z, b):
        return np.where(z >= 0, z, b * z)

    def loss(ws):
        z = act(ws[2] @ x, bs[1])
        z = act(ws[1] @ z, bs[0])
        return float(np.sum((y - ws[0] @ z) ** 2))

    rng = np.random.Generator(np.random.PCG64(seed))
    worst = -np.inf
    checked = 0
    for _ in range(200):
        t = rng.uniform(1.6, 2.4)
        try:
            ws0 = _balanced_floor_chain([2, 2, 2, 2], floors,
                                        int(rng.integers(1e9)), t, cap=500)
        except RuntimeError:
            continue
        v0 = np.concatenate([w.ravel() for w in ws0])

        def unflat(v):
            return [v[0:4].reshape(2, 2), v[4:8].reshape(2, 2),
                    v[8:12].reshape(2, 2)]

        n = v0.size
        h = 1e-5
        hess = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                vpp = v0.copy(); vpp[i] += h; vpp[j] += h
                vpm = v0.copy(); vpm[i] += h; vpm[j] -= h
                vmp = v0.copy(); vmp[i] -= h; vmp[j] += h
                vmm = v0.copy(); vmm[i] -= h; vmm[j] -= h
                hess[i, j] = (
                    loss(unflat(vpp)) - loss(unflat(vpm))
                    - loss(unflat(vmp)) + loss(unflat(vmm))
                ) / (4 * h * h)
        spec = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (hess + hess.T)))))
        f0 = loss(ws0)
        bound = h0 + h1 * f0**2
        worst = max(worst, spec - bound)
        checked += 1
        if checked >= 25:
            break
    return dict(worst_margin=worst, checked=checked)


def two_layer_spot_checks(seed: int = 13) -> dict:
    """FD Hessian vs bound for the MSE and CE two-layer objectives."""
    rng = np.random.Generator(np.random.PCG64(seed))
    d, hdim, m, c = 3, 2, 4, 2
    x = rng.standard_normal((d, m))
    x /= float(np.linalg.norm(x, 2))  # ||X||_2 = 1 to reuse the hand case
    y = rng.standard_normal((c, m))
    h0_mse, h1_mse = two_layer_mse_hand_case()

    def loss_mse(v):
        w1 = v[: c * hdim].reshape(c, hdim)
        w2 = v[c * hdim:].reshape(hdim, d)
        r = y - w1 @ np.tanh(w2 @ x)
        return float(np.sum(r * r) + 0.5 * np.sum(w1 * w1)
                     + 0.5 * np.sum(w2 * w2))

    ybin = (rng.uniform(size=(1, m)) > 0.5).astype(float)
    h0_ce, h1_ce = two_layer_ce_hand_case()

    def loss_ce(v):
        w1 = v[:hdim].reshape(1, hdim)
        w2 = v[hdim:].reshape(hdim, d)
        z = w1 @ np.tanh(w2 @ x)
        p = 1.0 / (1.0 + np.exp(-z))
        eps = 1e-300
        ce = -np.sum(ybin * np.log(p + eps) + (1 - ybin) * np.log(1 - p + eps))
        return float(ce + 0.5 * np.sum(w1 * w1) + 0.5 * np.sum(w2 * w2))

    def fd_spec(fn, v0):
        n = v0.size
        h = 1e-5
        hess = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                vpp = v0.copy(); vpp[i] += h; vpp[j] += h
                vpm = v0.copy(); vpm[i] += h; vpm[j] -= h
                vmp = v0.copy(); vmp[i] -= h; vmp[j] += h
                vmm = v0.copy(); vmm[i] -= h; vmm[j] -= h
                hess[i, j] = (fn(vpp) - fn(vpm) - fn(vmp) + fn(vmm)) \
                    / (4 * h * h)
        return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (hess + hess.T)))))

    worst_mse = -np.inf
    for _ in range(25):
        v0 = rng.standard_normal(c * hdim + hdim * d)
        spec = fd_spec(loss_mse, v0)
        worst_mse = max(worst_mse, spec - (h0_mse + h1_mse * loss_mse(v0)))
    worst_ce = -np.inf
    for _ in range(25):
        v0 = rng.standard_normal(hdim + hdim * d)
        spec = fd_spec(loss_ce, v0)
        worst_ce = max(worst_ce, spec - (h0_ce + h1_ce * loss_ce(v0)))
    return dict(worst_mse=worst_mse, worst_ce=worst_ce)


def envelope_fit_sim2() -> dict:
    """Envelope fit for H1 = 2 over w in [0, 3/sqrt(2)], 401 points."""
    f, _, fpp = exp_quadratic(2.0)
    ws = np.linspace(0.0, 3.0 / math.sqrt(2.0), 401)
    xs = np.array([f(float(w)) for w in ws])
    ys = np.array([fpp(float(w)) for w in ws])
    slope, intercept = np.polyfit(xs, ys, 1)
    slope = max(slope, 0.0)
    env_intercept = max(0.0, float(np.max(ys - slope * xs)))
    return dict(ols_slope=float(slope), envelope_intercept=env_intercept)


def balanced_chain(dims: list[int], seed: int, scale: float = 1.0):
    """Strongly balanced weight chain via shared singular profile."""
    rng = np.random.Generator(np.random.PCG64(seed))
    r = min(dims)
    s = rng.uniform(0.5, 1.5, size=r)
    s *= scale / math.sqrt(float(np.sum(s * s)))
    qs = []
    for n in dims:
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        qs.append(q)
    ws = []
    for i in range(len(dims) - 1):
        sig = np.zeros((dims[i], dims[i + 1]))
        sig[:r, :r] = np.diag(s)
        ws.append(qs[i] @ sig @ qs[i + 1].T)
    return ws


def deep_linear_spot_check(seed: int = 11) -> dict:
    """FD Hessian spectral norm vs bound at balanced points, depth 2, X=Y=I2."""
    consts = deep_linear_hand_case()
    h0, h1 = consts["h0"], consts["h1"]
    x = np.eye(2)
    y = np.eye(2)

    def loss(ws):
        return float(np.sum((y - ws[0] @ ws[1] @ x) ** 2))

    def flatten(ws):
        return np.concatenate([w.ravel() for w in ws])

    def unflatten(v):
        return [v[:4].reshape(2, 2), v[4:].reshape(2, 2)]

    worst = -np.inf
    for k in range(5):
        ws = balanced_chain([2, 2, 2], seed + k, scale=float(1.0 + k))
        v0 = flatten(ws)
        n = v0.size
        h = 1e-5
        hess = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                vpp = v0.copy(); vpp[i] += h; vpp[j] += h
                vpm = v0.copy(); vpm[i] += h; vpm[j] -= h
                vmp = v0.copy(); vmp[i] -= h; vmp[j] += h
                vmm = v0.copy(); vmm[i] -= h; vmm[j] -= h
                hess[i, j] = (
                    loss(unflatten(vpp)) - loss(unflatten(vpm))
                    - loss(unflatten(vmp)) + loss(unflatten(vmm))
                ) / (4 * h * h)
        spec = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (hess + hess.T)))))
        bound = h0 + h1 * loss(unflatten(v0))
        worst = max(worst, spec - bound)
    return dict(worst_margin=worst, h0=h0, h1=h1)


def report() -> None:
    np.set_printoptions(precision=17)
    print("nu (omega constant):", repr(omega_constant()))
    print("l0l1 hand case (H0, H1):", tuple(map(repr, l0l1_hand_case())))
    print("deep_linear hand case:", {k: repr(v) for k, v in
                                     deep_linear_hand_case().items()})
    print("semi_linear hand case:", tuple(map(repr, semi_linear_hand_case())))
    print("deep_leaky hand case:", tuple(map(repr, deep_leaky_hand_case())))
    print("two_layer_mse hand case:", tuple(map(repr,
                                                two_layer_mse_hand_case())))
    print("two_layer_ce hand case:", tuple(map(repr,
                                               two_layer_ce_hand_case())))
    print("max_safe examples:", repr(4 / math.e), repr(8 / math.e**3))

    ex_scan = scan_certificate_1d(*(lambda t: (t[0], t[2]))(
        exp_quadratic(1.0)), 0.5, 1.0, radius=math.log(1e4) + 1.0)
    print("exp_quadratic cert worst margin (H1=1):", ex_scan)
    f, fp, fpp, info = runway(1.0, 4.0, 0.005)
    print("runway params:", info)
    print("runway cert worst margin:",
          scan_certificate_1d(f, fpp, 1.0, 4.0,
                              radius=info["x2"] + 5 / math.sqrt(4.0)))
    f, fp, fpp, info = pl_lower(1.0, 1.0, 4.0)
    h0_pl = 1.0 + 4.0 * max(0.0, info["a"] - 1.0)
    print("pl_lower params:", info, "h0:", h0_pl)
    print("pl cert worst margin:",
          scan_certificate_1d(f, fpp, h0_pl, 4.0,
                              radius=info["wc"] + 5 / math.sqrt(4.0)))

    print("criterion 4 sim:", criterion4_sim())
    print("criterion 5 sim:", criterion5_sim())
    print("criterion 7 sim:", criterion7_sim())
    print("pl_sin mu:", pl_sin_mu_fine())
    print("criterion 6 LS sim:", criterion6_ls_sim())
    print("criterion 6 PL sim:", criterion6_pl_sim())
    print("envelope fit sim:", envelope_fit_sim())
    print("envelope fit sim H1=2:", envelope_fit_sim2())
    for batch in (64, 32, 16):
        for noise in (0.1, 0.0):
            r = smoothness_fit_sim(batch=batch, noise=noise)
            print(f"smoothness fit (batch={batch}, noise={noise}):", r)
    print("sgd contraction sim:", sgd_contraction_sim())
    print("deep_linear spot check:", deep_linear_spot_check())
    print("semi_linear spot check:", semi_linear_spot_check())
    print("deep_leaky spot check:", deep_leaky_spot_check())
    print("two_layer spot checks:", two_layer_spot_checks())


if __name__ == "__main__":
    report()
