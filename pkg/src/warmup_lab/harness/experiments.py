"""Five canned desk-scale experiments, each emitting a markdown report.

Every experiment persists its runs through the shared artifact writer (same
directory layout as ``run_from_config``) and compares measured quantities
against the closed-form predictors where one applies:

- ``smoothness-vs-loss``   local smoothness tracks the loss along SGD on a
                           two-layer tanh regression; OLS + envelope fits.
- ``warmup-vs-constant``   adaptive warm-up vs the best safe constant step
                           on the exp-capped quadratic.
- ``lower-bound-demo``     constant-step iteration count on the runway
                           construction vs the worst-case lower bound.
- ``closure-demo``         sum/affine certificate closures verified
                           numerically; witness families where
                           gradient-based smoothness fails.
- ``practical-warmup``     the loss-clipped schedule's warm-up length is
                           controlled by its clipping constant C.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from ..core import Objective, ParamPoint
from ..optimize import StopRule, run_gd, run_sgd
from ..problems import make_counterexample, make_exp_quadratic
from ..schedules import max_safe_constant_step
from ..smoothness import box_sampler, fit_h0h1, local_smoothness_trace, verify_certificate
from ..theory import affine_params, predict_bound, sum_params
from .config import ExperimentConfig, build_policy, build_problem
from .runner import (
    PRNG_ID,
    TOOL_VERSION,
    RunRecord,
    resolve_out_root,
    run_from_config,
    run_id_for,
    write_run_artifacts,
)

__all__ = ["EXPERIMENTS", "ExperimentReport", "run_experiment"]


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    markdown: str
    records: list[RunRecord]
    report_path: str | None


def _table(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |",
             "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(lines)


def _g(x: float) -> str:
    return f"{x:.6g}"


# ---------------------------------------------------------------------------
# smoothness-vs-loss
# ---------------------------------------------------------------------------

def _smoothness_vs_loss(out_root: Path, jobs: int | None) -> tuple[str, list[RunRecord]]:
    cfg = ExperimentConfig(
        problem={"name": "two_layer_mse", "d": 4, "hidden": 16, "m": 64,
                 "c": 2, "dataset_seed": 3, "noise": 0.1, "init_scale": 1.5,
                 "lam1": 1e-3, "lam2": 1e-3},
        policy={"name": "constant", "eta": 1e-4},
        stop=StopRule(max_iters=2000),
        seed=0,
    )
    obj, w0, _ = build_problem(cfg.problem)
    policy = build_policy(cfg.policy, obj)
    batch = obj.n_components  # full-batch probe: the secant sees curvature,
    # not gradient noise (mismatched mini-batches drown the signal at this
    # scale; see the smoothness trace docs)
    traj = run_sgd(obj, w0, policy, batch_size=batch, seed=cfg.seed,
                   stop=cfg.stop)
    trace = local_smoothness_trace(obj, traj)
    ols = fit_h0h1(trace, mode="ols")
    env = fit_h0h1(trace, mode="envelope")

    rid = run_id_for(cfg)
    summary, paths = write_run_artifacts(
        out_root / rid, cfg, obj, traj, duration_s=0.0,
        extra_summary={"driver": "sgd", "batch_size": batch,
                       "ols_slope": ols.h1_hat, "ols_r2": ols.r_squared,
                       "envelope_h0": env.h0_hat, "envelope_h1": env.h1_hat})
    rec = RunRecord(run_id=rid, config=cfg, summary=summary, paths=paths,
                    tool_version=TOOL_VERSION, prng_id=PRNG_ID, duration_s=0.0)

    md = "\n".join([
        "# smoothness-vs-loss",
        "",
        "Local smoothness (secant estimate) against mini-batch loss along a "
        f"{cfg.stop.max_iters}-step constant-step run (eta = "
        f"{cfg.policy['eta']:g}, batch = {batch}).",
        "",
        _table(
            ["quantity", "value"],
            [["samples", str(len(trace))],
             ["OLS slope (h1 estimate)", _g(ols.h1_hat)],
             ["OLS intercept (h0 estimate)", _g(ols.h0_hat)],
             ["OLS R^2", _g(ols.r_squared)],
             ["envelope h0", _g(env.h0_hat)],
             ["envelope h1", _g(env.h1_hat)],
             ["envelope max violation", _g(env.max_violation)]]),
        "",
        f"- slope positive: **{ols.h1_hat > 0}**",
        f"- R^2 >= 0.5: **{ols.r_squared >= 0.5}**",
        f"- envelope dominates all samples: **{env.max_violation == 0.0}**",
        "",
        f"Run: `{rid}`",
    ])
    return md, [rec]


# ---------------------------------------------------------------------------
# warmup-vs-constant
# ---------------------------------------------------------------------------

def _warmup_vs_constant(out_root: Path, jobs: int | None) -> tuple[str, list[RunRecord]]:
    w0, gap_tol = 6.0, 1e-3
    probe = make_exp_quadratic(h1=1.0)
    f0 = probe.value(ParamPoint.scalar(w0))
    eta_star = max_safe_constant_step(f0, 1.0)
    stop = {"max_iters": 10_000, "loss_tol": gap_tol}
    base = dict(problem={"name": "exp_quadratic", "h1": 1.0, "w0": w0},
                seed=0)
    cfg_const = ExperimentConfig(
        policy={"name": "constant", "eta": eta_star},
        stop=StopRule(**stop), **base)
    cfg_adapt = ExperimentConfig(
        policy={"name": "adaptive", "from_certificate": True, "theta": 1.0},
        stop=StopRule(**stop), **base)
    rec_c = run_from_config(cfg_const, out_root=out_root, jobs=jobs)[0]
    rec_a = run_from_config(cfg_adapt, out_root=out_root, jobs=jobs)[0]

    def count(rec: RunRecord) -> int:
        return rec.summary["n_steps"]

    n_const, n_adapt = count(rec_c), count(rec_a)
    converged_c = rec_c.summary["stop_reason"] == "loss_tol"
    converged_a = rec_a.summary["stop_reason"] == "loss_tol"

    # gradient-target comparison against the worst-case upper bound, using
    # the certificate re-based at the true optimum: h'' <= 1 + 1*(f - 1/2)
    delta0 = f0 - 0.5
    eps_g = 0.05
    bound = predict_bound("upper_nonconvex", h0=1.0, h1=1.0, delta0=delta0,
                          eps=eps_g)
    _, w0p, _ = build_problem(cfg_adapt.problem)
    pol = build_policy(cfg_adapt.policy, probe)
    traj = run_gd(probe, w0p, pol, StopRule(max_iters=10_000, grad_tol=eps_g))
    n_grad = traj.n_steps

    md = "\n".join([
        "# warmup-vs-constant",
        "",
        f"Exp-capped quadratic, start loss {f0:.4f} (gap {delta0:.4f}), "
        f"target gap {gap_tol:g}.  The safe constant step is "
        f"{eta_star:.6g}; the adaptive policy warms the step up as the loss "
        "falls.",
        "",
        _table(
            ["policy", "iterations", "stopped by", "final f"],
            [["constant (safe threshold)", str(n_const),
              rec_c.summary["stop_reason"], _g(rec_c.summary["final_f"])],
             ["adaptive warm-up", str(n_adapt),
              rec_a.summary["stop_reason"], _g(rec_a.summary["final_f"])]]),
        "",
        f"- adaptive reached the gap target: **{converged_a}**; constant "
        f"did: **{converged_c}** (a cap-out counts as the cap, "
        f"{stop['max_iters']} iterations)",
        f"- advantage factor (constant/adaptive): "
        f"**{n_const / max(n_adapt, 1):.1f}x**",
        f"- adaptive iterations to ||grad|| <= {eps_g:g}: {n_grad} vs "
        f"worst-case bound {bound.iters:.4g} -> within bound: "
        f"**{n_grad <= bound.iters}**",
        "",
        f"Runs: `{rec_c.run_id}`, `{rec_a.run_id}`",
    ])
    return md, [rec_c, rec_a]


# ---------------------------------------------------------------------------
# lower-bound-demo
# ---------------------------------------------------------------------------

def _lower_bound_demo(out_root: Path, jobs: int | None) -> tuple[str, list[RunRecord]]:
    eps = 0.05
    cfg = ExperimentConfig(
        problem={"name": "runway", "h0": 1.0, "h1": 4.0,
                 "delta": 2.0 * eps * eps},
        policy={"name": "constant", "eta": 0.5},
        stop=StopRule(max_iters=100_000, grad_tol=eps),
        seed=0,
    )
    obj, w0, _ = build_problem(cfg.problem)
    f_w0 = obj.value(w0)
    eta = max_safe_constant_step(f_w0, 4.0)
    assert abs(eta - cfg.policy["eta"]) < 1e-15
    rec = run_from_config(cfg, out_root=out_root, jobs=jobs)[0]
    measured = rec.summary["n_steps"]
    pred = predict_bound("lower_nonconvex", h1=4.0, delta0=f_w0, eps=eps)

    md = "\n".join([
        "# lower-bound-demo",
        "",
        "Constant-step descent on the runway construction: the flat "
        "low-gradient segment forces the step count above the worst-case "
        "lower bound for any constant step that does not diverge.",
        "",
        _table(
            ["quantity", "value"],
            [["start loss", _g(f_w0)],
             ["safe constant step", _g(eta)],
             ["gradient target eps", _g(eps)],
             ["measured iterations", str(measured)],
             ["predicted minimum", _g(pred.iters)]]),
        "",
        f"- measured >= predicted: **{measured >= pred.iters}** "
        f"(margin {measured - pred.iters:.4g})",
        "",
        f"Run: `{rec.run_id}`",
    ])
    return md, [rec]


# ---------------------------------------------------------------------------
# closure-demo
# ---------------------------------------------------------------------------

def _combine_1d(name: str, parts: list[Objective]) -> Objective:
    """Pointwise sum of 1-D objectives (closure-demo scaffolding)."""

    def value(w: ParamPoint) -> float:
        return float(sum(p.value(w) for p in parts))

    def gradient(w: ParamPoint):
        return sum(p.gradient(w) for p in parts)

    def hessian(w: ParamPoint):
        return sum(p.hessian(w) for p in parts)

    radius = min(float(p.info["sample_radius"]) for p in parts)
    return Objective(name=name, dim=1, shapes=parts[0].shapes, value=value,
                     gradient=gradient, hessian=hessian,
                     info={"sample_radius": radius})


def _closure_demo(out_root: Path, jobs: int | None) -> tuple[str, list[RunRecord]]:
    # 1) summation closure on two certified 1-D objectives
    f = make_exp_quadratic(h1=1.0)
    g = make_exp_quadratic(h1=2.0)
    h = _combine_1d("sum_of_exp_quadratics", [f, g])
    cert_sum = sum_params(f.certificate, g.certificate,
                          h_star=f.f_star + g.f_star)
    rep_sum = verify_certificate(h, cert_sum, box_sampler(h), n_points=500)

    # 2) affine closure: k(w) = g(2w)
    a = 2.0

    def k_value(w: ParamPoint) -> float:
        return g.value(w.with_data(a * w.data))

    def k_gradient(w: ParamPoint):
        return a * g.gradient(w.with_data(a * w.data))

    def k_hessian(w: ParamPoint):
        return a * a * g.hessian(w.with_data(a * w.data))

    k = Objective(name="exp_quadratic_rescaled", dim=1, shapes=g.shapes,
                  value=k_value, gradient=k_gradient, hessian=k_hessian,
                  info={"sample_radius": g.info["sample_radius"] / a})
    cert_aff = affine_params(g.certificate, np.array([[a]]), f_star=0.0)
    rep_aff = verify_certificate(k, cert_aff, box_sampler(k), n_points=500)

    # 3) witness families where gradient-based (L0,L1) bounds blow up.
    # At each witness the gradient is exactly zero by construction (audited
    # below at 1e-10 relative), so the violation ratio against any fixed
    # (L0, L1) reduces to spectral-norm(Hessian) / L0 with L0 = 1.
    rows = []
    growth_ok = True
    for kind in ("sum_sin_square", "affine_cos_exp"):
        obj = make_counterexample(kind)
        ratios, audit = [], 0.0
        for m in range(1, 51):
            wm = obj.witness(m)
            hn = abs(float(obj.hessian(wm)[0, 0]))
            gn = abs(float(obj.gradient(wm)[0]))
            ratios.append(hn)
            audit = max(audit, gn / max(1.0, hn))
        increasing = all(b > a_ for a_, b in zip(ratios, ratios[1:]))
        growth_ok = growth_ok and increasing and audit <= 1e-10
        rows.append([kind, _g(ratios[0]), _g(ratios[-1]),
                     str(increasing), f"{audit:.2e}"])

    big = []
    for kind, m in (("two_layer_l2", 4), ("balanced_two_layer", 15)):
        obj = make_counterexample(kind)
        wm = obj.witness(m)
        hn = float(np.linalg.norm(obj.hessian(wm), 2))
        gn = float(np.linalg.norm(obj.gradient(wm)))
        big.append([kind, str(m), _g(hn), f"{gn:.2e}",
                    str(hn >= 1e3 and gn <= 1e-8)])

    md = "\n".join([
        "# closure-demo",
        "",
        "## Certificate closures",
        "",
        _table(
            ["closure", "h0", "h1", "violations / points", "worst margin"],
            [["sum (two exp-quadratics)", _g(cert_sum.h0), _g(cert_sum.h1),
              f"{len(rep_sum.violations)} / {rep_sum.n_points}",
              _g(rep_sum.worst_margin)],
             ["affine (w -> 2w)", _g(cert_aff.h0), _g(cert_aff.h1),
              f"{len(rep_aff.violations)} / {rep_aff.n_points}",
              _g(rep_aff.worst_margin)]]),
        "",
        f"- both certificates verified: **{rep_sum.passed and rep_aff.passed}**",
        "",
        "## Gradient-based bounds fail on witness families",
        "",
        "Violation ratio vs any fixed gradient-based bound (reference "
        "L0 = 1; the witness gradient is exactly 0, audited in the last "
        "column as max ||grad||/max(1, ||hess||) over m = 1..50):",
        "",
        _table(["construction", "ratio at m=1", "ratio at m=50",
                "strictly increasing", "gradient audit"], rows),
        "",
        f"- unbounded growth at vanishing gradient: **{growth_ok}**",
        "",
        "Curvature blow-up at interior flat points (matrix cases):",
        "",
        _table(["construction", "m", "hessian norm", "gradient norm",
                "norm >= 1e3 and grad <= 1e-8"], big),
    ])
    return md, []


# ---------------------------------------------------------------------------
# practical-warmup
# ---------------------------------------------------------------------------

def _practical_warmup(out_root: Path, jobs: int | None) -> tuple[str, list[RunRecord]]:
    peak, total = 0.08, 3000
    cfg = ExperimentConfig(
        problem={"name": "exp_quadratic", "h1": 1.0, "w0": 6.0},
        policy={"name": "practical_clipped", "c": 4.0,
                "base": {"name": "wsd", "peak": peak, "warmup_iters": 0,
                         "decay_iters": 500, "total_iters": total}},
        stop=StopRule(max_iters=total),
        seed=0,
        sweep={"policy.c": [3.5, 4.0, 4.5]},
    )
    records = run_from_config(cfg, out_root=out_root, jobs=jobs)

    rows = []
    lengths = []
    for rec in records:
        c = rec.config.policy["c"]
        csv = Path(rec.paths["trajectory.csv"]).read_text().splitlines()[1:]
        steps = [float(line.split(",")[3]) for line in csv[:-1]]
        warm = next((i for i, s in enumerate(steps) if s >= 0.99 * peak),
                    len(steps))
        lengths.append(warm)
        rows.append([_g(c), str(warm), _g(rec.summary["final_f"]),
                     rec.summary["stop_reason"]])
    ordered = all(b < a_ for a_, b in zip(lengths, lengths[1:]))

    md = "\n".join([
        "# practical-warmup",
        "",
        "Loss-clipped step policy (base: warm-up-free WSD at peak "
        f"{peak:g}): the step is base/max(1, loss/C), so larger C unclips "
        "earlier.  Warm-up length = first iteration whose step reaches 99% "
        "of the peak.",
        "",
        _table(["C", "warm-up length (iters)", "final f", "stopped by"],
               rows),
        "",
        f"- warm-up length strictly decreasing in C: **{ordered}**",
        "",
        "Runs: " + ", ".join(f"`{r.run_id}`" for r in records),
    ])
    return md, records


EXPERIMENTS: dict[str, Callable[[Path, int | None],
                                tuple[str, list[RunRecord]]]] = {
    "smoothness-vs-loss": _smoothness_vs_loss,
    "warmup-vs-constant": _warmup_vs_constant,
    "lower-bound-demo": _lower_bound_demo,
    "closure-demo": _closure_demo,
    "practical-warmup": _practical_warmup,
}


def run_experiment(name: str, out_root: str | Path | None = None,
                   jobs: int | None = None) -> ExperimentReport:
    """Run one canned experiment; returns its markdown report and runs.

    The report is also written to ``<out_root>/experiments/<name>/report.md``.
    """
    if name not in EXPERIMENTS:
        known = ", ".join(sorted(EXPERIMENTS))
        raise KeyError(f"unknown experiment {name!r}; available: {known}")
    root = Path(out_root) if out_root is not None else resolve_out_root("runs")
    md, records = EXPERIMENTS[name](root, jobs)
    report_dir = root / "experiments" / name
    report_dir.mkdir(parents=True, exist_ok=True)
    path = report_dir / "report.md"
    path.write_text(md + "\n")
    return ExperimentReport(name=name, markdown=md, records=records,
                            report_path=str(path))
