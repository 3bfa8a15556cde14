"""Curvature measurement: traces, spectral norms, line fits, verification."""

from __future__ import annotations

import math

import numpy as np
import pytest

from warmup_lab.core import ParamPoint
from warmup_lab.errors import FitError, SamplerError
from warmup_lab.optimize import StopRule, run_gd, run_sgd
from warmup_lab.problems import (
    make_exp_quadratic,
    make_interpolating_least_squares,
    make_pl_sin_quadratic,
)
from warmup_lab.problems.types import SmoothnessCertificate
from warmup_lab.schedules import Constant, TheoreticalAdaptive
from warmup_lab.smoothness import (
    balanced_sampler,
    box_sampler,
    fit_h0h1,
    floor_sampler,
    gaussian_sampler,
    hessian_spectral_norm,
    local_smoothness_trace,
    power_iteration_spectral_norm,
    verify_certificate,
    SmoothnessSample,
)
from warmup_lab.problems import balance_diagnostics


def secant_samples(xs, ys):
    return [SmoothnessSample(loss_gap=float(x), smoothness=float(y), iter=i,
                             method="dense_eig")
            for i, (x, y) in enumerate(zip(xs, ys))]


class TestLocalSmoothnessTrace:
    def test_quadratic_core_recovers_curvature(self):
        # inside |w| <= 1 the objective is exactly quadratic with f'' = 1
        obj = make_exp_quadratic(1.0)
        traj = run_gd(obj, ParamPoint.scalar(0.8), Constant(0.1),
                      StopRule(max_iters=30))
        trace = local_smoothness_trace(obj, traj)
        assert len(trace) == 30
        assert trace.skipped == 0
        for s in trace:
            assert s.method == "trajectory_secant"
            assert s.smoothness == pytest.approx(1.0, rel=1e-9)
            assert s.loss_gap >= 0.0

    def test_degenerate_steps_are_counted_not_sampled(self):
        obj = make_exp_quadratic(1.0)
        traj = run_gd(obj, ParamPoint.scalar(0.0), Constant(0.1),
                      StopRule(max_iters=5))  # gradient is exactly zero
        trace = local_smoothness_trace(obj, traj)
        assert len(trace) == 0
        assert trace.skipped == 5

    def test_stochastic_runs_pair_fixed_batches(self):
        obj = make_interpolating_least_squares(n=6, d=12, seed=1)
        w0 = ParamPoint.from_arrays([("w", np.zeros(12))])
        traj = run_sgd(obj, w0,
                       TheoreticalAdaptive(h0=obj.certificate.h0, h1=0.0,
                                           f_star=0.0),
                       batch_size=2, seed=0, stop=StopRule(max_iters=50))
        trace = local_smoothness_trace(obj, traj)
        # stochastic pairing starts at the second iterate
        assert len(trace) + trace.skipped == 49
        assert min(s.iter for s in trace) >= 1


class TestSpectralNorms:
    def test_power_iteration_exact_on_quadratic(self):
        obj = make_exp_quadratic(1.0)
        norm = power_iteration_spectral_norm(obj, ParamPoint.scalar(0.5))
        assert norm == pytest.approx(1.0, rel=1e-5)

    def test_power_iteration_rejects_bad_tol(self):
        obj = make_exp_quadratic(1.0)
        with pytest.raises(ValueError):
            power_iteration_spectral_norm(obj, ParamPoint.scalar(0.5),
                                          tol=0.0)

    def test_dense_path_matches_analytic_curvature(self):
        obj = make_pl_sin_quadratic()
        for x in (-2.0, 0.3, 1.9):
            w = ParamPoint.scalar(x)
            expected = abs(2.0 + 6.0 * math.cos(2.0 * x))
            assert hessian_spectral_norm(obj, w) == pytest.approx(
                expected, rel=1e-4, abs=1e-6)


class TestFitH0H1:
    def test_needs_three_spread_samples(self):
        with pytest.raises(FitError):
            fit_h0h1(secant_samples([1.0, 2.0], [1.0, 2.0]))
        with pytest.raises(FitError):
            fit_h0h1(secant_samples([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]))
        with pytest.raises(ValueError):
            fit_h0h1(secant_samples([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]),
                     mode="ridge")

    def test_ols_clips_negative_slope(self):
        fit = fit_h0h1(secant_samples([0.0, 1.0, 2.0], [3.0, 2.0, 1.0]),
                       mode="ols")
        assert fit.h1_hat == 0.0
        assert fit.mode == "ols"

    def test_exact_line_is_recovered(self):
        xs = np.linspace(0.0, 5.0, 20)
        ys = 2.0 + 3.0 * xs
        fit = fit_h0h1(secant_samples(xs, ys), mode="ols")
        assert fit.h0_hat == pytest.approx(2.0, rel=1e-10)
        assert fit.h1_hat == pytest.approx(3.0, rel=1e-10)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
        assert fit.bound(2.0) == pytest.approx(8.0, rel=1e-10)

    def test_envelope_dominates_every_sample(self):
        rng = np.random.Generator(np.random.PCG64(0))
        xs = rng.uniform(0.0, 10.0, 60)
        ys = 1.0 + 0.5 * xs + rng.normal(0.0, 0.3, 60)
        fit = fit_h0h1(secant_samples(xs, ys), mode="envelope")
        assert fit.max_violation == 0.0
        assert all(fit.bound(x) >= y - 1e-12 for x, y in zip(xs, ys))

    def test_envelope_fit_frozen_exponential_case(self):
        # curvature-vs-loss pairs on a grid of the exponential-tailed
        # quadratic; frozen from tools/oracles.py::envelope_fit_sim
        obj = make_exp_quadratic(1.0)
        ws = np.linspace(0.0, 3.0, 401)
        samples = []
        for i, x in enumerate(ws):
            w = ParamPoint.scalar(float(x))
            curv = float(np.asarray(obj.hessian(w)).reshape(()))
            samples.append(SmoothnessSample(loss_gap=float(obj.value(w)),
                                            smoothness=curv, iter=i,
                                            method="dense_eig"))
        ols = fit_h0h1(samples, mode="ols")
        env = fit_h0h1(samples, mode="envelope")
        assert ols.h1_hat == pytest.approx(0.945380495280274, rel=1e-10)
        assert ols.h0_hat == pytest.approx(0.24013557253780923, rel=1e-10)
        assert env.h1_hat == ols.h1_hat
        assert env.h0_hat == pytest.approx(0.527309752359863, rel=1e-10)
        assert env.max_violation == 0.0

    def test_envelope_fit_frozen_steeper_case(self):
        # frozen from tools/oracles.py::envelope_fit_sim2 (twice the loss
        # coefficient over the matching shorter window)
        obj = make_exp_quadratic(2.0)
        ws = np.linspace(0.0, 3.0 / math.sqrt(2.0), 401)
        samples = []
        for i, x in enumerate(ws):
            w = ParamPoint.scalar(float(x))
            curv = float(np.asarray(obj.hessian(w)).reshape(()))
            samples.append(SmoothnessSample(loss_gap=float(obj.value(w)),
                                            smoothness=curv, iter=i,
                                            method="dense_eig"))
        ols = fit_h0h1(samples, mode="ols")
        env = fit_h0h1(samples, mode="envelope")
        assert ols.h1_hat == pytest.approx(1.8907609905605478, rel=1e-10)
        assert env.h0_hat == pytest.approx(1.0546195047197262, rel=1e-10)


class TestVerifyCertificate:
    def test_valid_certificate_passes(self):
        obj = make_exp_quadratic(1.0)
        report = verify_certificate(obj, obj.certificate, box_sampler(obj),
                                    n_points=200, seed=0)
        assert report.passed
        assert report.n_points == 200
        assert report.worst_margin <= 0.0

    def test_understated_certificate_fails_with_details(self):
        obj = make_exp_quadratic(1.0)
        fake = SmoothnessCertificate(h0=0.01, h1=0.01)
        report = verify_certificate(obj, fake, box_sampler(obj),
                                    n_points=100, seed=0)
        assert not report.passed
        assert report.worst_margin > 0.0
        v = report.violations[0]
        assert v.excess > 0.0
        assert v.smoothness > v.bound


class TestSamplers:
    def test_box_sampler_respects_radius(self):
        obj = make_exp_quadratic(1.0)
        rng = np.random.Generator(np.random.PCG64(0))
        radius = obj.info["sample_radius"]
        for _ in range(50):
            w = box_sampler(obj)(rng)
            assert float(np.max(np.abs(w.data))) <= radius

    def test_gaussian_sampler_matches_shapes(self):
        obj = make_interpolating_least_squares(n=4, d=6, seed=0)
        rng = np.random.Generator(np.random.PCG64(0))
        w = gaussian_sampler(obj, scale=2.0)(rng)
        assert w.shapes == obj.shapes

    def test_balanced_sampler_points_are_strongly_balanced(self):
        rng = np.random.Generator(np.random.PCG64(0))
        sampler = balanced_sampler([2, 3, 2])
        for _ in range(10):
            diag = balance_diagnostics(sampler(rng))
            assert diag["strong_balance_residual"] < 1e-10

    def test_floor_sampler_keeps_floors(self):
        rng = np.random.Generator(np.random.PCG64(0))
        sampler = floor_sampler([2, 2, 2], [1.0])
        for _ in range(10):
            diag = balance_diagnostics(sampler(rng))
            assert diag["lambda_min_W1"] >= 1.0 - 1e-12

    def test_floor_sampler_exhaustion(self):
        rng = np.random.Generator(np.random.PCG64(0))
        sampler = floor_sampler([2, 2, 2], [50.0], norm_range=(1.6, 2.6))
        with pytest.raises(SamplerError):
            sampler(rng)
