"""Constant calculators, closure rules, predictors, and inequality checks."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from warmup_lab.core import ParamPoint
from warmup_lab.errors import (
    CapabilityError,
    ConstructionError,
    InconsistencyError,
)
from warmup_lab.problems import (
    activation,
    make_dataset,
    make_exp_quadratic,
    make_interpolating_least_squares,
    make_pl_sin_quadratic,
)
from warmup_lab.problems.types import SmoothnessCertificate
from warmup_lab.theory import (
    BOUND_KINDS,
    affine_params,
    check_condition,
    check_descent_step,
    check_gradient_bound,
    check_linear_decrease,
    deep_leaky_constants,
    deep_linear_constants,
    l0l1_to_h0h1,
    predict_bound,
    rho_reduction,
    semi_linear_constants,
    sum_params,
    two_layer_ce_constants,
    two_layer_mse_constants,
)
from warmup_lab.optimize import StopRule, run_gd
from warmup_lab.schedules import TheoreticalAdaptive

from conftest import sample_points


def identity_data(d=2):
    return make_dataset(np.eye(d), np.eye(d))


class TestGradientNormConversion:
    def test_frozen_hand_case(self):
        # frozen from tools/oracles.py::l0l1_hand_case
        h0, h1 = l0l1_to_h0h1(1.0, 1.0)
        assert h0 == pytest.approx(2.7632228343518968, rel=1e-12)
        assert h1 == pytest.approx(4.0264456687037935, rel=1e-12)

    @settings(max_examples=100)
    @given(l0=st.floats(min_value=1e-3, max_value=1e3),
           l1=st.floats(min_value=1e-3, max_value=1e3))
    def test_outputs_positive_and_monotone_in_l0(self, l0, l1):
        h0, h1 = l0l1_to_h0h1(l0, l1)
        assert h0 > l0
        assert h1 > 0.0
        h0_bigger, _ = l0l1_to_h0h1(2.0 * l0, l1)
        assert h0_bigger > h0


class TestNetworkConstants:
    def test_deep_linear_frozen_hand_case(self):
        # frozen from tools/oracles.py::deep_linear_hand_case
        cert = deep_linear_constants(identity_data(), [2, 2, 2], f_star=0.0)
        assert cert.h1 == pytest.approx(77.25483399593904, rel=1e-12)
        assert cert.h0 == pytest.approx(237.25483399593904, rel=1e-12)
        assert cert.rho == 1.0

    def test_semi_linear_frozen_hand_case(self):
        # frozen from tools/oracles.py::semi_linear_hand_case
        cert = semi_linear_constants(identity_data(), [2, 2, 2], b=1.0, h=1.0)
        assert cert.h0 == pytest.approx(144.0, rel=1e-12)
        assert cert.h1 == pytest.approx(80.0, rel=1e-12)

    def test_deep_leaky_frozen_hand_case(self):
        # frozen from tools/oracles.py::deep_leaky_hand_case
        cert = deep_leaky_constants(identity_data(), [2, 2, 2, 2],
                                    slopes=[0.5, 0.5], h_list=[1.0, 1.0])
        assert cert.h0 == pytest.approx(663783.7645019878, rel=1e-12)
        assert cert.h1 == pytest.approx(73959.76450198781, rel=1e-12)
        assert cert.rho == 2.0

    def test_two_layer_frozen_hand_cases(self):
        # frozen from tools/oracles.py::two_layer hand cases
        act = activation("tanh")
        mse = two_layer_mse_constants(act, x_spectral=1.0, lam1=1.0, lam2=1.0)
        assert mse.h0 == pytest.approx(8.0, rel=1e-12)
        assert mse.h1 == pytest.approx(56.6194, rel=1e-12)
        ce = two_layer_ce_constants(act, x_spectral=1.0, lam1=1.0, lam2=1.0)
        assert ce.h0 == pytest.approx(2.0, rel=1e-12)
        assert ce.h1 == pytest.approx(16.3097, rel=1e-12)

    def test_two_layer_needs_third_derivative_constant(self):
        with pytest.raises(ConstructionError):
            two_layer_mse_constants(activation("leaky_relu"), 1.0, 1.0, 1.0)

    def test_singular_inputs_rejected(self):
        x = np.array([[1.0, 1.0], [1.0, 1.0]])  # rank-1 Gram
        data = make_dataset(x, np.eye(2))
        with pytest.raises(ConstructionError):
            deep_linear_constants(data, [2, 2, 2], f_star=0.0)


class TestSumClosure:
    def test_frozen_pair(self):
        # frozen from the exponential-tailed pair used in the closure demo
        cert_f = make_exp_quadratic(1.0).certificate  # (0.5, 1.0, base 0)
        cert_g = make_exp_quadratic(2.0).certificate  # (1.0, 2.0, base 0)
        combined = sum_params(cert_f, cert_g, h_star=1.0)
        assert combined.h0 == pytest.approx(3.5, rel=1e-15)
        assert combined.h1 == pytest.approx(2.0, rel=1e-15)
        assert combined.f_star == 1.0

    def test_baseline_precondition(self):
        a = SmoothnessCertificate(h0=1.0, h1=1.0, f_star=2.0)
        b = SmoothnessCertificate(h0=1.0, h1=1.0, f_star=3.0)
        with pytest.raises(InconsistencyError):
            sum_params(a, b, h_star=4.0)

    def test_needs_plain_exponent(self):
        a = SmoothnessCertificate(h0=1.0, h1=1.0)
        b = SmoothnessCertificate(h0=1.0, h1=1.0, rho=2.0)
        with pytest.raises(InconsistencyError):
            sum_params(a, b, h_star=0.0)

    @settings(max_examples=200)
    @given(h0f=st.floats(min_value=0.0, max_value=1e3),
           h0g=st.floats(min_value=0.0, max_value=1e3),
           h1f=st.floats(min_value=0.0, max_value=1e3),
           h1g=st.floats(min_value=0.0, max_value=1e3),
           f=st.floats(min_value=0.0, max_value=1e6),
           g=st.floats(min_value=0.0, max_value=1e6))
    def test_combined_bound_dominates_sum_of_parts(self, h0f, h0g, h1f, h1g,
                                                   f, g):
        # with zero baselines, the combined line evaluated at f+g must cover
        # the sum of the individual lines at f and g
        cert_f = SmoothnessCertificate(h0=h0f, h1=h1f)
        cert_g = SmoothnessCertificate(h0=h0g, h1=h1g)
        combined = sum_params(cert_f, cert_g, h_star=0.0)
        lhs = combined.h0 + combined.h1 * (f + g)
        rhs = (h0f + h1f * f) + (h0g + h1g * g)
        assert lhs >= rhs - 1e-9 * max(1.0, abs(rhs))


class TestAffineClosure:
    def test_frozen_doubling_map(self):
        cert_g = make_exp_quadratic(2.0).certificate  # (1.0, 2.0, base 0)
        cert = affine_params(cert_g, [[2.0]], f_star=0.0)
        assert cert.h0 == pytest.approx(4.0, rel=1e-15)
        assert cert.h1 == pytest.approx(8.0, rel=1e-15)

    def test_spectral_norm_of_wide_matrix(self):
        cert_g = SmoothnessCertificate(h0=1.0, h1=1.0)
        cert = affine_params(cert_g, [[1.0, 1.0]], f_star=0.0)
        assert cert.h0 == pytest.approx(2.0, rel=1e-12)
        assert cert.h1 == pytest.approx(2.0, rel=1e-12)

    def test_baseline_shift_enters_h0(self):
        cert_g = SmoothnessCertificate(h0=1.0, h1=3.0, f_star=1.0)
        cert = affine_params(cert_g, [[1.0]], f_star=2.0)
        assert cert.h0 == pytest.approx(1.0 + 3.0 * 1.0, rel=1e-12)

    def test_optimum_cannot_undershoot_inner_baseline(self):
        cert_g = SmoothnessCertificate(h0=1.0, h1=1.0, f_star=1.0)
        with pytest.raises(InconsistencyError):
            affine_params(cert_g, [[1.0]], f_star=0.0)


class TestRhoReduction:
    def test_hand_case(self):
        assert rho_reduction(1.0, 3.0, 2.0, 10.0) == (1.0, 30.0)

    def test_identity_at_rho_one(self):
        assert rho_reduction(2.0, 5.0, 1.0, 123.0) == (2.0, 5.0)

    def test_guards(self):
        with pytest.raises(ValueError):
            rho_reduction(1.0, 1.0, 0.5, 1.0)
        with pytest.raises(ValueError):
            rho_reduction(1.0, 1.0, 2.0, 0.0)


class TestPredictBound:
    def test_kind_list(self):
        assert set(BOUND_KINDS) == {
            "upper_aiming", "upper_pl", "upper_nonconvex",
            "lower_nonconvex", "lower_convex", "lower_pl"}
        with pytest.raises(ValueError):
            predict_bound("upper_magic", h0=1.0)

    def test_upper_aiming_frozen(self):
        # frozen from tools/oracles.py::criterion6_ls_sim bound
        pred = predict_bound("upper_aiming", h0=26.555414342095084, h1=0.0,
                             dist0=3.6236786644255106, eps=0.01, theta=1.0)
        assert pred.iters == pytest.approx(697400.7910077033, rel=1e-12)

    def test_upper_pl_frozen(self):
        # frozen from tools/oracles.py::criterion6_pl_sim bound
        pred = predict_bound("upper_pl", h0=8.0, h1=0.25,
                             mu=0.17553098588061242,
                             delta0=9.059744570024451, eps=1e-3)
        assert pred.iters == pytest.approx(9339.960564061475, rel=1e-12)

    def test_upper_pl_hand_case(self):
        # 40*h1*delta0/mu + (20*h0/mu)*log(h0/(2*h1*eps)), evaluated by hand
        pred = predict_bound("upper_pl", h0=3.0, h1=1.0, mu=0.5, delta0=2.0,
                             eps=0.01)
        assert pred.iters == pytest.approx(761.2762352915506, rel=1e-12)

    def test_upper_nonconvex_hand_case(self):
        pred = predict_bound("upper_nonconvex", h0=1.0, h1=1.0, delta0=3.0,
                             eps=0.1)
        assert pred.iters == pytest.approx(34588.23529411764, rel=1e-12)

    def test_lower_nonconvex_frozen(self):
        # frozen from tools/oracles.py::criterion5_sim predicted
        pred = predict_bound("lower_nonconvex", h1=4.0, delta0=1.0, eps=0.05)
        assert pred.iters == pytest.approx(198.99999999999997, rel=1e-12)

    def test_lower_convex_hand_case(self):
        pred = predict_bound("lower_convex", h1=4.0, delta0=1.0, eps=0.05)
        assert pred.iters == pytest.approx(18.999999999999996, rel=1e-12)

    def test_lower_pl_hand_case(self):
        pred = predict_bound("lower_pl", h1=4.0, mu=0.5, delta0=2.0, eps=0.1)
        assert pred.iters == pytest.approx(7.077310957841867, rel=1e-12)

    def test_missing_inputs(self):
        with pytest.raises(ValueError):
            predict_bound("upper_aiming", h0=1.0, h1=0.0, eps=0.1)

    def test_preconditions(self):
        with pytest.raises(ValueError):  # gap term hits log(delta0) + 1 <= 0
            predict_bound("lower_nonconvex", h1=1.0, delta0=math.exp(-1.0),
                          eps=0.01)
        with pytest.raises(ValueError):  # needs delta0 > 2*eps^2
            predict_bound("lower_nonconvex", h1=1.0, delta0=1.0, eps=1.0)
        with pytest.raises(ValueError):  # needs eps < delta0
            predict_bound("lower_convex", h1=1.0, delta0=1.0, eps=1.0)
        with pytest.raises(ValueError):  # needs eps <= delta0
            predict_bound("lower_pl", h1=1.0, mu=1.0, delta0=1.0, eps=2.0)
        with pytest.raises(ValueError):  # loss-scaling constant must be > 0
            predict_bound("lower_pl", h1=0.0, mu=1.0, delta0=2.0, eps=0.1)

    def test_inputs_echoed(self):
        pred = predict_bound("lower_convex", h1=4.0, delta0=1.0, eps=0.05)
        assert pred.kind == "lower_convex"
        assert pred.inputs["delta0"] == 1.0


class TestCheckGradientBound:
    def test_holds_on_certified_scalar(self):
        obj = make_exp_quadratic(1.0)
        from warmup_lab.smoothness import box_sampler

        points = sample_points(box_sampler(obj), 100, seed=0)
        report = check_gradient_bound(obj, obj.certificate, points)
        assert report.passed
        assert report.n_checked == 100
        assert report.worst_margin <= 0.0

    def test_rejects_gap_power_certificates(self):
        obj = make_exp_quadratic(1.0)
        cert = SmoothnessCertificate(h0=1.0, h1=1.0, rho=2.0)
        with pytest.raises(InconsistencyError):
            check_gradient_bound(obj, cert, [ParamPoint.scalar(1.0)])

    def test_flags_understated_certificate(self):
        obj = make_pl_sin_quadratic()
        fake = SmoothnessCertificate(h0=0.01, h1=0.0)
        points = [ParamPoint.scalar(x) for x in np.linspace(-5, 5, 21)]
        report = check_gradient_bound(obj, fake, points)
        assert not report.passed
        assert report.worst_margin > 0.0


class TestCheckDescentStep:
    def test_certified_step_passes(self):
        obj = make_exp_quadratic(1.0)
        cert = obj.certificate
        w = ParamPoint.scalar(2.0)
        gap = float(obj.value(w)) - cert.f_star
        eta = 1.0 / (10.0 * cert.h0 + 20.0 * cert.h1 * gap)
        report = check_descent_step(obj, cert, w, eta)
        assert report.passed
        assert report.n_checked == 1

    def test_premise_violation_is_out_of_scope(self):
        obj = make_exp_quadratic(1.0)
        report = check_descent_step(obj, obj.certificate,
                                    ParamPoint.scalar(2.0), eta=100.0)
        assert report.n_checked == 0
        assert report.n_out_of_scope == 1
        assert report.passed  # vacuously: nothing in scope failed

    def test_false_certificate_detected(self):
        obj = make_exp_quadratic(1.0)
        fake = SmoothnessCertificate(h0=0.0, h1=0.0)
        report = check_descent_step(obj, fake, ParamPoint.scalar(3.0),
                                    eta=0.75)
        assert not report.passed
        assert report.worst_margin > 0.0


class TestCheckCondition:
    def test_aiming_holds_on_convex_scalar(self):
        obj = make_exp_quadratic(1.0)
        points = [ParamPoint.scalar(x) for x in np.linspace(-3, 3, 31)]
        report = check_condition("aiming", obj, points, theta=1.0)
        assert report.passed

    def test_aiming_needs_theta_and_projector(self):
        obj = make_exp_quadratic(1.0)
        with pytest.raises(ValueError):
            check_condition("aiming", obj, [ParamPoint.scalar(1.0)])
        bare = obj.with_overrides(project_solution=None)
        with pytest.raises(CapabilityError):
            check_condition("aiming", bare, [ParamPoint.scalar(1.0)],
                            theta=1.0)

    def test_pl_holds_with_margin_below_grid_constant(self):
        obj = make_pl_sin_quadratic()
        points = [ParamPoint.scalar(x) for x in np.linspace(-9.7, 9.7, 41)]
        report = check_condition("pl", obj, points,
                                 mu=0.9 * obj.info["mu"])
        assert report.passed

    def test_pl_flags_overstated_constant(self):
        obj = make_pl_sin_quadratic()
        points = [ParamPoint.scalar(x) for x in np.linspace(-9.7, 9.7, 41)]
        report = check_condition("pl", obj, points, mu=10.0)
        assert not report.passed

    def test_interpolation_exact_on_least_squares(self):
        obj = make_interpolating_least_squares(n=5, d=9, seed=0)
        rng = np.random.Generator(np.random.PCG64(0))
        points = [ParamPoint.from_arrays([("w", rng.standard_normal(9))])
                  for _ in range(5)]
        report = check_condition("interpolation", obj, points)
        assert report.passed
        assert report.n_checked == 5 * obj.n_components

    def test_interpolation_needs_components(self):
        obj = make_exp_quadratic(1.0)
        with pytest.raises(CapabilityError):
            check_condition("interpolation", obj, [ParamPoint.scalar(1.0)])

    def test_unknown_kind(self):
        obj = make_exp_quadratic(1.0)
        with pytest.raises(ValueError):
            check_condition("quasar", obj, [ParamPoint.scalar(1.0)],
                            theta=1.0)


class TestCheckLinearDecrease:
    def run_adaptive(self, w0=6.0, iters=400):
        obj = make_exp_quadratic(1.0)
        cert = obj.certificate
        pol = TheoreticalAdaptive(h0=cert.h0, h1=cert.h1, theta=1.0,
                                  f_star=cert.f_star)
        traj = run_gd(obj, ParamPoint.scalar(w0), pol,
                      StopRule(max_iters=iters))
        return obj, cert, traj

    def test_high_loss_phase_contracts(self):
        obj, cert, traj = self.run_adaptive()
        report = check_linear_decrease(obj, cert, theta=1.0, dist0=6.0,
                                       traj=traj)
        assert report.passed
        assert report.n_checked > 0
        assert report.n_out_of_scope > 0  # the low-loss tail is skipped

    def test_needs_loss_scaling_term(self):
        obj, _, traj = self.run_adaptive(iters=10)
        flat = SmoothnessCertificate(h0=1.0, h1=0.0)
        with pytest.raises(InconsistencyError):
            check_linear_decrease(obj, flat, theta=1.0, dist0=6.0, traj=traj)

    def test_parameter_validation(self):
        obj, cert, traj = self.run_adaptive(iters=10)
        with pytest.raises(ValueError):
            check_linear_decrease(obj, cert, theta=0.0, dist0=6.0, traj=traj)
        with pytest.raises(ValueError):
            check_linear_decrease(obj, cert, theta=1.0, dist0=0.0, traj=traj)
