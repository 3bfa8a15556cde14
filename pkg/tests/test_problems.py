"""Problem constructors: values, gradients, certificates, witnesses."""

from __future__ import annotations

import math

import numpy as np
import pytest

from warmup_lab.core import ParamPoint, finite_diff_gradient
from warmup_lab.errors import ConstructionError
from warmup_lab.problems import (
    activation,
    balance_diagnostics,
    make_balanced_init,
    make_counterexample,
    make_dataset,
    make_deep_leaky,
    make_deep_linear,
    make_exp_quadratic,
    make_interpolating_least_squares,
    make_pl_lower_bound,
    make_pl_sin_quadratic,
    make_runway,
    make_semi_linear,
    make_two_layer_ce_l2,
    make_two_layer_mse_l2,
)
from warmup_lab.problems.counterexamples import COUNTEREXAMPLE_KINDS
from warmup_lab.problems.types import TANH_C3


def scalar_value(obj, x):
    return float(obj.value(ParamPoint.scalar(x)))


def scalar_grad(obj, x):
    return float(obj.gradient(ParamPoint.scalar(x))[0])


def scalar_curv(obj, x):
    return float(np.asarray(obj.hessian(ParamPoint.scalar(x))).reshape(()))


class TestExpQuadratic:
    def test_core_and_tail_values(self):
        obj = make_exp_quadratic(4.0)
        assert scalar_value(obj, 0.0) == 0.5
        assert obj.f_star == 0.5
        # boundary |w| = 1/sqrt(h1): quadratic core meets the tail at 1.0
        assert scalar_value(obj, 0.5) == pytest.approx(1.0, rel=1e-12)
        assert scalar_value(obj, 1.0) == pytest.approx(math.exp(1.0),
                                                       rel=1e-12)

    def test_certificate_is_half_h1_then_h1(self):
        obj = make_exp_quadratic(3.0)
        cert = obj.certificate
        assert (cert.h0, cert.h1, cert.f_star, cert.rho) == (1.5, 3.0, 0.0, 1.0)

    def test_curvature_obeys_certificate(self):
        obj = make_exp_quadratic(1.0)
        for x in np.linspace(-4.0, 4.0, 41):
            curv = abs(scalar_curv(obj, x))
            assert curv <= 0.5 + 1.0 * scalar_value(obj, x) + 1e-12

    def test_gradient_matches_fd_across_boundary(self):
        obj = make_exp_quadratic(2.0)
        for x in (-1.2, -0.701, 0.3, 0.7072, 2.5):
            w = ParamPoint.scalar(x)
            fd = finite_diff_gradient(obj, w)[0]
            assert scalar_grad(obj, x) == pytest.approx(fd, rel=1e-5,
                                                        abs=1e-8)

    def test_recommended_start_from_target_value(self):
        obj = make_exp_quadratic(1.0, m_value=math.exp(3.0))
        assert obj.info["w0_recommended"] == 4.0
        assert scalar_value(obj, 4.0) == pytest.approx(math.exp(3.0),
                                                       rel=1e-12)

    def test_target_value_must_exceed_one(self):
        with pytest.raises(ConstructionError):
            make_exp_quadratic(1.0, m_value=0.9)


class TestRunway:
    def test_frozen_geometry(self):
        obj = make_runway(1.0, 4.0, 0.005)
        info = obj.info
        # frozen from tools/oracles.py::runway params
        assert info["slope_m"] == pytest.approx(0.1, rel=1e-15)
        assert info["x1"] == pytest.approx(0.1, rel=1e-15)
        assert info["x2"] == pytest.approx(10.049999999999999, rel=1e-15)
        assert scalar_value(obj, info["x1"]) == pytest.approx(0.005, rel=1e-12)
        assert scalar_value(obj, info["x2"]) == pytest.approx(1.0, rel=1e-12)
        assert obj.f_star == 0.0
        assert (obj.certificate.h0, obj.certificate.h1) == (1.0, 4.0)

    def test_flat_middle_has_constant_slope(self):
        obj = make_runway(1.0, 4.0, 0.005)
        for x in (0.5, 3.0, 9.0):
            assert scalar_grad(obj, x) == pytest.approx(0.1, rel=1e-12)
            assert scalar_curv(obj, x) == 0.0

    def test_too_shallow_tail_rejected(self):
        # tail exponent rate m/sqrt(h1) must stay <= 1
        with pytest.raises(ConstructionError):
            make_runway(50.0, 0.01, 0.5)

    def test_delta_range_enforced(self):
        with pytest.raises(ConstructionError):
            make_runway(1.0, 4.0, 1.5)


class TestPlLowerBound:
    def test_frozen_hand_case(self):
        obj = make_pl_lower_bound(c0=1.0, mu=1.0, h1=4.0)
        # frozen from tools/oracles.py::pl_lower params
        assert obj.info["w_c"] == pytest.approx(1.4142135623730951, rel=1e-15)
        assert obj.certificate.h0 == pytest.approx(1.0, rel=1e-15)
        assert obj.certificate.h1 == 4.0
        assert obj.f_star == 0.0
        assert scalar_value(obj, 0.0) == 0.0

    def test_quadratic_near_origin(self):
        obj = make_pl_lower_bound(c0=1.0, mu=1.0, h1=4.0)
        assert scalar_value(obj, 0.3) == pytest.approx(0.5 * 1.0 * 0.09,
                                                       rel=1e-12)

    def test_incompatible_constants_rejected(self):
        with pytest.raises(ConstructionError):
            make_pl_lower_bound(c0=0.1, mu=10.0, h1=0.1)


class TestPlSinQuadratic:
    def test_values_and_grid_constant(self):
        obj = make_pl_sin_quadratic()
        assert scalar_value(obj, 2.0) == pytest.approx(
            4.0 + 3.0 * math.sin(2.0) ** 2, rel=1e-14)
        # frozen from tools/oracles.py::pl_sin_mu_fine (20001-point grid)
        assert obj.info["mu"] == pytest.approx(0.17553109569721753, rel=1e-15)
        # the 2,000,001-point refinement moves it by < 1e-6 relative
        assert obj.info["mu"] == pytest.approx(0.17553098588061242, rel=1e-6)

    def test_certificate_envelope_is_tight_at_origin(self):
        obj = make_pl_sin_quadratic()
        assert (obj.certificate.h0, obj.certificate.h1) == (8.0, 0.25)
        assert scalar_curv(obj, 0.0) == pytest.approx(8.0, rel=1e-14)
        for x in np.linspace(-10.0, 10.0, 201):
            curv = abs(scalar_curv(obj, x))
            assert curv <= 8.0 + 0.25 * scalar_value(obj, x) + 1e-12


class TestDatasetsAndActivations:
    def test_identity_dataset_stats(self):
        data = make_dataset(np.eye(2), np.eye(2))
        assert data.lambda_min == pytest.approx(1.0)
        assert data.x_spectral == pytest.approx(1.0)
        assert data.y_frob == pytest.approx(math.sqrt(2.0), rel=1e-15)
        assert (data.input_dim, data.n_samples, data.output_dim) == (2, 2, 2)

    def test_sample_count_mismatch(self):
        with pytest.raises(ConstructionError):
            make_dataset(np.eye(3), np.eye(2))

    def test_tanh_activation_constants(self):
        act = activation("tanh")
        assert (act.c1, act.c2, act.c3) == (1.0, 1.0, TANH_C3)
        assert TANH_C3 == 0.7699

    def test_identity_and_leaky(self):
        assert activation("identity").c3 == 0.0
        assert activation("leaky_relu", slope=0.3).c3 is None
        with pytest.raises(ConstructionError):
            activation("leaky_relu", slope=1.5)
        with pytest.raises(ConstructionError):
            activation("perceptron")


class TestBalancedInit:
    def test_strong_mode_shares_gram_factors(self):
        w = make_balanced_init([3, 4, 3], mode="strong", scale=1.2, seed=3)
        diag = balance_diagnostics(w)
        assert diag["strong_balance_residual"] < 1e-12

    def test_weak_mode_equalizes_norms(self):
        w = make_balanced_init([3, 4, 3], mode="weak", scale=1.2, seed=3)
        diag = balance_diagnostics(w)
        assert diag["weak_balance_spread"] < 1e-12

    def test_needs_at_least_two_dims(self):
        with pytest.raises(ConstructionError):
            make_balanced_init([3], mode="strong")


class TestNetworks:
    def setup_method(self):
        self.data = make_dataset(np.eye(2), np.eye(2))
        self.w_id = ParamPoint.from_arrays(
            [("W1", np.eye(2)), ("W2", np.eye(2))])

    def test_deep_linear_zero_at_identity_chain(self):
        obj = make_deep_linear(self.data, [2, 2, 2])
        assert float(obj.value(self.w_id)) == 0.0

    def test_deep_linear_gradient_matches_fd(self):
        obj = make_deep_linear(self.data, [2, 2, 2])
        rng = np.random.Generator(np.random.PCG64(0))
        w = ParamPoint.from_arrays([("W1", rng.standard_normal((2, 2))),
                                    ("W2", rng.standard_normal((2, 2)))])
        np.testing.assert_allclose(obj.gradient(w),
                                   finite_diff_gradient(obj, w),
                                   rtol=1e-5, atol=1e-7)

    def test_semi_linear_zero_at_identity_chain(self):
        obj = make_semi_linear(self.data, [2, 2, 2], slope=0.5)
        assert float(obj.value(self.w_id)) == 0.0

    def test_semi_linear_slope_range(self):
        with pytest.raises(ConstructionError):
            make_semi_linear(self.data, [2, 2, 2], slope=0.0)

    def test_deep_leaky_slope_count(self):
        with pytest.raises(ConstructionError):
            make_deep_leaky(self.data, [2, 2, 2, 2], slopes=[0.5])

    def test_two_layer_mse_needs_bounded_third_derivative(self):
        with pytest.raises(ConstructionError):
            make_two_layer_mse_l2(self.data, activation("leaky_relu"),
                                  hidden=3, lam1=1e-3, lam2=1e-3)

    def test_two_layer_mse_needs_positive_penalties(self):
        with pytest.raises(ConstructionError):
            make_two_layer_mse_l2(self.data, activation("tanh"),
                                  hidden=3, lam1=0.0, lam2=1e-3)

    def test_two_layer_value_is_component_mean(self):
        obj = make_two_layer_mse_l2(self.data, activation("tanh"),
                                    hidden=3, lam1=1e-3, lam2=1e-3)
        rng = np.random.Generator(np.random.PCG64(4))
        w = ParamPoint.from_arrays([("W1", rng.standard_normal((2, 3))),
                                    ("W2", rng.standard_normal((3, 2)))])
        mean = np.mean([obj.value_i(w, i) for i in range(obj.n_components)])
        assert float(obj.value(w)) == pytest.approx(float(mean), rel=1e-12)
        np.testing.assert_allclose(
            obj.gradient(w),
            np.mean([obj.gradient_i(w, i) for i in range(obj.n_components)],
                    axis=0),
            rtol=1e-10, atol=1e-12)

    def test_cross_entropy_needs_scalar_output(self):
        with pytest.raises(ConstructionError):
            make_two_layer_ce_l2(self.data, activation("tanh"),
                                 hidden=3, lam1=1e-3, lam2=1e-3)

    def test_cross_entropy_gradient_matches_fd(self):
        data = make_dataset(np.eye(2), np.array([[1.0, 0.0]]))
        obj = make_two_layer_ce_l2(data, activation("tanh"),
                                   hidden=3, lam1=1e-3, lam2=1e-3)
        rng = np.random.Generator(np.random.PCG64(5))
        w = ParamPoint.from_arrays([("W1", rng.standard_normal((1, 3))),
                                    ("W2", rng.standard_normal((3, 2)))])
        np.testing.assert_allclose(obj.gradient(w),
                                   finite_diff_gradient(obj, w),
                                   rtol=1e-5, atol=1e-7)


class TestInterpolatingLeastSquares:
    def test_needs_overparameterization(self):
        with pytest.raises(ConstructionError):
            make_interpolating_least_squares(n=5, d=3)

    def test_projector_reaches_shared_zero(self):
        obj = make_interpolating_least_squares(n=6, d=10, seed=2)
        rng = np.random.Generator(np.random.PCG64(0))
        w = ParamPoint.from_arrays([("w", rng.standard_normal(10))])
        p = obj.project_solution(w)
        assert float(obj.value(p)) <= 1e-20
        # idempotent
        p2 = obj.project_solution(p)
        np.testing.assert_allclose(p2.data, p.data, atol=1e-12)
        # every component shares the optimum there
        assert obj.component_f_star == 0.0
        for j in range(obj.n_components):
            assert obj.value_i(p, j) <= 1e-20

    def test_certificate_has_no_loss_term(self):
        obj = make_interpolating_least_squares(n=6, d=10, seed=2)
        assert obj.certificate.h1 == 0.0
        assert obj.certificate.h0 > 0.0


class TestCounterexamples:
    def test_known_kinds(self):
        assert COUNTEREXAMPLE_KINDS == ("sum_sin_square", "affine_cos_exp",
                                        "two_layer_l2", "balanced_two_layer")
        with pytest.raises(ConstructionError):
            make_counterexample("unknown")

    def test_sum_sin_square_witness_curvature_grows(self):
        obj = make_counterexample("sum_sin_square")
        # curvature 4*w*cos(w^2) at w = sqrt(m*pi) has magnitude 4*sqrt(m*pi)
        for m in (1, 4, 9):
            w = obj.witness(m)
            curv = abs(float(np.asarray(obj.hessian(w)).reshape(())))
            assert curv == pytest.approx(4.0 * math.sqrt(m * math.pi),
                                         rel=1e-12)
            assert abs(obj.gradient(w)[0]) < 1e-12

    def test_affine_cos_exp_saturates_to_inf(self):
        obj = make_counterexample("affine_cos_exp")
        assert math.isinf(float(obj.value(ParamPoint.scalar(750.0))))
        w = obj.witness(1)
        assert abs(obj.gradient(w)[0]) < 1e-10

    def test_balanced_two_layer_witness_is_exact_critical_point(self):
        obj = make_counterexample("balanced_two_layer")
        w = obj.witness(3)
        g = obj.gradient(w)
        assert float(np.max(np.abs(g))) == 0.0

    def test_two_layer_l2_witness_hessian_blows_up(self):
        obj = make_counterexample("two_layer_l2")
        from warmup_lab.smoothness import hessian_spectral_norm

        n1 = hessian_spectral_norm(obj, obj.witness(1))
        n3 = hessian_spectral_norm(obj, obj.witness(3))
        assert n3 > n1 > 1.0
