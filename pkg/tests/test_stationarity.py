import json

import numpy as np
import pytest

from rankcertify.affine import AffineSet, adjoint
from rankcertify.cones import in_frechet_rank_set
from rankcertify.demos import hankel3_setup, lrr4_setup
from rankcertify.exceptions import InputError
from rankcertify.matcore import svd_point
from rankcertify.oracle import random_rank_r
from rankcertify.problems import quadratic_problem
from rankcertify.stationarity import (
    Certificate,
    beta_threshold,
    certify_F,
    certify_alpha,
    classify,
    estimate_multipliers,
    lagrangian_grad,
    second_order_necessary,
    second_order_sufficient,
)


def affine_through(X0, l, seed):
    rng = np.random.default_rng(seed)
    mats = [rng.standard_normal(X0.shape) for _ in range(l)]
    return AffineSet(mats, [float(np.sum(A * X0)) for A in mats])


def stationary_quadratic(m, n, r, l, seed, scale=1.0):
    """A Frobenius-distance problem whose target makes X0 F-stationary.

    With H = X0 + W + sum y_i A^i and W in the fixed-rank normal space at X0,
    the Lagrangian gradient at (X0, y) is exactly -W.
    """
    rng = np.random.default_rng(seed)
    X0 = random_rank_r(m, n, r, seed)
    S = affine_through(X0, l, seed + 1)
    P = svd_point(X0)
    D = rng.standard_normal((m - r, n - r))
    W = scale * P.from_internal(P.U_gamma_m_perp @ D @ P.V_gamma_n_perp.T)
    y = rng.standard_normal(l)
    H = X0 + W + adjoint(S, y)
    from rankcertify.problems import Problem, frobenius_distance_objective

    return Problem(frobenius_distance_objective(H), S, r), X0, W


class TestMultipliers:
    def test_hankel3_zero_multipliers(self):
        prob, Xbar = hankel3_setup()
        y, residual, unique = estimate_multipliers(prob, svd_point(Xbar))
        assert np.allclose(y, 0.0, atol=1e-10)
        assert residual < 1e-10

    def test_lrr4_multipliers(self):
        prob, Wbar = lrr4_setup()
        y, residual, _ = estimate_multipliers(prob, svd_point(Wbar))
        assert np.allclose(y, -0.25, atol=1e-10)
        assert residual < 1e-10
        gradL = lagrangian_grad(prob, Wbar, y)
        assert np.linalg.norm(gradL) < 1e-10

    def test_constructed_stationary_point(self):
        prob, X0, W = stationary_quadratic(5, 4, 2, 2, seed=3)
        y, residual, _ = estimate_multipliers(prob, svd_point(X0))
        assert residual < 1e-8
        gradL = lagrangian_grad(prob, X0, y)
        assert in_frechet_rank_set(svd_point(X0), 2, -gradL)


class TestCertifyF:
    def test_hankel3(self):
        prob, Xbar = hankel3_setup()
        cert = certify_F(prob, Xbar)
        assert cert.feasible and cert.f_stationary
        assert cert.rank_s == 2
        assert cert.global_min_scope == "restricted_to_RXGamma"

    def test_lrr4_global(self):
        prob, Wbar = lrr4_setup()
        cert = certify_F(prob, Wbar)
        assert cert.f_stationary
        assert cert.rank_s == 1
        assert cert.global_min_scope == "global"

    def test_infeasible_point(self):
        prob, Xbar = hankel3_setup()
        cert = certify_F(prob, np.eye(3))  # not Hankel
        assert not cert.feasible and not cert.f_stationary
        assert cert.stationary_residual == np.inf

    def test_rank_violation_is_infeasible(self):
        prob, _ = hankel3_setup()
        X = np.array([[1.0, 2.0, 3.0], [2.0, 3.0, 5.0], [3.0, 5.0, 7.0]])
        if np.linalg.matrix_rank(X) > 2:
            cert = certify_F(prob, X)
            assert not cert.feasible

    def test_nonstationary_point(self):
        prob, X0, _ = stationary_quadratic(4, 4, 2, 1, seed=5)
        # perturb the target's tangent component: residual becomes visible
        probs = quadratic_problem(np.eye(16), np.ones((4, 4)), prob.constraints, 2)
        cert = certify_F(probs, X0)
        assert cert.feasible and not cert.f_stationary


class TestBetaThreshold:
    def test_hankel3_beta_is_one(self):
        prob, Xbar = hankel3_setup()
        P = svd_point(Xbar)
        y, _, _ = estimate_multipliers(prob, P)
        beta = beta_threshold(P, prob.r, lagrangian_grad(prob, Xbar, y))
        assert beta == pytest.approx(1.0, abs=1e-10)

    def test_zero_gradient_is_infinite(self):
        P = svd_point(np.diag([1.0, 1.0, 0.0]))
        assert beta_threshold(P, 2, np.zeros((3, 3))) == np.inf

    def test_rank_deficient_point_zero_threshold(self):
        P = svd_point(np.diag([1.0, 0.0, 0.0]))
        assert beta_threshold(P, 2, np.eye(3)) == 0.0


class TestCertifyAlpha:
    def test_hankel3_interval(self):
        prob, Xbar = hankel3_setup()
        y = np.zeros(4)
        for alpha in (0.1, 0.5, 0.99):
            assert certify_alpha(prob, Xbar, y, alpha).alpha_stationary
        assert not certify_alpha(prob, Xbar, y, 2.0).alpha_stationary

    def test_rank_slack_requires_zero_gradient(self):
        prob, Wbar = lrr4_setup()
        y = np.full(4, -0.25)
        assert certify_alpha(prob, Wbar, y, 1.0).alpha_stationary
        assert not certify_alpha(prob, Wbar, y + 1.0, 1.0).alpha_stationary

    def test_alpha_must_be_positive(self):
        prob, Xbar = hankel3_setup()
        with pytest.raises(InputError):
            certify_alpha(prob, Xbar, np.zeros(4), 0.0)

    def test_agrees_with_F_below_threshold(self):
        for seed in range(10):
            prob, X0, W = stationary_quadratic(5, 4, 2, 2, seed=40 + seed)
            P = svd_point(X0)
            y, _, _ = estimate_multipliers(prob, P)
            gradL = lagrangian_grad(prob, X0, y)
            beta = beta_threshold(P, 2, gradL)
            cert_f = certify_F(prob, X0)
            alpha = 0.5 * beta if np.isfinite(beta) else 1.0
            cert_a = certify_alpha(prob, X0, y, alpha)
            assert cert_a.alpha_stationary == cert_f.f_stationary

    def test_discrepancy_above_threshold(self):
        prob, X0, W = stationary_quadratic(5, 4, 2, 2, seed=77)
        P = svd_point(X0)
        y, _, _ = estimate_multipliers(prob, P)
        beta = beta_threshold(P, 2, lagrangian_grad(prob, X0, y))
        assert np.isfinite(beta) and beta > 0
        assert certify_F(prob, X0).f_stationary
        assert not certify_alpha(prob, X0, y, 2.0 * beta).alpha_stationary


class TestSecondOrder:
    def test_hankel3_sonc_and_sosc(self):
        prob, Xbar = hankel3_setup()
        y = np.zeros(4)
        sonc, report = second_order_necessary(prob, Xbar, y)
        assert sonc == "holds"
        assert all(rec["ok"] for rec in report)
        sosc, _ = second_order_sufficient(prob, Xbar, y)
        assert sosc == "holds"

    def test_indefinite_quadratic_fails_sonc(self):
        X0 = random_rank_r(3, 3, 1, seed=50)
        S = affine_through(X0, 1, 51)
        # f(X) = -1/2 ||X||^2 + <X0, X>: gradient -X + X0 vanishes at X0,
        # Hessian is -I, so the point is stationary but max-like
        prob = quadratic_problem(-np.eye(9), X0, S, 2)
        cert_f = certify_F(prob, X0)
        assert cert_f.feasible and cert_f.f_stationary
        y = np.asarray(cert_f.multipliers)
        sonc, report = second_order_necessary(prob, X0, y)
        assert sonc == "fails"
        assert any(rec["lambda_min"] < 0 for rec in report)

    def test_sosc_implies_sonc(self):
        for seed in range(5):
            prob, X0, _ = stationary_quadratic(4, 4, 2, 1, seed=60 + seed)
            cert = classify(prob, X0)
            assert not (cert.sosc == "holds" and cert.sonc == "fails")

    def test_no_hessian_not_applicable(self):
        from rankcertify.problems import Objective, Problem

        X0 = random_rank_r(3, 3, 1, seed=70)
        S = affine_through(X0, 1, 71)
        obj = Objective(value=lambda X: 0.0, gradient=lambda X: np.zeros_like(np.asarray(X)))
        prob = Problem(obj, S, 2)
        assert second_order_necessary(prob, X0, np.zeros(1))[0] == "not_applicable"
        assert second_order_sufficient(prob, X0, np.zeros(1))[0] == "not_applicable"


class TestClassify:
    def test_hankel3_full_pipeline(self):
        prob, Xbar = hankel3_setup()
        cert = classify(prob, Xbar)
        assert cert.f_stationary and cert.alpha_stationary
        assert cert.beta == pytest.approx(1.0, abs=1e-10)
        assert cert.alpha == pytest.approx(0.5)
        assert cert.qualification is not None
        assert cert.sonc == "holds" and cert.sosc == "holds"

    def test_infeasible_short_circuits(self):
        prob, _ = hankel3_setup()
        cert = classify(prob, np.eye(3))
        assert not cert.feasible
        assert cert.sonc == "not_applicable"

    def test_explicit_alpha_respected(self):
        prob, Xbar = hankel3_setup()
        cert = classify(prob, Xbar, alpha=2.0)
        assert cert.alpha == 2.0
        assert cert.f_stationary and not cert.alpha_stationary

    def test_unqualified_note_when_R_blocks_dependent(self):
        prob, Xbar = hankel3_setup()
        cert = classify(prob, Xbar)
        assert any("unqualified" in n for n in cert.notes)


class TestCertificateSerialization:
    def test_round_trip_json(self):
        prob, Xbar = hankel3_setup()
        cert = classify(prob, Xbar)
        d = json.loads(cert.to_json())
        assert d["f_stationary"] is True
        assert d["beta"] == pytest.approx(1.0)

    def test_infinity_encoding(self):
        cert = Certificate()
        d = cert.to_dict()
        assert d["stationary_residual"] == "inf"
        json.dumps(d)

    def test_text_report_mentions_key_fields(self):
        prob, Xbar = hankel3_setup()
        text = classify(prob, Xbar).to_text()
        assert "f_stationary" in text and "qualification" in text
