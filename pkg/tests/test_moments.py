import itertools
import math

import numpy as np
import pytest
from scipy.integrate import quad

from curvmean import moments as mo
from curvmean.curvature import CurvatureOracle
from curvmean.exceptions import (
    DegenerateHessianError,
    DivergenceError,
    InvalidInputError,
)
from curvmean.series import fit_loglog_slope, hessian_weight
from curvmean.spaces import Sphere

from conftest import pole_of


def outer_power(p, k):
    out = np.asarray(p, dtype=float)
    if k == 0:
        return np.array(1.0)
    for _ in range(k - 1):
        out = np.multiply.outer(out, p)
    return out


def weighted_moments(points, weights, max_order=4):
    return {k: sum(w * outer_power(p, k) for w, p in zip(weights, points))
            if k else np.array(1.0) for k in range(max_order + 1)}


def random_curvature_like(rng, d, with_grad=True):
    """Random tensors with the skew symmetry in the two argument slots that
    every curvature operator carries."""
    rt = rng.normal(size=(d,) * 4)
    rt = rt - rt.transpose(0, 1, 3, 2)
    gt = None
    if with_grad:
        gt = rng.normal(size=(d,) * 5)
        gt = gt - gt.transpose(0, 1, 3, 2, 4)
    return CurvatureOracle.from_components(rt, gt)


class TestEmpiricalMoment:
    def test_symmetric_pair(self):
        a = 0.7
        logs = np.array([[a, 0.0], [-a, 0.0]])
        assert np.allclose(mo.empirical_moment(logs, 1), 0.0)
        m2 = mo.empirical_moment(logs, 2)
        assert np.allclose(m2, [[a**2, 0.0], [0.0, 0.0]])

    def test_single_log_power(self, rng):
        u = rng.normal(size=3)
        for k in range(5):
            assert np.allclose(mo.empirical_moment(u[None], k),
                               outer_power(u, k))

    def test_two_basis_vectors(self):
        logs = np.eye(2)
        assert np.allclose(mo.empirical_moment(logs, 2), 0.5 * np.eye(2))

    def test_order_zero_is_one(self, rng):
        logs = rng.normal(size=(5, 2))
        assert mo.empirical_moment(logs, 0) == 1.0

    def test_exact_permutation_invariance(self, rng):
        logs = rng.normal(size=(6, 3))
        for k in (2, 3, 4):
            t = mo.empirical_moment(logs, k)
            for perm in itertools.permutations(range(k)):
                assert np.array_equal(t, np.transpose(t, perm))

    def test_rejects_bad_input(self):
        with pytest.raises(InvalidInputError):
            mo.empirical_moment(np.zeros((0, 2)), 1)
        with pytest.raises(InvalidInputError):
            mo.empirical_moment(np.ones((2, 2)), 5)
        with pytest.raises(InvalidInputError):
            mo.empirical_moment(np.array([[np.inf, 0.0]]), 1)

    def test_check_moment(self):
        mo.check_moment(np.eye(2), 2)
        with pytest.raises(InvalidInputError):
            mo.check_moment(np.array([[0.0, 1.0], [0.0, 0.0]]), 2)
        with pytest.raises(InvalidInputError):
            mo.check_moment(np.array(2.0), 0)


class TestRecenteredMeanSeries:
    def test_flat_at_barycenter(self, rng):
        oracle = CurvatureOracle.flat(3)
        logs = rng.normal(size=(5, 3))
        m1, m2, m3 = (mo.empirical_moment(logs, k) for k in (1, 2, 3))
        out = mo.recentered_tangent_mean_series(oracle, m1, m1, m2, m3)
        assert np.allclose(out, 0.0, atol=1e-16)

    def test_at_development_point(self, rng):
        oracle = random_curvature_like(rng, 3)
        logs = rng.normal(size=(5, 3))
        m1, m2, m3 = (mo.empirical_moment(logs, k) for k in (1, 2, 3))
        out = mo.recentered_tangent_mean_series(oracle, np.zeros(3), m1, m2, m3)
        assert np.allclose(out, m1)

    def test_slope_against_exact_transport(self, curved_space):
        space = curved_space
        pole = pole_of(space)
        basis = space.tangent_basis(pole)
        oracle = CurvatureOracle.space_form(space.dim, space.kappa)
        cloud = np.array([[0.9, 0.1, -0.4], [-0.5, 0.6, 0.2],
                          [0.1, -0.8, 0.5]])
        vc = np.array([0.2, -0.5, 0.3])
        scales = np.array([0.05, 0.1, 0.2])
        residuals = []
        for eps in scales:
            logs = eps * cloud
            points = space.exp(pole, logs @ basis)
            m1, m2, m3 = (mo.empirical_moment(logs, k) for k in (1, 2, 3))
            xv = space.exp(pole,
                           space.tangent_from_coords(pole, eps * vc, basis))
            pulled = space.transport(xv, space.log(xv, pole),
                                     space.log(xv, points)).mean(axis=0)
            exact = space.tangent_coords(pole, pulled, basis)
            pred = mo.recentered_tangent_mean_series(oracle, eps * vc,
                                                     m1, m2, m3)
            residuals.append(np.linalg.norm(pred - exact))
        slope, _ = fit_loglog_slope(scales, residuals)
        assert 4.6 <= slope <= 5.4

    def test_frame_mismatch(self, rng):
        oracle = CurvatureOracle.flat(3)
        with pytest.raises(InvalidInputError):
            mo.recentered_tangent_mean_series(
                oracle, np.zeros(2), np.zeros(3), np.eye(3),
                np.zeros((3, 3, 3)))


class TestLogMeanSeries:
    def test_centered_distribution(self, rng):
        oracle = random_curvature_like(rng, 3)
        m2 = np.eye(3) * 0.1
        out = mo.log_mean_series(oracle, np.zeros(3), m2, np.zeros((3,) * 3))
        assert np.allclose(out, 0.0, atol=1e-16)

    def test_flat_returns_first_moment(self, rng):
        oracle = CurvatureOracle.flat(2)
        logs = rng.normal(size=(4, 2))
        m1, m2, m3 = (mo.empirical_moment(logs, k) for k in (1, 2, 3))
        assert np.allclose(mo.log_mean_series(oracle, m1, m2, m3), m1)

    def test_slope_against_estimator(self, curved_space):
        from curvmean.estimator import frechet_mean
        space = curved_space
        pole = pole_of(space)
        basis = space.tangent_basis(pole)
        oracle = CurvatureOracle.space_form(space.dim, space.kappa)
        cloud = np.array([[0.9, 0.1, -0.4], [-0.5, 0.6, 0.2],
                          [0.1, -0.8, 0.5], [0.3, 0.2, 0.9]])
        scales = np.array([0.05, 0.1, 0.2])
        residuals = []
        for eps in scales:
            logs = eps * cloud
            points = space.exp(pole, logs @ basis)
            m1, m2, m3 = (mo.empirical_moment(logs, k) for k in (1, 2, 3))
            report = frechet_mean(space, points, init=pole, grad_tol=1e-14,
                                  check_concentration=False)
            exact = space.tangent_coords(pole, space.log(pole, report.mean),
                                         basis)
            residuals.append(
                np.linalg.norm(mo.log_mean_series(oracle, m1, m2, m3) - exact))
        slope, _ = fit_loglog_slope(scales, residuals)
        assert 4.6 <= slope <= 5.4

    def test_skew_cancellation(self, rng):
        # the triple self-contraction of any skew oracle vanishes
        oracle = random_curvature_like(rng, 3, with_grad=False)
        m1 = rng.normal(size=3)
        out = oracle.r(m1, m1, m1)
        assert np.all(np.abs(out) <= 1e-14)


class TestProductMomentExpectation:
    def test_single_sample_pair(self, rng):
        pts = rng.normal(size=(3, 2))
        wts = np.array([0.3, 0.3, 0.4])
        ms = weighted_moments(pts, wts)
        for p, q in [(1, 1), (1, 2), (2, 2), (1, 3)]:
            out = mo.product_moment_expectation((p, q), 1, ms)
            assert np.allclose(out, ms[p + q], atol=1e-15)

    def test_sign_flip_example(self):
        pts = [np.array([1.0]), np.array([-1.0])]
        ms = weighted_moments(pts, [0.5, 0.5])
        out = mo.product_moment_expectation((1, 2), 2, ms)
        assert np.allclose(out, 0.0, atol=1e-16)
        out = mo.product_moment_expectation((2, 2), 2, ms)
        assert np.allclose(out, 1.0, atol=1e-16)

    @pytest.mark.parametrize("d", [1, 2])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_enumeration_oracle(self, d, n, rng):
        support = rng.normal(size=(3, d))
        weights = np.array([0.2, 0.5, 0.3])
        ms = weighted_moments(support, weights)
        orders_list = [(p, q) for p in (1, 2, 3) for q in (1, 2, 3)
                       if p + q <= 4]
        orders_list += [o for o in itertools.product((1, 2), repeat=3)
                        if sum(o) <= 4]
        for orders in orders_list:
            pred = mo.product_moment_expectation(orders, n, ms)
            acc = np.zeros_like(pred)
            for tup in itertools.product(range(3), repeat=n):
                w = math.prod(weights[i] for i in tup)
                emp = {k: np.mean([outer_power(support[i], k) for i in tup],
                                  axis=0) for k in set(orders)}
                term = emp[orders[0]]
                for k in orders[1:]:
                    term = np.multiply.outer(term, emp[k])
                acc = acc + w * term
            assert np.allclose(pred, acc, atol=1e-12), (orders, n, d)

    def test_rejects_bad_orders(self):
        ms = {1: np.zeros(2), 2: np.eye(2)}
        with pytest.raises(InvalidInputError):
            mo.product_moment_expectation((1,), 2, ms)
        with pytest.raises(InvalidInputError):
            mo.product_moment_expectation((2, 3), 2, ms)
        with pytest.raises(InvalidInputError):
            mo.product_moment_expectation((1, 1), 0, ms)


class TestExpectedLogMeanSeries:
    def test_symmetric_space_centered(self, rng):
        oracle = CurvatureOracle.space_form(3, 1.0)
        out = mo.expected_log_mean_series(oracle, np.zeros(3),
                                          0.2 * np.eye(3),
                                          np.zeros((3, 3, 3)), n=5)
        assert np.allclose(out, 0.0, atol=1e-16)

    def test_single_sample_returns_first_moment(self, rng):
        # a 1-sample's mean is the sample itself: every splitting
        # coefficient vanishes and only the raw first moment survives
        oracle = random_curvature_like(rng, 2)
        pts = rng.normal(size=(3, 2)) * 0.5
        wts = np.array([0.2, 0.5, 0.3])
        ms = weighted_moments(pts, wts)
        out = mo.expected_log_mean_series(oracle, ms[1], ms[2], ms[3], n=1)
        assert np.allclose(out, ms[1], atol=1e-15)
        # and that equals enumerating the one-sample mean locations
        acc = sum(w * mo.log_mean_series(
            oracle, *[outer_power(p, k) for k in (1, 2, 3)])
            for w, p in zip(wts, pts))
        assert np.allclose(out, acc, atol=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_enumeration_oracle(self, n, rng):
        oracle = random_curvature_like(rng, 2)
        pts = rng.normal(size=(3, 2)) * 0.5
        wts = np.array([0.25, 0.45, 0.3])
        ms = weighted_moments(pts, wts)
        pred = mo.expected_log_mean_series(oracle, ms[1], ms[2], ms[3], n)
        acc = np.zeros(2)
        for tup in itertools.product(range(3), repeat=n):
            w = math.prod(wts[i] for i in tup)
            logs = pts[list(tup)]
            m1, m2, m3 = (mo.empirical_moment(logs, k) for k in (1, 2, 3))
            acc = acc + w * mo.log_mean_series(oracle, m1, m2, m3)
        assert np.allclose(pred, acc, atol=1e-14)

    def test_reduces_to_bias_at_mean(self, rng):
        oracle = random_curvature_like(rng, 3)
        m2 = np.eye(3) * 0.2
        m3 = np.zeros((3, 3, 3))
        for n in (2, 7):
            field = mo.expected_log_mean_series(oracle, np.zeros(3), m2, m3, n)
            bias = mo.empirical_mean_bias(oracle, m2, n)
            assert np.allclose(field, bias, atol=1e-16)


class TestBias:
    def test_space_forms_unbiased(self):
        oracle = CurvatureOracle.space_form(3, 1.0)
        assert np.allclose(
            mo.empirical_mean_bias(oracle, 0.3 * np.eye(3), 5), 0.0)

    def test_single_sample_unbiased(self, rng):
        oracle = random_curvature_like(rng, 2)
        m2 = np.eye(2) * 0.4
        assert np.allclose(mo.empirical_mean_bias(oracle, m2, 1), 0.0)

    def test_quadruple_loop_oracle(self, rng):
        d = 2
        oracle = random_curvature_like(rng, d)
        gt = oracle.grad_r_components()
        a_mat = rng.normal(size=(d, d))
        m2 = a_mat @ a_mat.T
        m2 = (m2 + m2.T) / 2
        n = 7
        got = mo.empirical_mean_bias(oracle, m2, n)
        expected = np.zeros(d)
        coeff = (1 - 1 / n) / (6 * n)
        for a in range(d):
            total = 0.0
            for b in range(d):
                for c in range(d):
                    for e in range(d):
                        for f in range(d):
                            total += gt[a, c, e, f, b] * m2[c, f] * m2[b, e]
            expected[a] = coeff * total
        assert np.max(np.abs(got - expected)) <= 1e-14


class TestCovariance:
    def test_single_sample_unmodulated(self, rng):
        oracle = CurvatureOracle.space_form(3, 1.0)
        a_mat = rng.normal(size=(3, 3))
        m2 = a_mat @ a_mat.T
        m2 = (m2 + m2.T) / 2
        assert np.allclose(mo.empirical_mean_covariance(oracle, m2, 1), m2,
                           atol=1e-15)

    def test_flat_law_of_large_numbers(self, rng):
        oracle = CurvatureOracle.flat(2)
        m2 = np.array([[0.5, 0.1], [0.1, 0.3]])
        for n in (2, 10):
            assert np.allclose(mo.empirical_mean_covariance(oracle, m2, n),
                               m2 / n, atol=1e-16)

    def test_isotropic_closed_form(self):
        for kappa in (-1.0, 0.0, 1.0):
            for sigma2 in (0.01, 0.09, 0.25):
                for d in (2, 3, 4):
                    oracle = CurvatureOracle.space_form(d, kappa)
                    m2 = sigma2 / d * np.eye(d)
                    for n in range(1, 21):
                        cov = mo.empirical_mean_covariance(oracle, m2, n)
                        alpha = mo.modulation_nonasymptotic(kappa, sigma2, d, n)
                        ref = sigma2 * alpha / (n * d) * np.eye(d)
                        assert np.max(np.abs(cov - ref)) <= 1e-12

    def test_symmetric_positive_definite_small_curvature(self, rng):
        oracle = CurvatureOracle.space_form(3, 1.0)
        sigma2 = 0.09
        a_mat = rng.normal(size=(3, 3)) * np.sqrt(sigma2 / 3)
        m2 = a_mat @ a_mat.T
        m2 = (m2 + m2.T) / 2 + 1e-3 * np.eye(3)
        for n in (2, 5, 50):
            cov = mo.empirical_mean_covariance(oracle, m2, n)
            assert np.array_equal(cov, cov.T)
            assert np.all(np.linalg.eigvalsh(cov) > 0)

    def test_second_moment_field_enumeration(self, rng):
        oracle = random_curvature_like(rng, 2)
        rt = oracle.r_components()
        pts = rng.normal(size=(3, 2)) * 0.5
        wts = np.array([0.2, 0.5, 0.3])
        ms = weighted_moments(pts, wts)
        for n in (1, 2, 3):
            pred = mo.empirical_mean_second_moment_field(
                oracle, ms[1], ms[2], ms[3], ms[4], n)
            acc = np.zeros((2, 2))
            for tup in itertools.product(range(3), repeat=n):
                w = math.prod(wts[i] for i in tup)
                logs = pts[list(tup)]
                m1 = mo.empirical_moment(logs, 1)
                m2 = mo.empirical_moment(logs, 2)
                corr = np.einsum("abcd,bc,d->a", rt, m2, m1)
                sq = (np.outer(m1, m1)
                      - (np.outer(corr, m1) + np.outer(m1, corr)) / 3.0)
                acc = acc + w * sq
            assert np.allclose(pred, acc, atol=1e-14)

    def test_second_moment_field_reduces_at_mean(self, rng):
        oracle = random_curvature_like(rng, 2)
        pts = np.array([[0.4, 0.1], [-0.4, -0.1], [0.2, -0.3], [-0.2, 0.3]])
        ms = weighted_moments(pts, np.full(4, 0.25))
        assert np.allclose(ms[1], 0.0)
        for n in (2, 5):
            field = mo.empirical_mean_second_moment_field(
                oracle, ms[1], ms[2], ms[3], ms[4], n)
            cov = mo.empirical_mean_covariance(oracle, ms[2], n)
            assert np.allclose(field, cov, atol=1e-15)


class TestExpectedHessian:
    def test_flat(self):
        oracle = CurvatureOracle.flat(3)
        out = mo.expected_sqdist_hessian(oracle, 0.3 * np.eye(3),
                                         np.zeros((3, 3, 3)))
        assert np.allclose(out, 2 * np.eye(3))

    def test_isotropic_matches_quadrature(self):
        # exact expected weight for a uniform-radius isotropic distribution,
        # by quadrature; the series must approach it at fourth order
        d, kappa = 3, 1.0
        oracle = CurvatureOracle.space_form(d, kappa)
        spreads = np.array([0.05, 0.1, 0.2, 0.4])
        residuals = []
        for s in spreads:
            e_r2 = s**2 / 3.0
            e_h = quad(lambda r: hessian_weight(kappa * r**2), 0.0, s,
                       epsabs=1e-13)[0] / s
            gamma_exact = 1.0 / d + (1.0 - 1.0 / d) * e_h
            series = mo.expected_sqdist_hessian(
                oracle, e_r2 / d * np.eye(d), np.zeros((d, d, d)))
            residuals.append(np.max(np.abs(series - 2 * gamma_exact * np.eye(d))))
        slope, _ = fit_loglog_slope(spreads, residuals)
        assert 3.6 <= slope <= 4.4

    def test_index_loop_oracle(self, rng):
        d = 2
        oracle = random_curvature_like(rng, d)
        rt = oracle.r_components()
        gt = oracle.grad_r_components()
        a_mat = rng.normal(size=(d, d))
        m2 = a_mat @ a_mat.T
        m2 = (m2 + m2.T) / 2
        logs = rng.normal(size=(5, d))
        m3 = mo.empirical_moment(logs, 3)
        got = mo.expected_sqdist_hessian(oracle, m2, m3)
        expected = 2.0 * np.eye(d)
        for a in range(d):
            for b in range(d):
                total = 0.0
                for dd in range(d):
                    for c in range(d):
                        total += rt[a, dd, c, b] * m2[dd, c] / 3.0
                        for e in range(d):
                            total += gt[a, dd, c, b, e] * m3[dd, c, e] / 12.0
                expected[a, b] += 2.0 * total
        assert np.max(np.abs(got - expected)) <= 1e-14


class TestCltCovariance:
    def test_flat_identity(self, rng):
        m2 = np.array([[0.4, 0.1], [0.1, 0.2]])
        assert np.allclose(mo.clt_mean_covariance(m2, 2 * np.eye(2)), m2,
                           atol=1e-15)

    def test_scalar_hessian(self):
        m2 = 0.3 * np.eye(3)
        gamma = 0.9
        out = mo.clt_mean_covariance(m2, 2 * gamma * np.eye(3))
        assert np.allclose(out, m2 / gamma**2, atol=1e-15)

    def test_singular_hessian_rejected(self):
        m2 = np.eye(2)
        with pytest.raises(DegenerateHessianError):
            mo.clt_mean_covariance(m2, np.array([[1.0, 0.0], [0.0, 1e-15]]))

    def test_agreement_with_small_sample_limit(self):
        # the asymptotic covariance with the exact scalar Hessian matches
        # the large-n limit of the small-sample law at high order; in space
        # forms every term is even in the spread, so the gap decays two
        # orders beyond the formulas' own truncation
        d = 3
        oracle = CurvatureOracle.space_form(d, 1.0)
        rt = oracle.r_components()
        sigmas = np.array([0.05, 0.1, 0.2])
        diffs = []
        for s in sigmas:
            m2 = s**2 / d * np.eye(d)
            gamma = 1.0 / d + (1.0 - 1.0 / d) * hessian_weight(s**2)
            bp = mo.clt_mean_covariance(m2, 2 * gamma * np.eye(d))
            half = np.einsum("acde,cd,be->ab", rt, m2, m2)
            limit = m2 - (half + half.T) / 3.0
            diffs.append(np.linalg.norm(bp - limit))
        slope, _ = fit_loglog_slope(sigmas, diffs)
        assert 5.6 <= slope <= 6.4


class TestModulation:
    def test_no_modulation_cases(self):
        assert mo.modulation_nonasymptotic(1.0, 0.25, 2, 1) == 1.0
        assert mo.modulation_nonasymptotic(1.0, 0.25, 1, 10) == 1.0
        assert mo.modulation_nonasymptotic(0.0, 0.25, 3, 10) == 1.0

    def test_direct_value(self):
        got = mo.modulation_nonasymptotic(1.0, 0.25, 2, 10)
        assert abs(got - 1.075) <= 1e-15

    def test_asymptotic_values(self):
        assert mo.modulation_asymptotic(1.0, 5) == 1.0
        h_bar = 0.5 / np.tan(0.5)
        got = mo.modulation_asymptotic(h_bar, 2)
        gamma = 0.5 + 0.5 * h_bar
        assert abs(got - gamma**-2) <= 1e-15
        assert abs(got - 1.0904) <= 5e-4

    def test_asymptotic_divergence(self):
        # at the concentration boundary the effective weight crosses zero
        d = 200
        h_bar = -1.0 / (d - 1.0)
        with pytest.raises(DivergenceError):
            mo.modulation_asymptotic(h_bar, d)
        big = mo.modulation_asymptotic(-1.0 / (d - 1.0) + 1e-6, d)
        assert big > 1e9

    def test_limit_values(self):
        assert mo.modulation_limit(0.0) == 1.0
        assert abs(mo.modulation_limit(1.0) - np.tan(1.0) ** 2) <= 1e-14
        assert abs(mo.modulation_limit(-1.0) - np.tanh(1.0) ** 2) <= 1e-14
        assert mo.modulation_limit(-1.0) < 1.0
        with pytest.raises(DivergenceError):
            mo.modulation_limit(np.pi**2 / 4)

    def test_limit_taylor_consistency(self):
        ts = np.array([0.01, 0.02, 0.04, 0.08])
        residuals = [abs(mo.modulation_limit(t) - (1.0 + 2.0 * t / 3.0))
                     for t in ts]
        slope, _ = fit_loglog_slope(ts, residuals)
        assert 1.6 <= slope <= 2.4


class TestEmpiricalMeanMoments:
    def test_bundle(self, rng):
        oracle = random_curvature_like(rng, 2)
        m2 = np.eye(2) * 0.3
        bundle = mo.empirical_mean_moments(oracle, m2, 4)
        assert bundle.n == 4
        assert np.allclose(bundle.bias, mo.empirical_mean_bias(oracle, m2, 4))
        assert np.allclose(bundle.covariance,
                           mo.empirical_mean_covariance(oracle, m2, 4))

    def test_invariants(self):
        with pytest.raises(InvalidInputError):
            mo.EmpiricalMeanMoments(np.zeros(2),
                                    np.array([[1.0, 0.5], [0.0, 1.0]]), 2)
        with pytest.raises(InvalidInputError):
            mo.EmpiricalMeanMoments(np.zeros(2), np.eye(2), 0)
