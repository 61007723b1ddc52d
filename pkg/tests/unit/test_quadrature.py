"""Tests for quadrature rules, moments, tails and E1."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad
from scipy.special import exp1

from tempered_galerkin.errors import ParameterError
from tempered_galerkin.quadrature import (
    TAIL_SERIES_LIMIT,
    composite_gauss_legendre,
    exp_integral_e1,
    gamma_negative,
    gauss_jacobi,
    graded_breakpoints,
    power_exp_moment,
    regularized_moment,
    tail_integral,
)


class TestRules:
    """Tests for Gauss-Legendre and Gauss-Jacobi rules."""

    @pytest.mark.parametrize(("alpha", "beta"), [(0.0, 0.0), (0.0, -0.5), (1.5, 0.3), (-0.7, 2.0)])
    def test_gauss_jacobi_is_exact_for_polynomials(self, alpha: float, beta: float) -> None:
        nodes, weights = gauss_jacobi(8, alpha, beta)
        for power in range(0, 15):
            expected, _ = quad(lambda x, p=power: x**p, -1.0, 1.0, weight="alg", wvar=(beta, alpha))
            assert np.sum(weights * nodes**power) == pytest.approx(expected, rel=1e-11, abs=1e-13)

    def test_gauss_jacobi_rejects_non_integrable_weight(self) -> None:
        with pytest.raises(ParameterError):
            gauss_jacobi(4, -1.0, 0.0)

    def test_composite_rule_integrates_cubics_on_each_row(self) -> None:
        breakpoints = np.array([[0.0, 0.3, 1.0], [1.0, 1.5, 2.0]])
        nodes, weights = composite_gauss_legendre(breakpoints, 2)
        assert nodes.shape == (2, 4)
        assert_allclose(np.sum(weights * nodes**3, axis=-1), [0.25, (16.0 - 1.0) / 4.0])

    def test_graded_breakpoints(self) -> None:
        geometric = graded_breakpoints(1e-4, 1.0, 4)
        assert_allclose(geometric, [1e-4, 1e-3, 1e-2, 1e-1, 1.0])
        assert_allclose(graded_breakpoints(0.0, 2.0, 4), [0.0, 0.5, 1.0, 1.5, 2.0])


class TestMoments:
    """Tests for power_exp_moment and regularized_moment."""

    @pytest.mark.parametrize("exponent", [-0.8, -0.5, 0.0, 0.7, 2.3])
    @pytest.mark.parametrize(("lam", "h"), [(3.0, 0.7), (0.5, 0.01), (20.0, 1.0)])
    def test_moment_matches_adaptive_quadrature(
        self, exponent: float, lam: float, h: float
    ) -> None:
        expected, _ = quad(
            lambda y: math.exp(-lam * y), 0.0, h, weight="alg", wvar=(exponent, 0.0)
        )
        assert power_exp_moment(lam, h, exponent) == pytest.approx(expected, rel=1e-11)

    def test_untempered_moment_is_a_power(self) -> None:
        h = np.array([0.1, 0.5, 2.0])
        assert_allclose(power_exp_moment(0.0, h, -0.3), h**0.7 / 0.7)

    def test_moment_keeps_shape(self) -> None:
        h = np.full((3, 2), 0.25)
        assert power_exp_moment(1.0, h, 0.5).shape == (3, 2)

    def test_moment_rejects_non_integrable_power(self) -> None:
        with pytest.raises(ParameterError):
            power_exp_moment(1.0, 0.5, -1.0)

    def test_regularized_moment(self) -> None:
        assert regularized_moment(2.0, 0.6, 0.3, 1) == pytest.approx(
            power_exp_moment(2.0, 0.3, 0.4)
        )


class TestTails:
    """Tests for tail_integral, gamma_negative and E1."""

    @pytest.mark.parametrize("x", [1e-6, 0.5, 5.9, 6.1, 30.0, 300.0])
    def test_e1_matches_scipy(self, x: float) -> None:
        assert exp_integral_e1(x) == pytest.approx(exp1(x), rel=1e-12)

    def test_e1_rejects_non_positive_arguments(self) -> None:
        with pytest.raises(ParameterError):
            exp_integral_e1(np.array([1.0, 0.0]))

    @pytest.mark.parametrize("beta", [0.3, 0.5, 1.5, 1.8])
    def test_gamma_negative(self, beta: float) -> None:
        assert gamma_negative(beta) == pytest.approx(math.gamma(-beta), rel=1e-13)

    @pytest.mark.parametrize("beta", [0.3, 1.0, 1.5])
    @pytest.mark.parametrize("a", [0.01, 0.5, 2.0])
    def test_tail_matches_adaptive_quadrature(self, beta: float, a: float) -> None:
        lam = 3.0

        def integrand(y: float) -> float:
            return math.exp(-lam * y) * y ** (-1.0 - beta)

        split = max(1.0, 2.0 * a)
        near, _ = quad(integrand, a, split, limit=200, epsabs=0.0, epsrel=1e-12)
        far, _ = quad(integrand, split, np.inf, limit=200, epsabs=0.0, epsrel=1e-12)
        assert tail_integral(lam, beta, a) == pytest.approx(near + far, rel=1e-9)

    def test_untempered_tail(self) -> None:
        assert tail_integral(0.0, 0.5, 4.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("beta", [0.4, 1.6])
    def test_tail_is_continuous_across_branches(self, beta: float) -> None:
        lam = 3.0
        edge = TAIL_SERIES_LIMIT / lam
        below, above = tail_integral(lam, beta, np.array([edge * (1 - 1e-9), edge * (1 + 1e-9)]))
        assert below == pytest.approx(above, rel=1e-7)

    def test_tail_rejects_non_positive_limits(self) -> None:
        with pytest.raises(ParameterError):
            tail_integral(1.0, 0.5, 0.0)
