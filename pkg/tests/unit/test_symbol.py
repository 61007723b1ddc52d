"""Tests for the operator constant, the Fourier symbol and FFT application."""

import logging
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from tempered_galerkin.errors import ParameterError
from tempered_galerkin.models.operator import OperatorParams
from tempered_galerkin.problems import cubic_solution, example1_rhs
from tempered_galerkin.symbol import (
    SMALL_RATIO,
    SampledFunction,
    apply_operator_fourier,
    apply_operator_fourier_pointwise,
    c_beta,
    c_beta_sine_form,
    check_support,
    fourier_of_cubic,
    kernel_symbol,
    symbol_g,
)

BETAS = [0.3, 0.5, 0.8, 1.0, 1.2, 1.5, 1.8]
PROPERTY_BETAS = [round(0.1 * k, 1) for k in range(1, 20)]


def params(beta: float, lam: float = 0.0) -> OperatorParams:
    return OperatorParams(beta=beta, lam=lam)


def stable_symbol(beta: float, lam: float, xi: np.ndarray) -> np.ndarray:
    """G through expm1/log1p, free of cancellation at small xi / lambda."""
    t = np.abs(xi) / lam
    if beta == 1.0:
        return (2.0 / math.pi) * lam * (t * np.arctan(t) - 0.5 * np.log1p(t**2))
    growth = np.expm1(0.5 * beta * np.log1p(t**2))
    angle = beta * np.arctan(t)
    real_part_minus_one = growth * np.cos(angle) - 2.0 * np.sin(0.5 * angle) ** 2
    sign = -1.0 if beta > 1.0 else 1.0
    return sign * lam**beta * real_part_minus_one


class TestConstant:
    """Tests for c_beta."""

    @pytest.mark.parametrize("beta", BETAS)
    def test_untempered_constant_matches_sine_form(self, beta: float) -> None:
        assert c_beta(params(beta)) == pytest.approx(c_beta_sine_form(beta), rel=1e-12)

    def test_beta_one_is_one_over_pi(self) -> None:
        assert c_beta(params(1.0)) == pytest.approx(1.0 / math.pi, rel=1e-14)
        assert c_beta(params(1.0, 3.0)) == pytest.approx(1.0 / math.pi, rel=1e-14)

    @pytest.mark.parametrize("beta", [0.5, 1.5])
    def test_tempered_constant_uses_gamma_of_minus_beta(self, beta: float) -> None:
        expected = 1.0 / (2.0 * abs(math.gamma(-beta)))
        assert c_beta(params(beta, 2.0)) == pytest.approx(expected, rel=1e-12)

    def test_unvalidated_parameters_are_rejected(self) -> None:
        bad = OperatorParams.model_construct(beta=2.5, lam=0.0)
        with pytest.raises(ParameterError):
            c_beta(bad)


class TestSymbol:
    """Tests for symbol_g and kernel_symbol."""

    def test_fractional_laplacian_symbol(self) -> None:
        xi = np.array([-3.0, 0.0, 0.5, 2.0])
        assert_allclose(symbol_g(params(0.7), xi), np.abs(xi) ** 0.7)

    @pytest.mark.parametrize("beta", BETAS)
    @pytest.mark.parametrize("lam", [0.5, 1.0, 3.0, 10.0])
    def test_symbol_is_nonnegative_even_and_zero_at_origin(self, beta: float, lam: float) -> None:
        xi = np.linspace(0.0, 200.0, 2001)
        values = symbol_g(params(beta, lam), xi)
        assert np.all(values >= 0.0)
        assert values[0] == 0.0
        assert_allclose(symbol_g(params(beta, lam), -xi), values)

    @pytest.mark.parametrize("beta", PROPERTY_BETAS)
    @pytest.mark.parametrize("lam", [0.01, 1.0, 100.0])
    def test_symbol_on_the_wide_frequency_grid(self, beta: float, lam: float) -> None:
        xi = np.logspace(-6.0, 6.0, 241)
        values = symbol_g(params(beta, lam), xi)
        assert np.all(np.isfinite(values))
        assert np.all(values > 0.0)
        assert np.all(np.diff(values) > 0.0)
        assert np.array_equal(symbol_g(params(beta, lam), -xi), values)
        assert_allclose(values, stable_symbol(beta, lam, xi), rtol=5e-6)
        growth = np.max(values / (1.0 + xi**beta))
        assert growth <= 3.0 * (1.0 + lam) ** beta

    @pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
    def test_small_ratio_branch_is_continuous(self, beta: float) -> None:
        lam = 2.0
        xi = lam * SMALL_RATIO * np.array([1.0 - 1e-6, 1.0 + 1e-6])
        below, above = symbol_g(params(beta, lam), xi)
        assert below == pytest.approx(above, rel=1e-5)

    def test_kernel_symbol_is_continuous_at_beta_one(self) -> None:
        xi = np.linspace(0.1, 50.0, 200)
        at_one = kernel_symbol(params(1.0, 3.0), xi)
        for beta in (1.0 - 1e-6, 1.0 + 1e-6):
            assert_allclose(kernel_symbol(params(beta, 3.0), xi), at_one, rtol=1e-4)

    @pytest.mark.parametrize("beta", [0.5, 1.5])
    def test_kernel_symbol_is_continuous_as_lambda_vanishes(self, beta: float) -> None:
        xi = np.linspace(1.0, 50.0, 100)
        assert_allclose(
            kernel_symbol(params(beta, 1e-10), xi), kernel_symbol(params(beta, 0.0), xi), rtol=1e-4
        )

    @pytest.mark.parametrize("lam", [0.0, 3.0])
    def test_symbol_tends_to_laplacian(self, lam: float) -> None:
        xi = np.linspace(0.1, 10.0, 50)
        assert_allclose(symbol_g(params(2.0 - 1e-6, lam), xi), xi**2, rtol=1e-4)


class TestFourierApplication:
    """Tests for the FFT and pointwise Fourier-side operator application."""

    def test_fft_application_matches_pointwise_quadrature(self) -> None:
        p = params(0.5, 3.0)
        width = 50.0

        def bump(x: np.ndarray) -> np.ndarray:
            return np.exp(-width * (x - 0.5) ** 2)

        def bump_transform(xi: np.ndarray) -> np.ndarray:
            return np.sqrt(np.pi / width) * np.exp(-(xi**2) / (4 * width) - 0.5j * xi)

        sampled = SampledFunction.from_callable(bump, 2**12)
        result = apply_operator_fourier(p, sampled)
        window = (sampled.grid > 0.2) & (sampled.grid < 0.8)
        reference = apply_operator_fourier_pointwise(
            p, bump_transform, sampled.grid[window], xi_max=150.0
        )
        scale = np.max(np.abs(reference))
        assert_allclose(result.values[window], reference, atol=1e-6 * scale)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
    def test_fft_application_reproduces_closed_form_source(self, beta: float) -> None:
        p = params(beta)
        sampled = SampledFunction.from_callable(cubic_solution(), 2**14)
        result = apply_operator_fourier(p, sampled)
        window = (sampled.grid >= 0.25) & (sampled.grid <= 0.75)
        reference = example1_rhs(p, sampled.grid[window])
        scale = np.max(np.abs(reference))
        assert_allclose(result.values[window], reference, atol=1e-3 * scale)

    def test_fft_application_at_the_midpoint_for_beta_one(self) -> None:
        sampled = SampledFunction.from_callable(cubic_solution(), 2**14)
        result = apply_operator_fourier(params(1.0), sampled)
        mid = int(np.argmin(np.abs(sampled.grid - 0.5)))
        assert sampled.grid[mid] == 0.5
        assert result.values[mid] == pytest.approx(1.0 / math.pi, abs=1e-3)

    def test_pad_factor_must_be_positive(self) -> None:
        sampled = SampledFunction.from_callable(lambda x: np.exp(-50 * (x - 0.5) ** 2), 64)
        with pytest.raises(ParameterError):
            apply_operator_fourier(params(0.5), sampled, pad_factor=0)

    def test_support_violation_is_reported(self, caplog: pytest.LogCaptureFixture) -> None:
        with caplog.at_level(logging.WARNING):
            assert not check_support(np.ones(16), "edge check")
        assert "edge check" in caplog.text
        assert check_support(np.array([0.0, 1.0, 0.0]), "edge check")

    @pytest.mark.parametrize("xi", [0.0, 1e-4, 0.5, 3.0, 40.0])
    def test_fourier_of_cubic_matches_quadrature(self, xi: float) -> None:
        coeffs = [1.0, 2.0, -1.0, 0.5]
        poly = np.polynomial.Polynomial(coeffs)
        re, _ = quad(lambda x: poly(x) * math.cos(xi * x), 0.0, 1.0, limit=200)
        im, _ = quad(lambda x: -poly(x) * math.sin(xi * x), 0.0, 1.0, limit=200)
        value = fourier_of_cubic(coeffs, np.array([xi]))[0]
        assert value.real == pytest.approx(re, abs=1e-12)
        assert value.imag == pytest.approx(im, abs=1e-12)
