"""Tests for error norms, level sweeps and spectra."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import gamma

from tempered_galerkin.analysis import (
    condition_sweep,
    convergence_sweep,
    eigenvalue_dump,
    error_norms,
    h_half_beta_norm,
    l2_norm,
    log2_slope,
    spread,
    successive_errors,
)
from tempered_galerkin.assembly import assemble_first_row
from tempered_galerkin.errors import ProblemSpecError, SizeGuardError
from tempered_galerkin.linsolve import build_diag, condition_number
from tempered_galerkin.models.operator import BasisSpec, OperatorParams
from tempered_galerkin.models.report import ErrorChoice
from tempered_galerkin.problems import DiscreteSolution, get_problem


def bump(x: np.ndarray) -> np.ndarray:
    return np.exp(-50.0 * (x - 0.5) ** 2)


class TestNorms:
    """Tests for l2_norm and h_half_beta_norm."""

    def test_l2_norm_of_the_indicator(self) -> None:
        def indicator(x: np.ndarray) -> np.ndarray:
            return np.where((x > 0.0) & (x < 1.0), 1.0, 0.0)

        assert l2_norm(indicator, 4) == pytest.approx(1.0, rel=1e-12)

    def test_l2_norm_of_the_cubic(self) -> None:
        def cubic(x: np.ndarray) -> np.ndarray:
            return np.where((x > 0.0) & (x < 1.0), x**2 * (1.0 - x), 0.0)

        assert l2_norm(cubic, 3) == pytest.approx(math.sqrt(1.0 / 105.0), rel=1e-12)

    @pytest.mark.parametrize("beta", [0.3, 1.0, 1.7])
    def test_h_norm_of_a_gaussian_bump(self, beta: float) -> None:
        expected = math.sqrt(
            (10.0 * math.sqrt(math.pi) + float(gamma((beta + 1.0) / 2.0)) * 10.0 ** (beta + 1.0))
            / 100.0
        )
        assert h_half_beta_norm(bump, beta, 6) == pytest.approx(expected, rel=1e-6)

    def test_h_norm_dominates_l2(self) -> None:
        assert h_half_beta_norm(bump, 0.8, 6) > l2_norm(bump, 6)

    def test_error_norms_vanish_for_the_exact_discrete_function(self) -> None:
        spec = BasisSpec(r=2, n=4)
        coeffs = np.linspace(0.0, 1.0, spec.dimension)
        approx = DiscreteSolution(spec=spec, coeffs=coeffs)
        l2, hb = error_norms(approx.evaluate, approx, 0.5)
        assert l2 == 0.0
        assert hb == 0.0

    def test_successive_errors_need_consecutive_levels(self) -> None:
        coarse = DiscreteSolution(spec=BasisSpec(r=2, n=4), coeffs=np.zeros(15))
        with pytest.raises(ProblemSpecError):
            successive_errors(coarse, DiscreteSolution(BasisSpec(r=2, n=6), np.zeros(63)), 0.5)
        with pytest.raises(ProblemSpecError):
            successive_errors(coarse, DiscreteSolution(BasisSpec(r=1, n=5), np.zeros(32)), 0.5)

    def test_successive_error_of_a_refined_function_is_zero(self) -> None:
        # piecewise constants on level 4 are reproduced exactly on level 5
        coarse = DiscreteSolution(spec=BasisSpec(r=1, n=4), coeffs=np.ones(16))
        fine = DiscreteSolution(spec=BasisSpec(r=1, n=5), coeffs=np.full(32, math.sqrt(0.5)))
        l2, hb = successive_errors(coarse, fine, 0.5)
        assert l2 == pytest.approx(0.0, abs=1e-13)
        assert hb == pytest.approx(0.0, abs=1e-12)


class TestConvergenceSweep:
    """Tests for convergence_sweep."""

    def test_exact_mode_rates(self) -> None:
        prob = get_problem("example1", OperatorParams(beta=0.5))
        report = convergence_sweep(prob, 2, [5, 6, 7])
        assert report.error_mode == "exact"
        assert [row.n for row in report.rows] == [5, 6, 7]
        assert report.rows[0].rate_h is None
        assert report.rows[0].rate_l2 is None
        last = report.rows[-1]
        assert last.rate_h == pytest.approx(1.75, abs=0.3)
        assert last.rate_l2 is not None and last.rate_l2 > 1.5
        assert all(row.iterations > 0 for row in report.rows)

    def test_successive_mode(self) -> None:
        prob = get_problem("example2", OperatorParams(beta=0.5, lam=1.5))
        report = convergence_sweep(prob, 1, [4, 5], method="dense")
        assert report.error_mode == "successive"
        assert any("consecutive" in note for note in report.notes)
        assert len(report.rows) == 2
        assert report.rows[1].error_l2 < report.rows[0].error_l2
        assert report.rows[1].iterations == 0

    def test_both_modes_side_by_side(self) -> None:
        prob = get_problem("example1", OperatorParams(beta=0.5))
        report = convergence_sweep(prob, 2, [4, 5, 6], method="dense", errors="both")
        exact = convergence_sweep(prob, 2, [4, 5, 6], method="dense")
        assert report.error_mode == "both"
        assert any("consecutive" in note for note in report.notes)
        assert [row.error_h for row in report.rows] == [row.error_h for row in exact.rows]
        assert all(row.error_h_hat is not None for row in report.rows)
        assert all(row.error_l2_hat is not None for row in report.rows)
        assert report.rows[0].rate_h_hat is None
        assert report.rows[2].rate_h_hat is not None
        assert report.rows[2].rate_l2_hat is not None

    def test_forced_successive_mode_with_an_exact_solution(self) -> None:
        prob = get_problem("example1", OperatorParams(beta=0.5))
        report = convergence_sweep(prob, 2, [4, 5], method="dense", errors="successive")
        assert report.error_mode == "successive"
        assert report.rows[0].error_h_hat is None

    @pytest.mark.parametrize("errors", ["exact", "both"])
    def test_exact_mode_needs_an_exact_solution(self, errors: ErrorChoice) -> None:
        prob = get_problem("example2", OperatorParams(beta=0.5, lam=1.5))
        with pytest.raises(ProblemSpecError, match="no exact solution"):
            convergence_sweep(prob, 1, [4], method="dense", errors=errors)

    def test_notes_carry_truncation(self) -> None:
        prob = get_problem("example3_gauss", OperatorParams(beta=1.0))
        report = convergence_sweep(prob, 2, [4])
        assert any("truncated" in note for note in report.notes)

    @pytest.mark.parametrize("levels", [[], [6, 5], [5, 5]])
    def test_levels_are_validated(self, levels: list[int]) -> None:
        prob = get_problem("example1", OperatorParams(beta=0.5))
        with pytest.raises(ProblemSpecError):
            convergence_sweep(prob, 2, levels)


class TestConditionSweep:
    """Tests for condition_sweep, log2_slope and the spectra."""

    def test_plain_condition_grows_like_two_to_beta(self) -> None:
        report = condition_sweep(OperatorParams(beta=1.5, lam=3.0), 2, [5, 6, 7])
        assert report.rows[0].rate is None
        assert report.rows[-1].rate == pytest.approx(1.5, abs=0.4)
        assert report.rows[-1].cond_pcg < report.rows[-1].cond_cg / 5.0
        assert all(row.iterations_pcg <= row.iterations_cg for row in report.rows)
        assert "dense" in report.estimator

    def test_dense_timing(self) -> None:
        report = condition_sweep(OperatorParams(beta=0.5), 1, [4], dense_timing_limit=100)
        assert report.rows[0].time_dense is not None

    def test_log2_slope(self) -> None:
        assert log2_slope([1, 2, 3], [2.0, 4.0, 8.0]) == pytest.approx(1.0)
        with pytest.raises(ProblemSpecError):
            log2_slope([1], [2.0])

    def test_eigenvalue_dump(self) -> None:
        A = assemble_first_row(OperatorParams(beta=0.9, lam=1.5), BasisSpec(r=2, n=5))
        plain = eigenvalue_dump(A)
        assert plain.size == A.size
        assert np.all(np.diff(plain) >= 0.0)
        assert spread(plain) == pytest.approx(condition_number(A)[0], rel=1e-10)
        diag = build_diag(A)
        preconditioned = eigenvalue_dump(A, diag)
        assert spread(preconditioned) == pytest.approx(condition_number(A, diag)[0], rel=1e-10)
        assert_allclose(np.sum(preconditioned), A.size, rtol=1e-9)

    def test_eigenvalue_dump_size_guard(self) -> None:
        A = assemble_first_row(OperatorParams(beta=0.5), BasisSpec(r=2, n=5))
        with pytest.raises(SizeGuardError):
            eigenvalue_dump(A, max_level=4)
