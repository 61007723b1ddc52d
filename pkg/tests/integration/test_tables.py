"""Reference values of the preset convergence and conditioning tables."""

import pytest

from tempered_galerkin.analysis import condition_sweep, convergence_sweep, log2_slope
from tempered_galerkin.models.operator import OperatorParams
from tempered_galerkin.models.report import ConvergenceReport
from tempered_galerkin.problems import get_problem

pytestmark = pytest.mark.slow


def sweep(name: str, r: int, beta: float, lam: float, levels: list[int]) -> ConvergenceReport:
    return convergence_sweep(get_problem(name, OperatorParams(beta=beta, lam=lam)), r, levels)


class TestSmoothSolution:
    """Cubic solution with homogeneous exterior data."""

    def test_hat_functions_without_tempering(self) -> None:
        report = sweep("example1", 2, 0.5, 0.0, [9, 10, 11])
        reference = [2.8654e-07, 7.1360e-08, 1.7805e-08]
        for row, l2 in zip(report.rows, reference, strict=True):
            assert row.error_l2 == pytest.approx(l2, rel=0.1)
        assert report.rows[-1].rate_h == pytest.approx(1.75, abs=0.05)

    def test_piecewise_constants_with_tempering(self) -> None:
        report = sweep("example1", 1, 0.3, 3.0, [10, 11, 12])
        assert report.rows[-1].rate_h == pytest.approx(0.85, abs=0.05)
        assert 3.6724e-04 / 2.0 < report.rows[-1].error_h < 2.0 * 3.6724e-04

    def test_high_order_operator(self) -> None:
        report = sweep("example1", 2, 1.8, 0.0, [9, 10, 11])
        assert report.rows[-1].rate_h == pytest.approx(1.10, abs=0.05)
        assert report.rows[-1].rate_l2 == pytest.approx(2.05, abs=0.1)


class TestLowRegularity:
    """Constant right-hand side, whose solution has boundary singularities."""

    def test_exact_errors(self) -> None:
        report = sweep("example2", 2, 0.5, 0.0, [8, 9, 10])
        assert report.error_mode == "exact"
        assert report.rows[-1].rate_h == pytest.approx(0.50, abs=0.05)
        assert report.rows[-1].rate_l2 == pytest.approx(0.75, abs=0.05)

    def test_successive_errors_track_exact_rates(self) -> None:
        params = OperatorParams(beta=0.5)
        prob = get_problem("example2", params)
        exact = convergence_sweep(prob, 2, [8, 9])
        successive = convergence_sweep(prob.model_copy(update={"exact": None}), 2, [8, 9])
        assert successive.error_mode == "successive"
        exact_rate = exact.rows[-1].rate_h
        successive_rate = successive.rows[-1].rate_h
        assert exact_rate is not None and successive_rate is not None
        assert successive_rate == pytest.approx(exact_rate, abs=0.1)

    def test_tempered_successive_errors(self) -> None:
        report = sweep("example2", 2, 0.5, 3.0, [9, 10])
        assert report.error_mode == "successive"
        assert report.rows[-1].rate_h == pytest.approx(0.50, abs=0.05)
        assert 2.1674e-02 / 2.0 < report.rows[-1].error_h < 2.0 * 2.1674e-02


class TestNonhomogeneousData:
    """Tent exterior data with the cubic Hermite and the zero liftings."""

    @pytest.mark.parametrize("name", ["example3_tent_s3", "example3_tent_s2"])
    @pytest.mark.parametrize(("beta", "rate"), [(0.5, 1.75), (1.0, 1.50), (1.6, 1.20)])
    def test_rates(self, name: str, beta: float, rate: float) -> None:
        report = sweep(name, 2, beta, 3.0, [9, 10, 11])
        assert report.rows[-1].rate_h == pytest.approx(rate, abs=0.05)
        assert report.rows[-1].rate_l2 == pytest.approx(2.0, abs=0.1)

    def test_constant_data(self) -> None:
        report = sweep("constant_one", 2, 1.0, 3.0, [8])
        assert report.rows[0].error_l2 < 1e-9


class TestConditioning:
    """Condition numbers and iteration counts on the cubic problem."""

    def test_hat_functions(self) -> None:
        report = condition_sweep(OperatorParams(beta=1.0, lam=3.0), 2, [10, 11, 12])
        assert report.rows[-1].cond_cg == pytest.approx(6.3654e03, rel=0.1)
        assert report.rows[-1].rate == pytest.approx(1.0, abs=0.05)
        for row, iterations in zip(report.rows, [27, 28, 28], strict=True):
            assert abs(row.iterations_pcg - iterations) <= 3
            assert row.cond_pcg == pytest.approx(6.3, rel=0.25)

    def test_plain_condition_slope(self) -> None:
        levels = [8, 9, 10, 11, 12]
        report = condition_sweep(OperatorParams(beta=0.8, lam=3.0), 1, levels)
        slope = log2_slope(levels, [row.cond_cg for row in report.rows])
        assert slope == pytest.approx(0.8, abs=0.1)
        conditions = [row.cond_pcg for row in report.rows]
        assert max(conditions) < 1.15 * min(conditions)
