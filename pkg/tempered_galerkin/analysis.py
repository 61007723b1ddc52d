"""Error norms, convergence tables, condition-number sweeps and spectra."""

import logging
import math
import time
from collections.abc import Callable, Sequence

import numpy as np
import numpy.typing as npt
from scipy.linalg import eigvalsh

from .assembly import ToeplitzStiffness, assemble_first_row, load_vector
from .cache import FirstRowCache
from .errors import ProblemSpecError, SizeGuardError
from .linsolve import (
    DENSE_EIG_LIMIT,
    DEFAULT_TOL,
    LANCZOS_ITERATIONS,
    DiagonalD,
    build_diag,
    cg_solve,
    condition_number,
    dense_preconditioned,
    dense_solve,
    pcg_solve,
)
from .models.operator import BasisSpec, OperatorParams
from .models.problem import ProblemSpec
from .models.report import (
    ConditionReport,
    ConditionRow,
    ConvergenceReport,
    ErrorChoice,
    ErrorMode,
    SolveMethod,
    log2_rate,
)
from .problems import DiscreteSolution, get_problem, resolve_problem, solve_problem
from .quadrature import composite_gauss_legendre, graded_breakpoints
from .symbol import DEFAULT_INTERVAL, SampledFunction, check_support

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
Evaluator = Callable[[FloatArray], FloatArray]

ERROR_OVERSAMPLING = 6
ERROR_PAD_FACTOR = 8
ERROR_GL_ORDER = 10
ERROR_GRADING = 30
EIGS_MAX_LEVEL = 9


def _l2_breakpoints(n: int) -> FloatArray:
    """Mesh-aligned panels over the error interval, graded into the cells at 0 and 1."""
    lo, hi = DEFAULT_INTERVAL
    h = 2.0**-n
    uniform = lo + h * np.arange(round((hi - lo) / h) + 1)
    graded = graded_breakpoints(h * 2.0**-ERROR_GRADING, h, ERROR_GRADING)
    return np.union1d(uniform, np.concatenate((graded, 1.0 - graded)))


def l2_norm(func: Evaluator, n: int) -> float:
    """||func||_{L^2(-1, 2)} by Gauss-Legendre on the level-n mesh."""
    nodes, weights = composite_gauss_legendre(_l2_breakpoints(n), ERROR_GL_ORDER)
    values = np.asarray(func(nodes), dtype=np.float64)
    return math.sqrt(float(np.sum(weights * values**2)))


def h_half_beta_norm(
    func: Evaluator,
    beta: float,
    n: int,
    oversampling: int = ERROR_OVERSAMPLING,
    pad_factor: int = ERROR_PAD_FACTOR,
) -> float:
    """((1/2pi) int (1 + |xi|^beta) |F[func]|^2 d xi)^{1/2} by zero-padded FFT.

    Args:
        func: Function supported in [-1, 2]
        beta: Operator order
        n: Refinement level; 2^{n + oversampling} samples are taken
        oversampling: Extra binary digits of sampling resolution
        pad_factor: Zero padding factor

    Returns:
        Norm value
    """
    sampled = SampledFunction.from_callable(func, 2 ** (n + oversampling))
    check_support(sampled.values, "error_norms")
    dx = sampled.spacing
    size = pad_factor * sampled.values.size
    spectrum = dx * np.fft.rfft(sampled.values, n=size)
    xi = 2.0 * math.pi * np.fft.rfftfreq(size, d=dx)
    density = (1.0 + xi**beta) * np.abs(spectrum) ** 2
    # one-sided spectrum: every bin except DC and Nyquist stands for two
    density[1:-1] *= 2.0
    return math.sqrt(float(np.sum(density)) / (size * dx))


def error_norms(
    exact: Evaluator,
    approx: DiscreteSolution,
    beta: float,
    oversampling: int = ERROR_OVERSAMPLING,
    pad_factor: int = ERROR_PAD_FACTOR,
) -> tuple[float, float]:
    """L^2(R) and H^{beta/2}(R) norms of exact - approx.

    Args:
        exact: Exact solution on R
        approx: Discrete solution
        beta: Operator order
        oversampling: Error grid has 2^{n + oversampling} points on [-1, 2]
        pad_factor: FFT zero padding factor

    Returns:
        (l2, h_half_beta)
    """

    def error(x: FloatArray) -> FloatArray:
        return np.asarray(exact(x), dtype=np.float64) - approx.evaluate(x)

    n = approx.spec.n
    return l2_norm(error, n), h_half_beta_norm(error, beta, n, oversampling, pad_factor)


def successive_errors(
    coarse: DiscreteSolution,
    fine: DiscreteSolution,
    beta: float,
    oversampling: int = ERROR_OVERSAMPLING,
    pad_factor: int = ERROR_PAD_FACTOR,
) -> tuple[float, float]:
    """Norms of p_{n+1} - p_n.

    Raises:
        ProblemSpecError: If the solutions are not consecutive levels of one basis
            or carry different liftings
    """
    if fine.spec.r != coarse.spec.r or fine.spec.n != coarse.spec.n + 1:
        raise ProblemSpecError(
            f"successive errors need levels n and n+1 of one basis, got "
            f"r={coarse.spec.r} n={coarse.spec.n} and r={fine.spec.r} n={fine.spec.n}"
        )
    if fine.lifting != coarse.lifting:
        raise ProblemSpecError("successive errors need solutions with the same lifting")

    def difference(x: FloatArray) -> FloatArray:
        return fine.homogeneous_part(x) - coarse.homogeneous_part(x)

    n = fine.spec.n
    return l2_norm(difference, n), h_half_beta_norm(
        difference, beta, n, oversampling, pad_factor
    )


_EXPLICIT_MODES: dict[ErrorChoice, ErrorMode] = {
    "exact": "exact",
    "successive": "successive",
    "both": "both",
}


def convergence_sweep(
    prob: ProblemSpec,
    r: int,
    n_range: Sequence[int],
    method: SolveMethod = "pcg",
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
    cache: FirstRowCache | None = None,
    oversampling: int = ERROR_OVERSAMPLING,
    pad_factor: int = ERROR_PAD_FACTOR,
    errors: ErrorChoice = "auto",
) -> ConvergenceReport:
    """Errors and rates over a range of levels.

    Exact errors compare with the known solution. Successive errors compare
    level n with level n+1, which adds one solve above the last level. `auto`
    picks exact errors when the problem has an exact solution; `both` reports
    the two side by side.

    Args:
        prob: Problem specification
        r: B-spline order
        n_range: Ascending refinement levels
        method: Linear solver
        tol: Solver tolerance
        max_iter: Solver iteration limit
        cache: Optional first-row cache
        oversampling: Error grid resolution, see error_norms
        pad_factor: FFT zero padding factor
        errors: auto, exact, successive or both

    Returns:
        ConvergenceReport with one row per level

    Raises:
        ProblemSpecError: If n_range is empty or not ascending, or exact errors
            are requested for a problem without an exact solution
    """
    levels = list(n_range)
    if not levels:
        raise ProblemSpecError("n_range must not be empty")
    if any(b <= a for a, b in zip(levels, levels[1:], strict=False)):
        raise ProblemSpecError(f"n_range must be strictly ascending, got {levels}")

    resolved = resolve_problem(prob)
    exact = resolved.exact
    default: ErrorMode = "exact" if exact is not None else "successive"
    mode = _EXPLICIT_MODES.get(errors, default)
    if mode != "successive" and exact is None:
        raise ProblemSpecError(f"problem '{prob.name}' has no exact solution for {mode} errors")

    beta = prob.params.beta
    report = ConvergenceReport(
        problem=prob.name,
        r=r,
        beta=beta,
        lam=prob.params.lam,
        method=method,
        error_mode=mode,
        notes=list(resolved.notes),
    )
    if mode != "exact":
        report.notes.append("successive errors are differences between consecutive levels n, n+1")
    logger.info(
        f"Convergence sweep {prob.name} r={r} {prob.params.label()} levels={levels} ({mode})"
    )

    def solve(n: int) -> tuple[DiscreteSolution, int]:
        spec = BasisSpec(r=r, n=n)  # type: ignore[arg-type]
        solution, solve_report = solve_problem(resolved, spec, method, tol, max_iter, cache)
        return solution, solve_report.iterations

    cached: dict[int, tuple[DiscreteSolution, int]] = {}
    for n in levels:
        coarse, iterations = cached.pop(n, None) or solve(n)
        hat: tuple[float, float] | None = None
        if mode != "exact":
            fine = solve(n + 1)
            cached[n + 1] = fine
            hat = successive_errors(coarse, fine[0], beta, oversampling, pad_factor)
        if exact is None or mode == "successive":
            assert hat is not None
            report.add_row(n, error_h=hat[1], error_l2=hat[0], iterations=iterations)
            continue
        l2, hb = error_norms(exact, coarse, beta, oversampling, pad_factor)
        report.add_row(
            n,
            error_h=hb,
            error_l2=l2,
            iterations=iterations,
            error_h_hat=hat[1] if hat else None,
            error_l2_hat=hat[0] if hat else None,
        )
    return report


def condition_sweep(
    params: OperatorParams,
    r: int,
    n_range: Sequence[int],
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
    cache: FirstRowCache | None = None,
    lanczos_iterations: int = LANCZOS_ITERATIONS,
    dense_limit: int = DENSE_EIG_LIMIT,
    dense_timing_limit: int = 0,
) -> ConditionReport:
    """Condition numbers and CG/PCG iteration counts on Example 1 data.

    Args:
        params: Operator parameters
        r: B-spline order
        n_range: Ascending refinement levels
        tol: Solver tolerance
        max_iter: Solver iteration limit
        cache: Optional first-row cache
        lanczos_iterations: Lanczos steps of the condition estimators
        dense_limit: Largest N handled by the dense eigensolver
        dense_timing_limit: Largest N for which a dense solve is timed (0 disables)

    Returns:
        ConditionReport with one row per level
    """
    levels = list(n_range)
    if not levels:
        raise ProblemSpecError("n_range must not be empty")
    resolved = resolve_problem(get_problem("example1", params))
    report = ConditionReport(r=r, beta=params.beta, lam=params.lam, estimator="")
    estimators: list[str] = []
    logger.info(f"Condition sweep r={r} {params.label()} levels={levels}")

    for n in levels:
        spec = BasisSpec(r=r, n=n)  # type: ignore[arg-type]
        stiffness = assemble_first_row(params, spec, cache)
        load = load_vector(resolved.source, spec).values
        diag = build_diag(stiffness, cache)

        cond_cg, estimator = condition_number(stiffness, None, lanczos_iterations, dense_limit)
        cond_pcg, estimator_pcg = condition_number(
            stiffness, diag, lanczos_iterations, dense_limit
        )
        estimators.extend(e for e in (estimator, estimator_pcg) if e not in estimators)

        _, cg_report = cg_solve(stiffness, load, tol=tol, max_iter=max_iter)
        _, pcg_report = pcg_solve(stiffness, load, tol=tol, max_iter=max_iter, diag=diag)
        time_dense = None
        if stiffness.size <= dense_timing_limit:
            _, dense_report = dense_solve(stiffness, load, limit=dense_timing_limit)
            time_dense = dense_report.wall_time

        rate = log2_rate(cond_cg, report.rows[-1].cond_cg) if report.rows else None
        report.rows.append(
            ConditionRow(
                n=n,
                cond_cg=cond_cg,
                rate=rate,
                iterations_cg=cg_report.iterations,
                cond_pcg=cond_pcg,
                iterations_pcg=pcg_report.iterations,
                time_cg=cg_report.wall_time,
                time_pcg=pcg_report.wall_time,
                time_dense=time_dense,
            )
        )
        logger.info(
            f"n={n} N={spec.dimension} cond={cond_cg:.4e} cond_pcg={cond_pcg:.4f} "
            f"iterations cg={cg_report.iterations} pcg={pcg_report.iterations}"
        )

    report.estimator = "; ".join(estimators)
    return report


def log2_slope(levels: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of log2(values) against the levels."""
    if len(levels) < 2:
        raise ProblemSpecError("a slope needs at least two levels")
    slope, _ = np.polyfit(np.asarray(levels, dtype=np.float64), np.log2(values), 1)
    return float(slope)


def eigenvalue_dump(
    A: ToeplitzStiffness, diag: DiagonalD | None = None, max_level: int = EIGS_MAX_LEVEL
) -> FloatArray:
    """All eigenvalues of A, or of D M^T A M D when diag is given, ascending.

    Raises:
        SizeGuardError: If the level exceeds max_level
    """
    if A.spec.n > max_level:
        raise SizeGuardError(f"eigenvalue dumps limited to n <= {max_level}, got n={A.spec.n}")
    start = time.perf_counter()
    matrix = A.dense() if diag is None else dense_preconditioned(A, diag, limit=A.size)
    eigenvalues = np.asarray(eigvalsh(matrix), dtype=np.float64)
    logger.debug(f"{A.size} eigenvalues in {time.perf_counter() - start:.2f}s")
    return eigenvalues


def spread(eigenvalues: FloatArray) -> float:
    """max / min of a positive spectrum."""
    return float(eigenvalues[-1] / eigenvalues[0])
