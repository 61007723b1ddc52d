"""Toeplitz matvec, conjugate gradients, wavelet preconditioning and condition numbers."""

import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.linalg import eigh_tridiagonal, eigvalsh, solve
from scipy.sparse.linalg import LinearOperator

from .assembly import ToeplitzStiffness, assemble_first_row
from .basis import (
    dense_transform_matrix,
    fwt_apply,
    fwt_transpose_apply,
    multiscale_layout,
    wavelet_fine_mask,
)
from .cache import FirstRowCache
from .errors import ConvergenceError, DimensionError, ParameterError, SizeGuardError
from .models.operator import BasisSpec
from .models.report import SolveMethod, SolveReport

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
Operator = Callable[[FloatArray], FloatArray]

DEFAULT_TOL = 1e-9
MAX_ITER_FACTOR = 20
DENSE_SOLVE_LIMIT = 8192
DENSE_EIG_LIMIT = 512
LANCZOS_ITERATIONS = 200
INVERSE_LANCZOS_ITERATIONS = 60
INNER_TOL = 1e-12


def _check_vector(size: int, x: FloatArray) -> None:
    if x.shape != (size,):
        raise DimensionError(f"expected a vector of length {size}, got shape {x.shape}")


def toeplitz_matvec(A: ToeplitzStiffness, x: npt.ArrayLike) -> FloatArray:
    """A x by circulant embedding and FFT, O(N log N).

    Raises:
        DimensionError: If x has the wrong length
    """
    xa = np.asarray(x, dtype=np.float64)
    _check_vector(A.size, xa)
    spectrum = A.circulant_spectrum
    length = 2 * (spectrum.size - 1)
    product = np.fft.irfft(spectrum * np.fft.rfft(xa, n=length), n=length)
    return np.asarray(product[: A.size], dtype=np.float64)


def cg_solve(
    A: Operator | ToeplitzStiffness,
    b: npt.ArrayLike,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
    method: SolveMethod = "cg",
) -> tuple[FloatArray, SolveReport]:
    """Conjugate gradients from a zero initial guess.

    Stops when ||r_k|| / ||r_0|| <= tol.

    Args:
        A: Symmetric positive definite operator or Toeplitz stiffness matrix
        b: Right-hand side
        tol: Relative residual tolerance
        max_iter: Iteration limit, 20 N when omitted
        method: Label recorded in the report

    Returns:
        (solution, report)

    Raises:
        ConvergenceError: If the tolerance is not met within max_iter
    """
    apply: Operator
    if isinstance(A, ToeplitzStiffness):
        stiffness = A
        apply = lambda v: toeplitz_matvec(stiffness, v)  # noqa: E731
    else:
        apply = A
    rhs = np.asarray(b, dtype=np.float64)
    size = rhs.size
    limit = max_iter if max_iter is not None else MAX_ITER_FACTOR * size
    start = time.perf_counter()

    x = np.zeros(size)
    norm0 = float(np.linalg.norm(rhs))
    if norm0 == 0.0:
        return x, SolveReport(method=method, size=size, tolerance=tol)

    residual = rhs.copy()
    direction = residual.copy()
    rr = float(residual @ residual)
    history = [1.0]
    for iteration in range(1, limit + 1):
        q = apply(direction)
        alpha = rr / float(direction @ q)
        x += alpha * direction
        residual -= alpha * q
        rr_new = float(residual @ residual)
        history.append(math.sqrt(rr_new) / norm0)
        if history[-1] <= tol:
            report = SolveReport(
                method=method,
                size=size,
                iterations=iteration,
                residual_history=history,
                tolerance=tol,
                wall_time=time.perf_counter() - start,
            )
            logger.debug(f"{method} converged in {iteration} iterations (N={size})")
            return x, report
        direction = residual + (rr_new / rr) * direction
        rr = rr_new

    report = SolveReport(
        method=method,
        size=size,
        iterations=limit,
        residual_history=history,
        tolerance=tol,
        converged=False,
        wall_time=time.perf_counter() - start,
    )
    raise ConvergenceError(
        f"{method} did not reach {tol:.1e} within {limit} iterations "
        f"(residual {history[-1]:.3e})",
        report=report,
    )


@dataclass(frozen=True)
class DiagonalD:
    """Diagonal scaling of the multiscale basis: B(w, w)^{-1/2} per basis function."""

    spec: BasisSpec
    entries: FloatArray

    def __post_init__(self) -> None:
        _check_vector(self.spec.dimension, self.entries)
        if not np.all(self.entries > 0.0):
            raise ParameterError("diagonal scaling entries must be positive")


def wavelet_energy(level_stiffness: ToeplitzStiffness, level: int, j: int) -> float:
    """B(psi_{l,j}, psi_{l,j}) = m^T T m from the level l+1 Toeplitz block."""
    idx, coeffs = wavelet_fine_mask(level_stiffness.spec.r, level, j)
    block = level_stiffness.first_row[np.abs(idx[:, None] - idx[None, :])]
    return float(coeffs @ block @ coeffs)


def build_diag(A: ToeplitzStiffness, cache: FirstRowCache | None = None) -> DiagonalD:
    """Diagonal D for the multiscale basis of A's level.

    The coarse block takes B(phi_{n0}, phi_{n0})^{-1/2}; each wavelet level
    takes the boundary and interior energies from the Toeplitz block of the
    next finer level.
    """
    spec = A.spec
    blocks = multiscale_layout(spec)
    entries = np.empty(spec.dimension)

    coarse = assemble_first_row(A.params, spec.at_level(spec.n0), cache)
    start, size = blocks[0]
    entries[start : start + size] = coarse.first_row[0] ** -0.5

    for level, (start, size) in zip(range(spec.n0, spec.n), blocks[1:], strict=True):
        if level + 1 == spec.n:
            fine = A
        else:
            fine = assemble_first_row(A.params, spec.at_level(level + 1), cache)
        interior_j = 2 if size > 2 else 1
        values = np.full(size, wavelet_energy(fine, level, interior_j) ** -0.5)
        values[0] = wavelet_energy(fine, level, 1) ** -0.5
        values[-1] = wavelet_energy(fine, level, size) ** -0.5
        entries[start : start + size] = values
    return DiagonalD(spec=spec, entries=entries)


def preconditioned_apply(A: ToeplitzStiffness, diag: DiagonalD) -> Operator:
    """y -> D M^T A M D y."""
    spec, d = A.spec, diag.entries

    def apply(y: FloatArray) -> FloatArray:
        return d * fwt_transpose_apply(spec, toeplitz_matvec(A, fwt_apply(spec, d * y)))

    return apply


def pcg_solve(
    A: ToeplitzStiffness,
    b: npt.ArrayLike,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
    diag: DiagonalD | None = None,
) -> tuple[FloatArray, SolveReport]:
    """Solve A d = b by CG on the wavelet-preconditioned system.

    Runs CG on D M^T A M D with right-hand side D M^T b and maps the result
    back to single-scale coefficients M D y.

    Args:
        A: Toeplitz stiffness matrix
        b: Right-hand side in the single-scale basis
        tol: Relative residual tolerance of the preconditioned system
        max_iter: Iteration limit, 20 N when omitted
        diag: Precomputed diagonal scaling

    Returns:
        (single-scale solution, report)
    """
    rhs = np.asarray(b, dtype=np.float64)
    _check_vector(A.size, rhs)
    start = time.perf_counter()
    d = diag if diag is not None else build_diag(A)
    y, report = cg_solve(
        preconditioned_apply(A, d),
        d.entries * fwt_transpose_apply(A.spec, rhs),
        tol=tol,
        max_iter=max_iter,
        method="pcg",
    )
    report.wall_time = time.perf_counter() - start
    return fwt_apply(A.spec, d.entries * y), report


def dense_solve(
    A: ToeplitzStiffness, b: npt.ArrayLike, limit: int = DENSE_SOLVE_LIMIT
) -> tuple[FloatArray, SolveReport]:
    """Materialize A and solve by Cholesky-based elimination.

    Raises:
        SizeGuardError: If N exceeds limit
    """
    if A.size > limit:
        raise SizeGuardError(f"dense solve limited to N <= {limit}, got {A.size}")
    rhs = np.asarray(b, dtype=np.float64)
    _check_vector(A.size, rhs)
    start = time.perf_counter()
    x = solve(A.dense(), rhs, assume_a="pos")
    report = SolveReport(method="dense", size=A.size, wall_time=time.perf_counter() - start)
    return np.asarray(x, dtype=np.float64), report


def solve_system(
    A: ToeplitzStiffness,
    b: npt.ArrayLike,
    method: SolveMethod,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
) -> tuple[FloatArray, SolveReport]:
    """Dispatch to cg_solve, pcg_solve or dense_solve."""
    if method == "cg":
        return cg_solve(A, b, tol=tol, max_iter=max_iter)
    if method == "pcg":
        return pcg_solve(A, b, tol=tol, max_iter=max_iter)
    return dense_solve(A, b)


def stiffness_operator(A: ToeplitzStiffness) -> LinearOperator:
    """A as a scipy LinearOperator."""
    return LinearOperator(
        shape=(A.size, A.size),
        matvec=lambda v: toeplitz_matvec(A, np.ravel(v)),
        dtype=np.float64,
    )


def preconditioned_operator(A: ToeplitzStiffness, diag: DiagonalD) -> LinearOperator:
    """D M^T A M D as a scipy LinearOperator."""
    apply = preconditioned_apply(A, diag)
    return LinearOperator(
        shape=(A.size, A.size), matvec=lambda v: apply(np.ravel(v)), dtype=np.float64
    )


def dense_preconditioned(
    A: ToeplitzStiffness, diag: DiagonalD, limit: int = DENSE_EIG_LIMIT
) -> FloatArray:
    """Materialized D M^T A M D.

    Raises:
        SizeGuardError: If N exceeds limit
    """
    if A.size > limit:
        raise SizeGuardError(f"dense preconditioned matrix limited to N <= {limit}, got {A.size}")
    m = dense_transform_matrix(A.spec)
    d = diag.entries
    return d[:, None] * (m.T @ A.dense() @ m) * d[None, :]


def lanczos_extremes(
    op: LinearOperator, iterations: int = LANCZOS_ITERATIONS, seed: int = 0
) -> tuple[float, float]:
    """Smallest and largest Ritz values after Lanczos with full reorthogonalization.

    Args:
        op: Symmetric operator
        iterations: Number of Lanczos steps (capped at the dimension)
        seed: Seed of the random start vector

    Returns:
        (lambda_min, lambda_max) estimates
    """
    size = op.shape[0]
    steps = min(iterations, size)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(size)
    v /= np.linalg.norm(v)

    basis = np.zeros((steps, size))
    alphas: list[float] = []
    betas: list[float] = []
    for i in range(steps):
        basis[i] = v
        w = np.asarray(op.matvec(v), dtype=np.float64).ravel()
        alpha = float(w @ v)
        alphas.append(alpha)
        # two passes of classical Gram-Schmidt against the whole basis
        for _ in range(2):
            w -= basis[: i + 1].T @ (basis[: i + 1] @ w)
        beta = float(np.linalg.norm(w))
        if i == steps - 1 or beta <= 1e-12 * abs(alpha):
            break
        betas.append(beta)
        v = w / beta

    ritz = eigh_tridiagonal(
        np.array(alphas), np.array(betas[: len(alphas) - 1]), eigvals_only=True
    )
    return float(ritz[0]), float(ritz[-1])


def condition_number(
    A: ToeplitzStiffness,
    diag: DiagonalD | None = None,
    iterations: int = LANCZOS_ITERATIONS,
    dense_limit: int = DENSE_EIG_LIMIT,
) -> tuple[float, str]:
    """Spectral condition number of A, or of D M^T A M D when diag is given.

    Small systems use the dense symmetric eigensolver. Otherwise the largest
    eigenvalue comes from Lanczos on the operator; for the preconditioned
    operator the smallest as well, for A the smallest is the reciprocal of
    the largest eigenvalue of A^{-1}, applied by preconditioned CG.

    Returns:
        (condition number, estimator description)
    """
    start = time.perf_counter()
    if A.size <= dense_limit:
        matrix = A.dense() if diag is None else dense_preconditioned(A, diag, dense_limit)
        eigenvalues = eigvalsh(matrix)
        estimate = float(eigenvalues[-1] / eigenvalues[0])
        estimator = "dense eigvalsh"
    elif diag is not None:
        low, high = lanczos_extremes(preconditioned_operator(A, diag), iterations)
        estimate = high / low
        estimator = f"Lanczos ({iterations} steps, full reorthogonalization)"
    else:
        _, high = lanczos_extremes(stiffness_operator(A), iterations)
        scaling = build_diag(A)

        def inverse(v: FloatArray) -> FloatArray:
            x, _ = pcg_solve(A, np.ravel(v), tol=INNER_TOL, diag=scaling)
            return x

        inverse_op = LinearOperator(shape=(A.size, A.size), matvec=inverse, dtype=np.float64)
        _, inverse_high = lanczos_extremes(inverse_op, INVERSE_LANCZOS_ITERATIONS)
        estimate = high * inverse_high
        estimator = (
            f"Lanczos ({iterations} steps on A, {INVERSE_LANCZOS_ITERATIONS} on A^-1 via PCG)"
        )
    logger.debug(
        f"cond={estimate:.4e} N={A.size} ({estimator}) in {time.perf_counter() - start:.2f}s"
    )
    return estimate, estimator
