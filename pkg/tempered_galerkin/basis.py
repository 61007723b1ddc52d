"""B-spline scaling functions, boundary-adapted wavelets and the fast wavelet transform."""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import BasisIndexError, DimensionError, ParameterError
from .models.operator import BasisSpec

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class TwoScaleCoefficients:
    """Masks of the refinement equation and of the wavelets, as exact rationals.

    Coefficients multiply M_r(2x - k); the wavelet of level l and index j takes
    them against the level l+1 scaling functions with an extra factor 1/sqrt(2).
    """

    r: int
    scaling_mask: tuple[Fraction, ...]
    wavelet_interior: tuple[Fraction, ...]
    wavelet_boundary: tuple[Fraction, ...] | None


TWO_SCALE = {
    1: TwoScaleCoefficients(
        r=1,
        scaling_mask=(Fraction(1), Fraction(1)),
        wavelet_interior=(Fraction(1, 2), Fraction(-1, 2)),
        wavelet_boundary=None,
    ),
    2: TwoScaleCoefficients(
        r=2,
        scaling_mask=(Fraction(1, 2), Fraction(1), Fraction(1, 2)),
        wavelet_interior=(
            Fraction(1, 24),
            Fraction(-1, 4),
            Fraction(5, 12),
            Fraction(-1, 4),
            Fraction(1, 24),
        ),
        wavelet_boundary=(Fraction(3, 8), Fraction(-1, 4), Fraction(1, 24)),
    ),
}


def two_scale_coefficients(r: int) -> TwoScaleCoefficients:
    """Masks for spline order r.

    Raises:
        ParameterError: If r is not 1 or 2
    """
    masks = TWO_SCALE.get(r)
    if masks is None:
        raise ParameterError(f"unsupported spline order r={r}; choose 1 or 2")
    return masks


def bspline_eval(r: int, x: npt.ArrayLike) -> FloatArray:
    """Cardinal B-spline M_r: indicator of [0, 1) for r=1, hat on [0, 2] for r=2."""
    two_scale_coefficients(r)
    xa = np.asarray(x, dtype=np.float64)
    if r == 1:
        return np.where((xa >= 0.0) & (xa < 1.0), 1.0, 0.0)
    return np.maximum(0.0, 1.0 - np.abs(xa - 1.0))


@lru_cache(maxsize=8)
def bspline_pieces(order: int) -> tuple[np.polynomial.Polynomial, ...]:
    """Polynomial pieces of the cardinal B-spline M_order on [k, k+1], k = 0..order-1.

    Uses M_m(x) = sum_{i<=k} (-1)^i C(m, i) (x - i)^{m-1} / (m-1)! on [k, k+1].
    """
    pieces = []
    norm = math.factorial(order - 1)
    for k in range(order):
        piece = np.polynomial.Polynomial([0.0])
        for i in range(k + 1):
            shifted = np.polynomial.Polynomial([-float(i), 1.0]) ** (order - 1)
            piece = piece + (-1) ** i * math.comb(order, i) * shifted / norm
        pieces.append(piece)
    return tuple(pieces)


def bspline_fourier(r: int, omega: npt.ArrayLike) -> ComplexArray:
    """F[M_r](omega) = ((1 - e^{-i omega}) / (i omega))^r."""
    w = np.asarray(omega, dtype=np.float64)
    single = np.exp(-0.5j * w) * np.sinc(w / (2.0 * math.pi))
    return np.asarray(single**r, dtype=np.complex128)


def _check_scaling_index(spec: BasisSpec, j: int) -> None:
    if not 0 <= j <= 2**spec.n - spec.r:
        raise BasisIndexError(f"scaling index j={j} outside I_{spec.n} = 0..{2**spec.n - spec.r}")


def _check_wavelet_index(spec: BasisSpec, level: int, j: int) -> None:
    if level < spec.n0:
        raise BasisIndexError(f"wavelet level {level} below n0={spec.n0}")
    if not 1 <= j <= 2**level:
        raise BasisIndexError(f"wavelet index j={j} outside J_{level} = 1..{2**level}")


def scaling_eval(spec: BasisSpec, j: int, x: npt.ArrayLike) -> FloatArray:
    """phi_{n,j}(x) = 2^{n/2} M_r(2^n x - j).

    Raises:
        BasisIndexError: If j is outside I_n
    """
    _check_scaling_index(spec, j)
    xa = np.asarray(x, dtype=np.float64)
    return 2.0 ** (spec.n / 2.0) * bspline_eval(spec.r, 2.0**spec.n * xa - j)


def wavelet_fine_mask(r: int, level: int, j: int) -> tuple[npt.NDArray[np.int64], FloatArray]:
    """Level l+1 scaling indices and coefficients of psi_{l,j}, 1/sqrt(2) included."""
    masks = two_scale_coefficients(r)
    if r == 1:
        idx = np.array([2 * j - 2, 2 * j - 1])
        coeffs = masks.wavelet_interior
    elif j == 1:
        idx = np.array([0, 1, 2])
        coeffs = masks.wavelet_boundary or ()
    elif j == 2**level:
        top = 2 ** (level + 1) - 2
        idx = np.array([top, top - 1, top - 2])
        coeffs = masks.wavelet_boundary or ()
    else:
        idx = np.arange(2 * j - 4, 2 * j + 1)
        coeffs = masks.wavelet_interior
    return idx, INV_SQRT2 * np.array([float(c) for c in coeffs])


def wavelet_eval(spec: BasisSpec, level: int, j: int, x: npt.ArrayLike) -> FloatArray:
    """psi_{l,j}(x) through its two-scale expansion in phi_{l+1,.}.

    Raises:
        BasisIndexError: If l < n0 or j is outside J_l
    """
    _check_wavelet_index(spec, level, j)
    fine = spec.at_level(level + 1)
    idx, coeffs = wavelet_fine_mask(spec.r, level, j)
    xa = np.asarray(x, dtype=np.float64)
    total = np.zeros(xa.shape)
    for k, c in zip(idx, coeffs, strict=True):
        total += c * scaling_eval(fine, int(k), xa)
    return total


def multiscale_layout(spec: BasisSpec) -> list[tuple[int, int]]:
    """(start, size) of the coarse block followed by the wavelet blocks n0..n-1."""
    blocks = [(0, spec.at_level(spec.n0).dimension)]
    offset = blocks[0][1]
    for level in range(spec.n0, spec.n):
        blocks.append((offset, 2**level))
        offset += 2**level
    return blocks


def multiscale_eval(spec: BasisSpec, k: int, x: npt.ArrayLike) -> FloatArray:
    """k-th function of the ordered multiscale basis (coarse block, then wavelets)."""
    if not 0 <= k < spec.dimension:
        raise BasisIndexError(f"multiscale index {k} outside 0..{spec.dimension - 1}")
    blocks = multiscale_layout(spec)
    if k < blocks[0][1]:
        return scaling_eval(spec.at_level(spec.n0), k, x)
    for level, (start, size) in zip(range(spec.n0, spec.n), blocks[1:], strict=True):
        if k < start + size:
            return wavelet_eval(spec, level, k - start + 1, x)
    raise BasisIndexError(f"multiscale index {k} not found")


def expand_single_scale(spec: BasisSpec, coeffs: npt.ArrayLike, x: npt.ArrayLike) -> FloatArray:
    """Evaluate sum_j d_j phi_{n,j}(x); zero outside [0, 1]."""
    d = np.asarray(coeffs, dtype=np.float64)
    if d.size != spec.dimension:
        raise DimensionError(f"expected {spec.dimension} coefficients, got {d.size}")
    xa = np.asarray(x, dtype=np.float64)
    scale = 2.0 ** (spec.n / 2.0)
    y = 2.0**spec.n * xa
    if spec.r == 1:
        cell = np.floor(y).astype(np.int64)
        inside = (cell >= 0) & (cell < d.size)
        return np.where(inside, scale * d[np.clip(cell, 0, d.size - 1)], 0.0)
    nodal = np.concatenate(([0.0], scale * d, [0.0]))
    return np.interp(y, np.arange(nodal.size, dtype=np.float64), nodal, left=0.0, right=0.0)


@lru_cache(maxsize=64)
def level_matrices(r: int, level: int) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Two-scale matrices P_l and Q_l with Phi_l = Phi_{l+1} P_l and Psi_l = Phi_{l+1} Q_l."""
    coarse = BasisSpec(r=r, n=level)  # type: ignore[arg-type]
    fine_dim = coarse.at_level(level + 1).dimension
    mask = np.array([float(c) for c in two_scale_coefficients(r).scaling_mask]) * INV_SQRT2

    rows, cols, vals = [], [], []
    for j in range(coarse.dimension):
        for k, c in enumerate(mask):
            rows.append(2 * j + k)
            cols.append(j)
            vals.append(c)
    p = sp.csr_matrix((vals, (rows, cols)), shape=(fine_dim, coarse.dimension))

    rows, cols, vals = [], [], []
    for j in range(1, 2**level + 1):
        idx, coeffs = wavelet_fine_mask(r, level, j)
        rows.extend(int(i) for i in idx)
        cols.extend([j - 1] * idx.size)
        vals.extend(coeffs.tolist())
    q = sp.csr_matrix((vals, (rows, cols)), shape=(fine_dim, 2**level))
    return p, q


@lru_cache(maxsize=64)
def _level_factor(r: int, level: int) -> object:
    p, q = level_matrices(r, level)
    return splu(sp.hstack([p, q]).tocsc())


def _check_length(spec: BasisSpec, vec: FloatArray) -> None:
    if vec.shape != (spec.dimension,):
        raise DimensionError(f"expected a vector of length {spec.dimension}, got {vec.shape}")


def fwt_apply(spec: BasisSpec, coeffs_multiscale: npt.ArrayLike) -> FloatArray:
    """Single-scale coefficients M^r c from multiscale coefficients c, in O(N)."""
    c = np.asarray(coeffs_multiscale, dtype=np.float64)
    _check_length(spec, c)
    blocks = multiscale_layout(spec)
    a = c[: blocks[0][1]].copy()
    for level, (start, size) in zip(range(spec.n0, spec.n), blocks[1:], strict=True):
        p, q = level_matrices(spec.r, level)
        a = p @ a + q @ c[start : start + size]
    return a


def fwt_transpose_apply(spec: BasisSpec, coeffs_single: npt.ArrayLike) -> FloatArray:
    """(M^r)^T b by the reversed cascade, in O(N)."""
    b = np.asarray(coeffs_single, dtype=np.float64)
    _check_length(spec, b)
    details = []
    current = b
    for level in range(spec.n - 1, spec.n0 - 1, -1):
        p, q = level_matrices(spec.r, level)
        details.append(q.T @ current)
        current = p.T @ current
    return np.concatenate([current, *reversed(details)])


def fwt_solve(spec: BasisSpec, coeffs_single: npt.ArrayLike) -> FloatArray:
    """(M^r)^{-1} a by inverting the square two-scale relation level by level."""
    a = np.asarray(coeffs_single, dtype=np.float64)
    _check_length(spec, a)
    details = []
    current = a
    for level in range(spec.n - 1, spec.n0 - 1, -1):
        coarse_dim = spec.at_level(level).dimension
        solution = _level_factor(spec.r, level).solve(current)  # type: ignore[attr-defined]
        details.append(solution[coarse_dim:])
        current = solution[:coarse_dim]
    return np.concatenate([current, *reversed(details)])


def dense_transform_matrix(spec: BasisSpec) -> FloatArray:
    """Dense M^r assembled from point values of every multiscale function.

    Coefficients in the level-n basis are read off at the knots (r=2, hats are
    interpolatory) or cell midpoints (r=1); independent of the cascade.
    """
    if spec.r == 1:
        points = (np.arange(spec.dimension) + 0.5) * spec.h
    else:
        points = (np.arange(spec.dimension) + 1.0) * spec.h
    scale = 2.0 ** (-spec.n / 2.0)
    columns = [scale * multiscale_eval(spec, k, points) for k in range(spec.dimension)]
    return np.column_stack(columns)
