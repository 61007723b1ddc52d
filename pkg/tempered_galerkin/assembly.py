"""Stiffness first rows, load vectors and lifting terms of the Galerkin system."""

import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy.integrate import quad
from scipy.linalg import toeplitz

from .basis import bspline_fourier, bspline_pieces, scaling_eval
from .cache import FirstRowCache
from .errors import (
    BasisIndexError,
    DimensionError,
    ParameterError,
    ProblemSpecError,
    QuadratureError,
    SizeGuardError,
)
from .functions import ExtendedFunction
from .models.operator import BasisSpec, OperatorParams
from .quadrature import (
    composite_gauss_legendre,
    exp_integral_e1,
    gauss_legendre,
    graded_breakpoints,
    power_exp_moment,
    regularized_moment,
    tail_integral,
)
from .symbol import c_beta, symbol_g

__all__ = [
    "ConstantSource",
    "FourierSource",
    "KernelSource",
    "LoadVector",
    "PointwiseSource",
    "ToeplitzStiffness",
    "apply_operator_kernel",
    "assemble_first_row",
    "bilinear_form_bruteforce",
    "exp_integral_e1",
    "lifting_load",
    "load_vector",
    "load_vector_fourier",
    "regularized_moment",
    "stiffness_bruteforce",
    "symbol_entry_oracle",
    "tail_integral",
]

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

CELL_ORDER = 20
KERNEL_PANELS = 24
KERNEL_ORDER = 10
KERNEL_CHUNK = 512
LOAD_ORDER = 10
BOUNDARY_GRADING = 30
ORACLE_HEAD_PERIODS = 4
FOURIER_LOAD_CUTOFF = 1000.0
FOURIER_LOAD_PANEL = 0.5 * math.pi
FOURIER_LOAD_ORDER = 16
BRUTEFORCE_LIMIT = 128


@dataclass(frozen=True)
class ToeplitzStiffness:
    """Symmetric Toeplitz stiffness matrix B(Phi_n, Phi_n) given by its first row."""

    spec: BasisSpec
    params: OperatorParams
    first_row: FloatArray

    def __post_init__(self) -> None:
        if self.first_row.shape != (self.spec.dimension,):
            raise DimensionError(
                f"first row has shape {self.first_row.shape}, expected ({self.spec.dimension},)"
            )

    @property
    def size(self) -> int:
        """Number of unknowns N."""
        return self.spec.dimension

    @cached_property
    def circulant_spectrum(self) -> ComplexArray:
        """Eigenvalues of the circulant embedding, length the next power of two >= 2N."""
        n = self.size
        length = 1 << (2 * n - 1).bit_length()
        column = np.zeros(length)
        column[:n] = self.first_row
        if n > 1:
            column[length - n + 1 :] = self.first_row[1:][::-1]
        return np.fft.rfft(column)

    def entry(self, i: int, j: int) -> float:
        """Matrix entry (i, j) = first_row[|i - j|]."""
        return float(self.first_row[abs(i - j)])

    def dense(self) -> FloatArray:
        """Materialized N x N matrix."""
        return np.asarray(toeplitz(self.first_row), dtype=np.float64)


@dataclass(frozen=True)
class LoadVector:
    """Entries (f, phi_{n,j}) of a right-hand side."""

    spec: BasisSpec
    values: FloatArray

    def __post_init__(self) -> None:
        if self.values.shape != (self.spec.dimension,):
            raise DimensionError(
                f"load vector has shape {self.values.shape}, expected ({self.spec.dimension},)"
            )

    def __sub__(self, other: "LoadVector") -> "LoadVector":
        return LoadVector(spec=self.spec, values=self.values - other.values)


@dataclass(frozen=True)
class ConstantSource:
    """f equal to a constant on Omega."""

    value: float


@dataclass(frozen=True)
class PointwiseSource:
    """f given by a vectorized callable on Omega."""

    func: Callable[[FloatArray], FloatArray]


@dataclass(frozen=True)
class KernelSource:
    """f = -(Delta + lambda)^{beta/2} w for a piecewise w, applied on the kernel side."""

    params: OperatorParams
    func: ExtendedFunction


@dataclass(frozen=True)
class FourierSource:
    """f = -(Delta + lambda)^{beta/2} u given through the transform of u."""

    params: OperatorParams
    transform: Callable[[FloatArray], ComplexArray]


RHSSource = ConstantSource | PointwiseSource | KernelSource | FourierSource


def _check_admissible(params: OperatorParams, spec: BasisSpec) -> None:
    if spec.r == 1 and params.beta >= 1.0:
        raise ParameterError(
            f"piecewise constants are not conforming for beta={params.beta:g}; use r=2"
        )


def _first_row_dimensionless(beta: float, mu: float, r: int, size: int) -> FloatArray:
    """int_0^inf e^{-mu s} s^{-1-beta} G_j(s) ds for j < size.

    G_j(s) = 2 M(r+j) - M(r+j+s) - M(r+j-s) with M the cardinal B-spline of
    order 2r, the autocorrelation of M_r.
    """
    order = 2 * r
    pieces = bspline_pieces(order)
    ref_nodes, ref_weights = gauss_legendre(CELL_ORDER)
    u01 = 0.5 * (ref_nodes + 1.0)
    w01 = 0.5 * ref_weights
    row = np.zeros(size)

    # supports apart: G_j(s) = -M(u) with s = u + j - r, u in [0, 2r]
    far = np.arange(r + 1, size)
    if far.size:
        u = (np.arange(order)[:, None] + u01).ravel()
        wu = np.tile(w01, order)
        spline = np.concatenate([pieces[k](k + u01) for k in range(order)])
        s = u[None, :] + (far - r)[:, None].astype(np.float64)
        row[far] = -np.sum(wu * spline * np.exp(-mu * s) * s ** (-1.0 - beta), axis=1)

    for j in range(min(r, size - 1) + 1):
        centre = r + j
        value_at_centre = float(pieces[centre](centre)) if centre < order else 0.0
        total = 0.0
        for k in range(centre):
            g = np.polynomial.Polynomial([2.0 * value_at_centre])
            if centre + k < order:
                g = g - pieces[centre + k](np.polynomial.Polynomial([centre, 1.0]))
            g = g - pieces[centre - k - 1](np.polynomial.Polynomial([centre, -1.0]))
            if k == 0:
                total += _first_cell_moments(g, beta, mu, r)
            else:
                s_cell = k + u01
                total += float(
                    np.sum(w01 * g(s_cell) * np.exp(-mu * s_cell) * s_cell ** (-1.0 - beta))
                )
        if value_at_centre:
            total += 2.0 * value_at_centre * float(tail_integral(mu, beta, float(centre)))
        row[j] = total
    return row


def _first_cell_moments(g: np.polynomial.Polynomial, beta: float, mu: float, r: int) -> float:
    # G_j is even to order 2r - 2 at s = 0
    total = 0.0
    for m, coeff in enumerate(g.coef):
        if m == 0 or (m % 2 == 1 and m < 2 * r - 1):
            continue
        total += coeff * float(power_exp_moment(mu, 1.0, m - 1.0 - beta))
    return total


@lru_cache(maxsize=64)
def _first_row_cached(beta: float, lam: float, r: int, n: int) -> FloatArray:
    params = OperatorParams(beta=beta, lam=lam)
    h = 2.0**-n
    raw = _first_row_dimensionless(beta, lam * h, r, 2**n - r + 1)
    row = c_beta(params) * h**-beta * raw
    bad = np.flatnonzero(~np.isfinite(row))
    if bad.size:
        raise QuadratureError(
            "non-finite stiffness entry", shift=int(bad[0]), integral="first_row"
        )
    row.setflags(write=False)
    return row


def assemble_first_row(
    params: OperatorParams, spec: BasisSpec, cache: FirstRowCache | None = None
) -> ToeplitzStiffness:
    """Assemble the Toeplitz stiffness matrix of V_n.

    first_row[j] = B(phi_{n,0}, phi_{n,j}). The near-diagonal shifts are split at
    s = 1 (in units of h): the first cell is integrated exactly through
    regularized moments of the spline polynomial, the remaining cells by
    Gauss-Legendre, the constant far field through the tail integral. Shifts
    whose supports are apart are smooth and use Gauss-Legendre only.

    Args:
        params: Operator parameters
        spec: Basis order and level
        cache: Optional on-disk first-row cache

    Returns:
        Assembled ToeplitzStiffness

    Raises:
        ParameterError: If r = 1 and beta >= 1
        QuadratureError: If an entry cannot be computed
    """
    _check_admissible(params, spec)
    if cache is not None:
        stored = cache.load(params, spec)
        if stored is not None:
            return ToeplitzStiffness(spec=spec, params=params, first_row=stored)

    start = time.perf_counter()
    row = _first_row_cached(params.beta, params.lam, spec.r, spec.n)
    logger.debug(
        f"Assembled first row r={spec.r} n={spec.n} {params.label()} "
        f"(N={spec.dimension}) in {time.perf_counter() - start:.3f}s"
    )
    if cache is not None:
        cache.store(params, spec, row)
    return ToeplitzStiffness(spec=spec, params=params, first_row=row)


def _checked_quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    shift: int | None,
    integral: str,
    **kwargs: object,
) -> float:
    result = quad(func, a, b, full_output=1, **kwargs)
    if len(result) > 3:
        raise QuadratureError(f"adaptive quadrature: {result[3]}", shift=shift, integral=integral)
    return float(result[0])


def _cosine_expansion(r: int, j: int) -> dict[int, float]:
    """cos(j w) (1 - cos w)^r as a combination of cos(k w), k >= 0."""
    raw = {
        1: [(0, 1.0), (1, -0.5), (-1, -0.5)],
        2: [(0, 1.5), (1, -1.0), (-1, -1.0), (2, 0.25), (-2, 0.25)],
    }[r]
    terms: dict[int, float] = {}
    for offset, coeff in raw:
        k = abs(j + offset)
        terms[k] = terms.get(k, 0.0) + coeff
    return terms


def symbol_entry_oracle(params: OperatorParams, spec: BasisSpec, j: int) -> float:
    """B(phi_{n,0}, phi_{n,j}) from the frequency-domain representation.

    (2^r / pi) int_0^inf G(w / h) cos(j w) ((1 - cos w) / w^2)^r dw, with an
    adaptive head on [0, W] and the tail [W, inf) integrated exactly per
    cosine term by Fourier-weighted quadrature.

    Raises:
        QuadratureError: If an adaptive quadrature fails
    """
    _check_admissible(params, spec)
    shift = abs(j)
    h, r = spec.h, spec.r
    cutoff = 2.0 * math.pi * (shift + ORACLE_HEAD_PERIODS)

    def head(w: float) -> float:
        # (1 - cos w) / w^2 = sinc^2(w / 2pi) / 2
        profile = 0.5 * np.sinc(w / (2.0 * math.pi)) ** 2
        return float(symbol_g(params, w / h)) * profile**r * math.cos(shift * w)

    def decay(w: float) -> float:
        return float(symbol_g(params, w / h)) / w ** (2 * r)

    total = _checked_quad(
        head, 0.0, cutoff, shift, "oracle_head", limit=2000, epsabs=0.0, epsrel=1e-12
    )
    tol = 1e-11 * max(abs(total), 1e-300)
    for k, coeff in _cosine_expansion(r, shift).items():
        if k == 0:
            tail = _checked_quad(decay, cutoff, math.inf, shift, "oracle_tail", epsabs=tol)
        else:
            tail = _checked_quad(
                decay, cutoff, math.inf, shift, "oracle_tail", weight="cos", wvar=k, epsabs=tol
            )
        total += coeff * tail
    return 2.0**r / math.pi * total


def _overlap_of_differences(spec: BasisSpec, i: int, j: int, t: float) -> float:
    """int (phi_i(x+t) - phi_i(x)) (phi_j(x+t) - phi_j(x)) dx, exact per mesh cell."""
    h = spec.h
    lo = min(i, j) * h
    hi = (max(i, j) + spec.r) * h
    knots = h * np.arange(min(i, j), max(i, j) + spec.r + 1)
    points = np.unique(np.clip(np.concatenate([knots, knots - t]), lo - t, hi))
    if points.size < 2:
        return 0.0
    x, w = composite_gauss_legendre(points, spec.r + 1)
    di = scaling_eval(spec, i, x + t) - scaling_eval(spec, i, x)
    dj = scaling_eval(spec, j, x + t) - scaling_eval(spec, j, x)
    return float(np.sum(w * di * dj))


def bilinear_form_bruteforce(params: OperatorParams, spec: BasisSpec, i: int, j: int) -> float:
    """B(phi_{n,i}, phi_{n,j}) straight from the double integral of the bilinear form.

    B(u, v) = c_beta int_0^inf zeta(t) I(t) dt, where I(t) is the overlap of the
    differences u(.+t) - u and v(.+t) - v. I is integrated exactly between the
    knots and their shifts; the t-integral is adaptive up to the point where the
    shifted supports separate, and I(t) = 2 (u, v) beyond it.

    Raises:
        BasisIndexError: If i or j is outside I_n
        QuadratureError: If the adaptive quadrature fails
    """
    _check_admissible(params, spec)
    last = spec.dimension - 1
    if not (0 <= i <= last and 0 <= j <= last):
        raise BasisIndexError(f"indices ({i}, {j}) outside 0..{last}")
    beta, lam, h = params.beta, params.lam, spec.h
    span = (abs(i - j) + spec.r) * h

    def zeta(t: float) -> float:
        return math.exp(-lam * t) * t ** (-1.0 - beta)

    def integrand(t: float) -> float:
        return zeta(t) * _overlap_of_differences(spec, i, j, t)

    breaks = h * np.arange(1, abs(i - j) + spec.r)
    near = _checked_quad(
        integrand,
        0.0,
        span,
        abs(i - j),
        "bruteforce_near",
        points=breaks if breaks.size else None,
        limit=500,
        epsabs=1e-13,
        epsrel=1e-11,
    )
    gram = 0.5 * _overlap_of_differences(spec, i, j, 2.0 * span + h)
    far = _checked_quad(zeta, span, math.inf, abs(i - j), "bruteforce_tail", epsabs=0.0)
    return c_beta(params) * (near + 2.0 * gram * far)


def stiffness_bruteforce(params: OperatorParams, spec: BasisSpec) -> FloatArray:
    """Dense stiffness matrix entry by entry from bilinear_form_bruteforce.

    Raises:
        SizeGuardError: If N exceeds the brute-force limit
    """
    size = spec.dimension
    if size > BRUTEFORCE_LIMIT:
        raise SizeGuardError(f"brute-force assembly limited to N <= {BRUTEFORCE_LIMIT}, got {size}")
    start = time.perf_counter()
    matrix = np.empty((size, size))
    for i in range(size):
        for j in range(i, size):
            matrix[i, j] = matrix[j, i] = bilinear_form_bruteforce(params, spec, i, j)
    logger.debug(f"Brute-force stiffness N={size} in {time.perf_counter() - start:.1f}s")
    return matrix


def apply_operator_kernel(
    params: OperatorParams, func: ExtendedFunction, x: npt.ArrayLike
) -> FloatArray:
    """Pointwise -(Delta + lambda)^{beta/2} w on Omega from the kernel representation.

    L w(x) = c_beta int_0^inf zeta(t) (2 w(x) - w(x+t) - w(x-t)) dt. Up to the
    distance to the boundary the polynomial restriction is expanded in even
    Taylor terms and integrated through regularized moments; between the
    distances to the breakpoints of w the integrand is smooth and integrated
    on geometrically graded Gauss-Legendre panels; beyond the last breakpoint
    w is constant and the tail integral closes the sum.

    Args:
        params: Operator parameters
        func: Piecewise function with a polynomial restriction to Omega
        x: Points in the open interval (0, 1)

    Returns:
        Values with the shape of x

    Raises:
        ProblemSpecError: If func has no polynomial restriction to Omega
        ParameterError: If a point lies outside Omega
    """
    poly = func.interior_poly
    if poly is None:
        raise ProblemSpecError("kernel-side application needs a polynomial restriction to Omega")
    x_arr = np.asarray(x, dtype=np.float64)
    flat = x_arr.reshape(-1)
    if np.any((flat <= 0.0) | (flat >= 1.0)):
        raise ParameterError("kernel-side application is defined on the open interval (0, 1)")

    beta, lam = params.beta, params.lam
    taylor = [
        (poly.deriv(2 * k), math.factorial(2 * k), 2.0 * k - 1.0 - beta)
        for k in range(1, poly.degree() // 2 + 1)
    ]
    breakpoints = func.breakpoints
    far_sum = func.far_left + func.far_right
    out = np.empty(flat.shape)

    for start in range(0, flat.size, KERNEL_CHUNK):
        xc = flat[start : start + KERNEL_CHUNK]
        centre = np.asarray(poly(xc), dtype=np.float64)
        dist = np.sort(np.abs(xc[:, None] - breakpoints[None, :]), axis=1)

        inner = np.zeros(xc.shape)
        for deriv, fact, exponent in taylor:
            inner -= 2.0 * deriv(xc) / fact * power_exp_moment(lam, dist[:, 0], exponent)

        panels = graded_breakpoints(dist[:, :-1], dist[:, 1:], KERNEL_PANELS)
        t, w = composite_gauss_legendre(panels, KERNEL_ORDER)
        t = t.reshape(xc.size, -1)
        w = w.reshape(xc.size, -1)
        diff = 2.0 * centre[:, None] - func.evaluate(xc[:, None] + t) - func.evaluate(
            xc[:, None] - t
        )
        middle = np.sum(w * np.exp(-lam * t) * t ** (-1.0 - beta) * diff, axis=1)

        far = (2.0 * centre - far_sum) * tail_integral(lam, beta, dist[:, -1])
        out[start : start + KERNEL_CHUNK] = inner + middle + far

    return (c_beta(params) * out).reshape(x_arr.shape)


def _cell_rules(spec: BasisSpec) -> list[tuple[npt.NDArray[np.int64], FloatArray, FloatArray]]:
    """Per-cell Gauss-Legendre rules; the two end cells are graded towards 0 and 1."""
    h = spec.h
    cells = 2**spec.n
    edges = h * np.arange(cells + 1)
    inner_cells = np.arange(1, cells - 1)
    bp = np.stack([edges[1:-2], edges[2:-1]], axis=-1)
    x_in, w_in = composite_gauss_legendre(bp, LOAD_ORDER)

    graded = graded_breakpoints(h * 2.0**-BOUNDARY_GRADING, h, BOUNDARY_GRADING)
    left = np.concatenate(([0.0], graded))
    x_left, w_left = composite_gauss_legendre(left, LOAD_ORDER)
    x_end = np.stack([x_left, 1.0 - x_left[::-1]])
    w_end = np.stack([w_left, w_left[::-1]])
    return [(inner_cells, x_in, w_in), (np.array([0, cells - 1]), x_end, w_end)]


def _project_on_cells(spec: BasisSpec, func: Callable[[FloatArray], FloatArray]) -> FloatArray:
    """(f, phi_{n,j}) for all j by per-cell quadrature."""
    values = np.zeros(spec.dimension)
    scale = 2.0 ** (spec.n / 2.0)
    for cells, x, w in _cell_rules(spec):
        if cells.size == 0:
            continue
        fx = np.asarray(func(x.ravel()), dtype=np.float64).reshape(x.shape)
        if spec.r == 1:
            np.add.at(values, cells, scale * np.sum(w * fx, axis=1))
            continue
        local = x / spec.h - cells[:, None]
        rising = scale * np.sum(w * fx * local, axis=1)
        falling = scale * np.sum(w * fx * (1.0 - local), axis=1)
        up = cells <= spec.dimension - 1
        np.add.at(values, cells[up], rising[up])
        down = cells >= 1
        np.add.at(values, cells[down] - 1, falling[down])
    return values


def load_vector_fourier(
    params: OperatorParams,
    transform: Callable[[FloatArray], ComplexArray],
    spec: BasisSpec,
    indices: npt.ArrayLike | None = None,
) -> FloatArray:
    """Entries B(u, phi_{n,j}) = (1/pi) Re int_0^inf G F[u] conj(F[phi_{n,j}]) d xi.

    The frequency integral is cut at 1000 * 2^n; F[phi_{n,j}](xi) =
    2^{-n/2} e^{-i j h xi} F[M_r](h xi).

    Args:
        params: Operator parameters
        transform: Vectorized F[u]
        spec: Basis order and level
        indices: Shifts j to compute; all of I_n when omitted

    Returns:
        Entries for the requested indices
    """
    _check_admissible(params, spec)
    h = spec.h
    cutoff = FOURIER_LOAD_CUTOFF * 2.0**spec.n
    panels = int(math.ceil(cutoff / FOURIER_LOAD_PANEL))
    xi, w = composite_gauss_legendre(
        np.linspace(0.0, panels * FOURIER_LOAD_PANEL, panels + 1), FOURIER_LOAD_ORDER
    )
    common = (
        w
        * symbol_g(params, xi)
        * transform(xi)
        * np.sqrt(h)
        * np.conj(bspline_fourier(spec.r, h * xi))
    )
    js = np.arange(spec.dimension) if indices is None else np.asarray(indices, dtype=np.int64)
    if np.any((js < 0) | (js >= spec.dimension)):
        raise BasisIndexError(f"load indices outside 0..{spec.dimension - 1}")
    out = np.array([np.real(np.sum(common * np.exp(1j * j * h * xi))) for j in js])
    return out / math.pi


def load_vector(source: RHSSource, spec: BasisSpec) -> LoadVector:
    """Load vector (f, phi_{n,j}) for the given right-hand side.

    Constants are exact; pointwise and kernel-side sources use per-cell
    Gauss-Legendre quadrature graded into the end cells, where f may be
    singular; Fourier sources use load_vector_fourier.

    Args:
        source: Right-hand side description
        spec: Basis order and level

    Returns:
        LoadVector of length N
    """
    start = time.perf_counter()
    if isinstance(source, ConstantSource):
        values = np.full(spec.dimension, source.value * 2.0 ** (-spec.n / 2.0))
    elif isinstance(source, PointwiseSource):
        values = _project_on_cells(spec, source.func)
    elif isinstance(source, KernelSource):
        _check_admissible(source.params, spec)
        params, func = source.params, source.func
        values = _project_on_cells(spec, lambda x: apply_operator_kernel(params, func, x))
    else:
        values = load_vector_fourier(source.params, source.transform, spec)
    logger.debug(
        f"Load vector ({type(source).__name__}) N={spec.dimension} "
        f"in {time.perf_counter() - start:.3f}s"
    )
    return LoadVector(spec=spec, values=values)


def lifting_load(
    eta: ExtendedFunction,
    params: OperatorParams,
    spec: BasisSpec,
    method: Literal["kernel", "fourier"] = "kernel",
) -> LoadVector:
    """Entries B(eta, phi_{n,j}) of the lifting term moved to the right-hand side.

    The kernel path applies the operator to eta pointwise on Omega and projects;
    the Fourier path needs a closed-form transform of eta and an eta that
    vanishes at infinity.

    Args:
        eta: Lifting of the exterior data
        params: Operator parameters
        spec: Basis order and level
        method: "kernel" or "fourier"

    Returns:
        LoadVector of length N

    Raises:
        ProblemSpecError: If the lifting does not admit the chosen path or the
            result is not finite
    """
    if method == "fourier":
        if eta.transform is None:
            raise ProblemSpecError("Fourier lifting path needs a closed-form transform of eta")
        if eta.far_left != 0.0 or eta.far_right != 0.0:
            raise ProblemSpecError("Fourier lifting path needs eta to vanish at infinity")
        load = LoadVector(spec=spec, values=load_vector_fourier(params, eta.transform, spec))
    else:
        load = load_vector(KernelSource(params=params, func=eta), spec)

    if not np.all(np.isfinite(load.values)):
        raise ProblemSpecError(f"lifting term B(eta, phi) is not finite for {eta.note or 'eta'}")
    return load
