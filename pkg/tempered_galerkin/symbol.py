"""Analytic layer of the operator: constant c_beta, Fourier symbol and FFT application."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.special import binom, gamma

from .errors import DimensionError, ParameterError
from .models.operator import OperatorParams
from .quadrature import composite_gauss_legendre

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

SMALL_RATIO = 1e-4
SUPPORT_TOL = 1e-12
DEFAULT_PAD_FACTOR = 4
DEFAULT_INTERVAL = (-1.0, 2.0)
POINTWISE_CHUNK = 1024


def _check(params: OperatorParams) -> None:
    # models are validated on construction; model_construct bypasses it
    if not 0.0 < params.beta < 2.0 or params.lam < 0.0:
        raise ParameterError(f"inadmissible operator parameters {params.label()}")


def c_beta(params: OperatorParams) -> float:
    """Normalization constant c_beta of the kernel e^{-lambda|y|}|y|^{-1-beta}.

    Args:
        params: Operator parameters

    Returns:
        c_beta > 0

    Raises:
        ParameterError: If beta or lambda is inadmissible
    """
    _check(params)
    beta = params.beta
    if params.lam == 0.0 or beta == 1.0:
        return float(
            beta
            * gamma((1.0 + beta) / 2.0)
            / (2.0 ** (1.0 - beta) * math.sqrt(math.pi) * gamma(1.0 - beta / 2.0))
        )
    abs_gamma_neg = math.pi / (abs(math.sin(math.pi * beta)) * float(gamma(1.0 + beta)))
    return 1.0 / (2.0 * abs_gamma_neg)


def c_beta_sine_form(beta: float) -> float:
    """Equivalent form (1/pi) Gamma(1+beta) sin(beta pi / 2) of the untempered constant."""
    return float(gamma(1.0 + beta)) * math.sin(beta * math.pi / 2.0) / math.pi


def symbol_g(params: OperatorParams, xi: npt.ArrayLike) -> FloatArray:
    """Fourier multiplier G(lambda, xi, beta).

    F[(Delta + lambda)^{beta/2} w](xi) = -G(lambda, xi, beta) F[w](xi); G is even in
    xi, nonnegative and vanishes at xi = 0 for lambda > 0.

    Args:
        params: Operator parameters
        xi: Frequencies, any shape

    Returns:
        Symbol values with the shape of xi
    """
    _check(params)
    beta, lam = params.beta, params.lam
    k = np.abs(np.asarray(xi, dtype=np.float64))
    if lam == 0.0:
        return k**beta

    t = k / lam
    small = t < SMALL_RATIO
    out = np.empty_like(k)

    if beta == 1.0:
        big = ~small
        kb = k[big]
        out[big] = (2.0 / math.pi) * (
            kb * np.arctan(t[big]) - 0.5 * lam * np.log(lam**2 + kb**2) + lam * math.log(lam)
        )
        ts = t[small]
        out[small] = (2.0 / math.pi) * lam * (ts**2 / 2.0 - ts**4 / 12.0 + ts**6 / 30.0)
        return out

    sign = -1.0 if beta > 1.0 else 1.0
    big = ~small
    out[big] = sign * (
        (lam**2 + k[big] ** 2) ** (beta / 2.0) * np.cos(beta * np.arctan(t[big])) - lam**beta
    )
    # Re (1 + i t)^beta - 1 expanded in t
    ts2 = t[small] ** 2
    series = -binom(beta, 2) * ts2 + binom(beta, 4) * ts2**2 - binom(beta, 6) * ts2**3
    out[small] = sign * lam**beta * series
    return out


def kernel_symbol(params: OperatorParams, xi: npt.ArrayLike) -> FloatArray:
    """Symbol of the bare kernel, G / c_beta; continuous in beta at 1 and in lambda at 0."""
    return symbol_g(params, xi) / c_beta(params)


@dataclass(frozen=True)
class SampledFunction:
    """Samples of a function on a uniform grid."""

    grid: FloatArray
    values: FloatArray

    def __post_init__(self) -> None:
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise DimensionError("grid and values must be 1-D arrays of equal length")
        if self.grid.size > 2:
            steps = np.diff(self.grid)
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise DimensionError("grid spacing must be constant")

    @property
    def spacing(self) -> float:
        """Grid step."""
        return float(self.grid[1] - self.grid[0])

    @classmethod
    def from_callable(
        cls,
        func: Callable[[FloatArray], FloatArray],
        points: int,
        interval: tuple[float, float] = DEFAULT_INTERVAL,
    ) -> "SampledFunction":
        """Sample func on `points` equispaced abscissae of the half-open interval."""
        lo, hi = interval
        grid = lo + (hi - lo) * np.arange(points) / points
        return cls(grid=grid, values=np.asarray(func(grid), dtype=np.float64))


def check_support(values: FloatArray, what: str) -> bool:
    """Warn when boundary samples are not negligible against the maximum."""
    scale = float(np.max(np.abs(values), initial=0.0))
    edge = max(abs(float(values[0])), abs(float(values[-1])))
    if scale > 0.0 and edge > SUPPORT_TOL * scale:
        logger.warning(
            f"{what}: boundary samples reach {edge / scale:.2e} of the maximum; "
            "support is not well inside the grid"
        )
        return False
    return True


def apply_operator_fourier(
    params: OperatorParams, w: SampledFunction, pad_factor: int = DEFAULT_PAD_FACTOR
) -> SampledFunction:
    """Samples of -(Delta + lambda)^{beta/2} w by FFT, multiplication by G, inverse FFT.

    Args:
        params: Operator parameters
        w: Samples of a function with support well inside the grid
        pad_factor: Zero padding factor; the padded length is rounded up to a power of two

    Returns:
        Samples on the same grid
    """
    if pad_factor < 1:
        raise ParameterError(f"pad_factor must be positive, got {pad_factor}")
    check_support(w.values, "apply_operator_fourier")
    m = w.values.size
    size = 1 << int(math.ceil(math.log2(pad_factor * m)))
    xi = 2.0 * math.pi * np.fft.rfftfreq(size, d=w.spacing)
    spectrum = np.fft.rfft(w.values, n=size)
    values = np.fft.irfft(symbol_g(params, xi) * spectrum, n=size)[:m]
    return SampledFunction(grid=w.grid, values=values)


def fourier_of_cubic(coeffs: npt.ArrayLike, xi: npt.ArrayLike) -> ComplexArray:
    """Exact int_0^1 (c0 + c1 x + c2 x^2 + c3 x^3) e^{-i x xi} dx.

    Args:
        coeffs: Up to four polynomial coefficients, ascending powers
        xi: Frequencies, any shape

    Returns:
        Complex transform values with the shape of xi
    """
    c = np.zeros(4)
    given = np.asarray(coeffs, dtype=np.float64)
    c[: given.size] = given
    poly = np.polynomial.Polynomial(c)
    w = np.asarray(xi, dtype=np.float64)
    out = np.empty(w.shape, dtype=np.complex128)

    small = np.abs(w) < 1e-3
    if np.any(small):
        ws = w[small]
        acc = np.zeros(ws.shape, dtype=np.complex128)
        factor = np.ones(ws.shape, dtype=np.complex128)
        for m in range(10):
            moment = sum(c[q] / (m + q + 1) for q in range(4))
            acc += factor * moment
            factor = factor * (-1j * ws) / (m + 1)
        out[small] = acc

    big = ~small
    if np.any(big):
        wb = w[big]
        iw = 1j * wb
        phase = np.exp(-iw)
        acc = np.zeros(wb.shape, dtype=np.complex128)
        deriv = poly
        power = iw
        for _ in range(4):
            acc += (deriv(0.0) - deriv(1.0) * phase) / power
            deriv = deriv.deriv()
            power = power * iw
        out[big] = acc
    return out


def apply_operator_fourier_pointwise(
    params: OperatorParams,
    transform: Callable[[FloatArray], ComplexArray],
    x: npt.ArrayLike,
    xi_max: float,
    panel_width: float = 0.5,
    order: int = 16,
) -> FloatArray:
    """Pointwise -(Delta + lambda)^{beta/2} w from a closed-form transform of w.

    Evaluates (1/pi) Re int_0^xi_max G(xi) F[w](xi) e^{i x xi} d xi by composite
    Gauss-Legendre quadrature; xi_max must cut the transform at negligible size.

    Args:
        params: Operator parameters
        transform: Vectorized F[w]
        x: Evaluation points
        xi_max: Frequency cut-off
        panel_width: Width of the quadrature panels
        order: Nodes per panel

    Returns:
        Values with the shape of x
    """
    panels = max(1, int(math.ceil(xi_max / panel_width)))
    nodes, weights = composite_gauss_legendre(np.linspace(0.0, xi_max, panels + 1), order)
    density = weights * symbol_g(params, nodes) * transform(nodes)
    x_arr = np.asarray(x, dtype=np.float64)
    flat = x_arr.reshape(-1)
    out = np.empty(flat.shape, dtype=np.float64)
    for start in range(0, flat.size, POINTWISE_CHUNK):
        chunk = flat[start : start + POINTWISE_CHUNK]
        phase = np.exp(1j * np.multiply.outer(chunk, nodes))
        out[start : start + POINTWISE_CHUNK] = np.real(phase @ density) / math.pi
    return out.reshape(x_arr.shape)
