"""Quadrature rules and the singular integrals of the kernel e^{-lambda y} y^{-1-beta}."""

import logging
import math
from functools import lru_cache

import numpy as np
import numpy.typing as npt
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln, gamma, gammaincc

from .errors import ParameterError, QuadratureError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

EULER_GAMMA = 0.57721566490153286061

GAUSS_JACOBI_NODES = 32
MOMENT_SERIES_TOL = 1e-16
MOMENT_SERIES_MAX_TERMS = 200
TAIL_SERIES_LIMIT = 2.0
E1_SERIES_LIMIT = 6.0


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[FloatArray, FloatArray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


@lru_cache(maxsize=256)
def gauss_jacobi(n: int, alpha: float, beta: float) -> tuple[FloatArray, FloatArray]:
    """Compute n-point Gauss-Jacobi nodes and weights on [-1, 1].

    Uses the Golub-Welsch algorithm: the symmetric tridiagonal Jacobi matrix is
    built from the three-term recurrence of the monic Jacobi polynomials, its
    eigenvalues are the nodes and the first eigenvector components give the
    weights.

    Weight function: w(x) = (1-x)^alpha * (1+x)^beta.

    Args:
        n: Number of nodes
        alpha: Exponent on (1-x), > -1
        beta: Exponent on (1+x), > -1

    Returns:
        (nodes, weights) arrays of shape (n,)

    Raises:
        ParameterError: If an exponent is not above -1
    """
    if alpha <= -1.0 or beta <= -1.0:
        raise ParameterError(f"Jacobi exponents must exceed -1, got ({alpha}, {beta})")

    i = np.arange(n, dtype=np.float64)
    ab = alpha + beta

    denom = (2 * i + ab) * (2 * i + ab + 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = np.where(denom == 0, 0.0, (beta**2 - alpha**2) / denom)
    # i = 0 when alpha + beta = 0 needs the unreduced form
    diag[0] = (beta - alpha) / (ab + 2)

    j = np.arange(1, n, dtype=np.float64)
    s = 2 * j + ab
    off = 4 * j * (j + alpha) * (j + beta) * (j + ab) / (s**2 * (s**2 - 1))
    off_diag = np.sqrt(off)

    nodes, vecs = eigh_tridiagonal(diag, off_diag)
    mu0 = math.exp((ab + 1) * math.log(2.0) + betaln(alpha + 1, beta + 1))
    weights = mu0 * vecs[0, :] ** 2
    return nodes, weights


def composite_gauss_legendre(
    breakpoints: npt.ArrayLike, order: int
) -> tuple[FloatArray, FloatArray]:
    """Nodes and weights of a composite Gauss-Legendre rule.

    Args:
        breakpoints: Array (..., P + 1) of panel ends, ascending along the last axis
        order: Nodes per panel

    Returns:
        (nodes, weights), both of shape (..., P * order)
    """
    bp = np.asarray(breakpoints, dtype=np.float64)
    ref_nodes, ref_weights = gauss_legendre(order)
    left = bp[..., :-1, None]
    half = 0.5 * (bp[..., 1:, None] - left)
    nodes = left + half * (ref_nodes + 1.0)
    weights = half * ref_weights
    shape = bp.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def graded_breakpoints(a: npt.ArrayLike, b: npt.ArrayLike, panels: int) -> FloatArray:
    """Panel ends between a and b, geometric when 0 < a, uniform when a == 0.

    Args:
        a: Left ends, any shape
        b: Right ends, same shape as a, b >= a
        panels: Number of panels

    Returns:
        Array of shape a.shape + (panels + 1,)
    """
    a_arr = np.asarray(a, dtype=np.float64)[..., None]
    b_arr = np.asarray(b, dtype=np.float64)[..., None]
    u = np.linspace(0.0, 1.0, panels + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(a_arr > 0, b_arr / np.where(a_arr > 0, a_arr, 1.0), 1.0)
        geometric = a_arr * ratio**u
    uniform = a_arr + (b_arr - a_arr) * u
    return np.where(a_arr > 0, geometric, uniform)


def power_exp_moment(lam: float, h: npt.ArrayLike, exponent: float) -> FloatArray:
    """Compute int_0^h e^{-lam y} y^exponent dy for exponent > -1.

    The integral is unrolled by K partial integrations into a positive series
    plus a remainder lam^K / prod(exponent + i) * int_0^h e^{-lam y} y^{exponent+K} dy;
    the remainder is evaluated by Gauss-Jacobi quadrature with weight
    (1+eta)^{exponent+K} after mapping [0, h] to [-1, 1].

    Args:
        lam: Tempering rate, >= 0
        h: Upper limits, any shape, >= 0
        exponent: Power of y, > -1

    Returns:
        Moments with the shape of h

    Raises:
        ParameterError: If exponent <= -1 or lam < 0
        QuadratureError: If the series would need more than the allowed terms
    """
    if exponent <= -1.0:
        raise ParameterError(f"moment exponent must exceed -1, got {exponent}")
    if lam < 0.0:
        raise ParameterError(f"lambda must be non-negative, got {lam}")

    h_arr = np.asarray(h, dtype=np.float64)
    a1 = exponent + 1.0
    plain = h_arr**a1 / a1
    if lam == 0.0:
        return plain

    mu_max = float(lam * np.max(h_arr, initial=0.0))
    if mu_max == 0.0:
        return plain

    # smallest K >= 4 with a negligible remainder weight
    weight = 1.0
    terms = 0
    while True:
        terms += 1
        weight *= mu_max / (exponent + 1.0 + terms)
        if terms >= 4 and weight < MOMENT_SERIES_TOL:
            break
        if terms >= MOMENT_SERIES_MAX_TERMS:
            raise QuadratureError(
                f"moment series did not converge for lambda*h={mu_max:g}",
                integral="regularized_moment",
            )

    decay = np.exp(-lam * h_arr)
    term = decay * h_arr**a1 / a1
    total = term.copy()
    coeff = lam / a1
    for k in range(1, terms):
        term = term * (lam * h_arr) / (a1 + k)
        total += term
        coeff *= lam / (a1 + k)

    eta, w = gauss_jacobi(GAUSS_JACOBI_NODES, 0.0, exponent + terms)
    half = 0.5 * h_arr[..., None]
    remainder = half[..., 0] ** (a1 + terms) * np.sum(
        w * np.exp(-lam * half * (1.0 + eta)), axis=-1
    )
    return total + coeff * remainder


def regularized_moment(lam: float, beta: float, h: npt.ArrayLike, k: int) -> FloatArray:
    """Compute int_0^h e^{-lam y} y^{k - beta} dy.

    Args:
        lam: Tempering rate, >= 0
        beta: Operator order
        h: Upper limits, any shape
        k: Integer power, with k - beta > -1

    Returns:
        Moments with the shape of h
    """
    return power_exp_moment(lam, h, k - beta)


def exp_integral_e1(x: npt.ArrayLike) -> FloatArray:
    """Exponential integral E1(x) = int_x^inf e^{-t}/t dt for x > 0.

    Series -gamma - ln x - sum (-x)^k / (k k!) for x <= 6, continued fraction
    (modified Lentz) above.

    Raises:
        ParameterError: If any x <= 0
    """
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any(x_arr <= 0.0):
        raise ParameterError("E1 is defined for x > 0 only")
    out = np.vectorize(_e1_scalar, otypes=[np.float64])(x_arr)
    return np.asarray(out, dtype=np.float64)


def _e1_scalar(x: float) -> float:
    if x <= E1_SERIES_LIMIT:
        total = 0.0
        term = 1.0
        for k in range(1, 200):
            term *= -x / k
            contribution = term / k
            total += contribution
            if abs(contribution) < 1e-17 * max(abs(total), 1e-300):
                break
        return -EULER_GAMMA - math.log(x) - total

    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h * math.exp(-x)
    raise QuadratureError(f"E1 continued fraction did not converge at x={x:g}", integral="E1")


def gamma_negative(beta: float) -> float:
    """Gamma(-beta) for 0 < beta < 2, beta != 1, by the reflection formula."""
    return -math.pi / (math.sin(math.pi * beta) * float(gamma(1.0 + beta)))


def tail_integral(lam: float, beta: float, a: npt.ArrayLike) -> FloatArray:
    """Compute int_a^inf e^{-lam y} y^{-1-beta} dy for a > 0.

    lam = 0 is exact; beta = 1 goes through E1; otherwise two partial
    integrations reduce the tail to the finite moment int_0^a e^{-lam y} y^{1-beta} dy
    and the constant lam^beta Gamma(-beta). Far tails (lam * a beyond a small
    threshold) use the upper incomplete gamma function instead.

    Args:
        lam: Tempering rate, >= 0
        beta: Operator order, 0 < beta < 2
        a: Lower limits, any shape, > 0

    Returns:
        Tail integrals with the shape of a
    """
    a_arr = np.asarray(a, dtype=np.float64)
    if np.any(a_arr <= 0.0):
        raise ParameterError("tail integral needs a > 0")
    if lam == 0.0:
        return a_arr**-beta / beta
    if beta == 1.0:
        return np.exp(-lam * a_arr) / a_arr - lam * exp_integral_e1(lam * a_arr)

    x = lam * a_arr
    near = x <= TAIL_SERIES_LIMIT
    out = np.empty_like(a_arr)

    if np.any(near):
        an = a_arr[near]
        decay = np.exp(-lam * an)
        m1 = power_exp_moment(lam, an, 1.0 - beta)
        out[near] = (
            decay * an**-beta / beta
            + lam * decay * an ** (1.0 - beta) / (beta * (1.0 - beta))
            + lam**beta * gamma_negative(beta)
            + lam**2 * m1 / (beta * (1.0 - beta))
        )
    if np.any(~near):
        out[~near] = lam**beta * _upper_gamma_negative(beta, x[~near])
    return out


def _upper_gamma_negative(beta: float, x: FloatArray) -> FloatArray:
    """Upper incomplete gamma Gamma(-beta, x) by downward recurrence."""
    if beta < 1.0:
        g1 = gammaincc(1.0 - beta, x) * gamma(1.0 - beta)
    else:
        g2 = gammaincc(2.0 - beta, x) * gamma(2.0 - beta)
        g1 = (g2 - x ** (1.0 - beta) * np.exp(-x)) / (1.0 - beta)
    return np.asarray((x**-beta * np.exp(-x) - g1) / beta, dtype=np.float64)
