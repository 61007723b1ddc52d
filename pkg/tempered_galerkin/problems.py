"""Experiments: closed-form solutions, exterior data, liftings and the end-to-end solve."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import TypeVar

import numpy as np
import numpy.typing as npt
from scipy.special import gamma, wofz

from .assembly import (
    ConstantSource,
    FourierSource,
    KernelSource,
    PointwiseSource,
    RHSSource,
    apply_operator_kernel,
    assemble_first_row,
    lifting_load,
    load_vector,
)
from .basis import expand_single_scale
from .cache import FirstRowCache
from .errors import ProblemSpecError
from .functions import ExtendedFunction, ExteriorPiece
from .linsolve import solve_system
from .models.operator import BasisSpec, OperatorParams
from .models.problem import (
    ConstantRHS,
    ExplicitRHS,
    LiftingSpec,
    ManufacturedRHS,
    NamedExterior,
    ProblemSpec,
)
from .models.report import SolveMethod, SolveReport
from .symbol import c_beta, fourier_of_cubic

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]
Evaluator = Callable[[FloatArray], FloatArray]
Transform = Callable[[FloatArray], ComplexArray]
T = TypeVar("T")

GAUSS_SUPPORT_RADIUS = 7.0


def example1_rhs(params: OperatorParams, x: npt.ArrayLike) -> FloatArray:
    """f on Omega whose solution is x^2 (1 - x) on Omega and zero outside.

    lambda = 0 uses the closed forms (a logarithmic one at beta = 1); lambda > 0
    applies the operator on the kernel side.

    Args:
        params: Operator parameters
        x: Points in (0, 1)

    Returns:
        Values with the shape of x
    """
    xa = np.asarray(x, dtype=np.float64)
    if params.tempered:
        return apply_operator_kernel(params, cubic_solution(), xa)

    beta = params.beta
    y = 1.0 - xa
    if beta == 1.0:
        return (3.0 * xa - 0.5 + (3.0 * xa**2 - 2.0 * xa) * np.log(y / xa)) / math.pi

    scale = -c_beta(params) * float(gamma(-beta)) / float(gamma(4.0 - beta))
    return scale * (
        2.0 * (3.0 - beta) * xa ** (2.0 - beta)
        - 6.0 * xa ** (3.0 - beta)
        + 6.0 * y ** (3.0 - beta)
        - 4.0 * (3.0 - beta) * y ** (2.0 - beta)
        + (3.0 - beta) * (2.0 - beta) * y ** (1.0 - beta)
    )


def example2_exact(beta: float, x: npt.ArrayLike) -> FloatArray:
    """(x - x^2)^{beta/2} / Gamma(1 + beta) on [0, 1], zero elsewhere (lambda = 0)."""
    xa = np.asarray(x, dtype=np.float64)
    inside = (xa > 0.0) & (xa < 1.0)
    base = np.where(inside, xa - xa**2, 0.0)
    return np.where(inside, base ** (beta / 2.0) / float(gamma(1.0 + beta)), 0.0)


def s1_coefficients(g0: float, g1: float) -> FloatArray:
    """Ascending coefficients of the linear interpolant of g(0), g(1)."""
    return np.array([g0, g1 - g0])


def s3_coefficients(g0: float, dg0: float, g1: float, dg1: float) -> FloatArray:
    """Ascending coefficients of the cubic Hermite interpolant of g and g' at 0 and 1."""
    return (
        g0 * np.array([1.0, 0.0, -3.0, 2.0])
        + dg0 * np.array([0.0, 1.0, -2.0, 1.0])
        + g1 * np.array([0.0, 0.0, 3.0, -2.0])
        + dg1 * np.array([0.0, 0.0, -1.0, 1.0])
    )


def lifting_S1(g0: float, g1: float, x: npt.ArrayLike) -> FloatArray:  # noqa: N802
    """S1(x) = g(0)(1 - x) + g(1) x."""
    return np.asarray(np.polynomial.Polynomial(s1_coefficients(g0, g1))(x), dtype=np.float64)


def lifting_S3(  # noqa: N802
    g0: float, dg0: float, g1: float, dg1: float, x: npt.ArrayLike
) -> FloatArray:
    """Cubic Hermite S3 with S3(0) = g(0), S3'(0) = g'(0), S3(1) = g(1), S3'(1) = g'(1)."""
    coeffs = s3_coefficients(g0, dg0, g1, dg1)
    return np.asarray(np.polynomial.Polynomial(coeffs)(x), dtype=np.float64)


@dataclass(frozen=True)
class ExteriorData:
    """Exterior data g with the one-sided endpoint values the liftings need."""

    pieces: tuple[ExteriorPiece, ...]
    far_left: float
    far_right: float
    g0: float
    dg0: float
    g1: float
    dg1: float
    transform: Transform | None = None
    note: str = ""


def _gaussian(x: FloatArray) -> FloatArray:
    return np.exp(-(x**2))


def _gaussian_transform(xi: FloatArray) -> ComplexArray:
    return np.sqrt(np.pi) * np.exp(-(xi**2) / 4.0) + 0j


def _gaussian_on_unit_interval_transform(xi: FloatArray) -> ComplexArray:
    """int_0^1 e^{-x^2} e^{-i x xi} dx through the Faddeeva function."""
    half = -0.5 * np.asarray(xi, dtype=np.float64)
    return (
        0.5 * np.sqrt(np.pi) * (wofz(half + 0j) - np.exp(-1.0 - 1j * xi) * wofz(half + 1j))
    )


def _gaussian_exterior_transform(xi: FloatArray) -> ComplexArray:
    return _gaussian_transform(xi) - _gaussian_on_unit_interval_transform(xi)


def _linear_piece_transform(
    lo: float, length: float, coeffs: list[float], xi: FloatArray
) -> ComplexArray:
    """int_lo^{lo+length} p(x) e^{-i x xi} dx with p(lo + length t) = coeffs[0] + coeffs[1] t."""
    w = np.asarray(xi, dtype=np.float64)
    return length * np.exp(-1j * lo * w) * fourier_of_cubic(coeffs, length * w)


def _tent_exterior_transform(xi: FloatArray) -> ComplexArray:
    return _linear_piece_transform(-0.5, 0.5, [1.0, -1.0], xi) + _linear_piece_transform(
        1.0, 0.5, [0.0, 1.0], xi
    )


def gauss_exterior() -> ExteriorData:
    """g = e^{-x^2}, truncated at |x| = 7 where it drops below 1e-21."""
    radius = GAUSS_SUPPORT_RADIUS
    e1 = math.exp(-1.0)
    return ExteriorData(
        pieces=(ExteriorPiece(-radius, 0.0, _gaussian), ExteriorPiece(1.0, radius, _gaussian)),
        far_left=0.0,
        far_right=0.0,
        g0=1.0,
        dg0=0.0,
        g1=e1,
        dg1=-2.0 * e1,
        transform=_gaussian_exterior_transform,
        note=f"Gaussian exterior data truncated to [-{radius:g}, {radius:g}]",
    )


def tent_exterior() -> ExteriorData:
    """g = -2x on [-1/2, 0], 2x - 2 on [1, 3/2], zero elsewhere."""
    return ExteriorData(
        pieces=(
            ExteriorPiece(-0.5, 0.0, lambda x: -2.0 * x),
            ExteriorPiece(1.0, 1.5, lambda x: 2.0 * x - 2.0),
        ),
        far_left=0.0,
        far_right=0.0,
        g0=0.0,
        dg0=-2.0,
        g1=0.0,
        dg1=2.0,
        transform=_tent_exterior_transform,
    )


def one_exterior() -> ExteriorData:
    """g = 1."""
    return ExteriorData(pieces=(), far_left=1.0, far_right=1.0, g0=1.0, dg0=0.0, g1=1.0, dg1=0.0)


def cubic_solution() -> ExtendedFunction:
    """x^2 (1 - x) on Omega, zero outside."""
    coeffs = [0.0, 0.0, 1.0, -1.0]
    return ExtendedFunction.from_polynomial(
        coeffs, transform=lambda xi: fourier_of_cubic(coeffs, xi), note="x^2(1-x)"
    )


def gauss_solution() -> ExtendedFunction:
    """e^{-x^2} on R."""
    data = gauss_exterior()
    return ExtendedFunction(
        interior=_gaussian,
        exterior=data.pieces,
        transform=_gaussian_transform,
        note="e^{-x^2}",
    )


def tent_solution() -> ExtendedFunction:
    """(x - x^2)^2 on Omega continued by the tent exterior data."""
    data = tent_exterior()
    return ExtendedFunction.from_polynomial([0.0, 0.0, 1.0, -2.0, 1.0], exterior=data.pieces)


def one_solution() -> ExtendedFunction:
    """The constant 1 on R."""
    return ExtendedFunction.from_polynomial([1.0], far_left=1.0, far_right=1.0, note="1")


_SOLUTIONS: dict[str, Callable[[], ExtendedFunction]] = {
    "cubic": cubic_solution,
    "gauss": gauss_solution,
    "tent_quartic": tent_solution,
    "one": one_solution,
}

_EXTERIORS: dict[str, Callable[[], ExteriorData]] = {
    "gauss_exterior": gauss_exterior,
    "tent_exterior": tent_exterior,
    "one": one_exterior,
}

_CUSTOM_INTERIORS: dict[str, list[float]] = {
    "zero": [0.0],
}

_EXPLICIT_RHS: dict[str, Callable[[OperatorParams, FloatArray], FloatArray]] = {
    "example1_closed_form": example1_rhs,
}


def _lookup(registry: dict[str, T], name: str, what: str) -> T:
    item = registry.get(name)
    if item is None:
        supported = ", ".join(registry.keys())
        raise ProblemSpecError(f"Unknown {what}: {name}. Supported: {supported}")
    return item


def build_lifting(lifting: LiftingSpec, data: ExteriorData) -> ExtendedFunction:
    """Lifting eta: the chosen interior polynomial continued by the exterior data."""
    if lifting.kind == "S1":
        coeffs = s1_coefficients(data.g0, data.g1)
    elif lifting.kind == "S3":
        coeffs = s3_coefficients(data.g0, data.dg0, data.g1, data.dg1)
    elif lifting.kind == "custom" and lifting.interior is not None:
        coeffs = np.array(_lookup(_CUSTOM_INTERIORS, lifting.interior, "lifting interior"))
    else:
        raise ProblemSpecError(f"lifting '{lifting.kind}' needs no exterior data")

    transform: Transform | None = None
    exterior_transform = data.transform
    if exterior_transform is not None and coeffs.size <= 4:
        interior = coeffs.copy()

        def combined(xi: FloatArray) -> ComplexArray:
            return fourier_of_cubic(interior, xi) + exterior_transform(xi)

        transform = combined

    return ExtendedFunction.from_polynomial(
        coeffs,
        exterior=data.pieces,
        far_left=data.far_left,
        far_right=data.far_right,
        transform=transform,
        note=f"{lifting.kind} lifting",
    )


@dataclass(frozen=True)
class ResolvedProblem:
    """Numerical ingredients of a ProblemSpec."""

    spec: ProblemSpec
    source: RHSSource
    lifting: ExtendedFunction | None
    exact: Evaluator | None
    notes: tuple[str, ...] = ()


def _manufactured_source(params: OperatorParams, u: ExtendedFunction) -> RHSSource:
    if u.interior_poly is not None:
        return KernelSource(params=params, func=u)
    transform = u.transform
    if transform is None:
        raise ProblemSpecError(f"solution {u.note!r} has neither a polynomial part nor a transform")
    return FourierSource(params=params, transform=transform)


def _exact_evaluator(name: str, params: OperatorParams) -> Evaluator:
    if name == "example2":
        if params.tempered:
            raise ProblemSpecError("the exact solution of example2 is known for lambda = 0 only")
        beta = params.beta
        return lambda x: example2_exact(beta, x)
    return _lookup(_SOLUTIONS, name, "exact solution")().evaluate


def resolve_problem(prob: ProblemSpec) -> ResolvedProblem:
    """Turn registered names into sources, liftings and evaluators.

    Raises:
        ProblemSpecError: If a name is unknown or the pieces are inconsistent
    """
    params = prob.params
    notes: list[str] = []
    source: RHSSource
    rhs = prob.rhs
    if isinstance(rhs, ConstantRHS):
        source = ConstantSource(value=rhs.value)
    elif isinstance(rhs, ExplicitRHS):
        func = _lookup(_EXPLICIT_RHS, rhs.name, "right-hand side")
        source = PointwiseSource(func=lambda x: func(params, x))
    else:
        u = _lookup(_SOLUTIONS, rhs.solution, "solution")()
        if prob.exterior.kind == "zero" and not u.vanishes_outside:
            raise ProblemSpecError(
                f"solution {rhs.solution!r} does not vanish outside Omega but the exterior is zero"
            )
        source = _manufactured_source(params, u)

    lifting = None
    if isinstance(prob.exterior, NamedExterior):
        data = _lookup(_EXTERIORS, prob.exterior.name, "exterior data")()
        lifting = build_lifting(prob.lifting, data)
        if data.note:
            notes.append(data.note)

    exact = _exact_evaluator(prob.exact, params) if prob.exact is not None else None
    return ResolvedProblem(
        spec=prob, source=source, lifting=lifting, exact=exact, notes=tuple(notes)
    )


@dataclass(frozen=True)
class DiscreteSolution:
    """p_n = sum_j d_j phi_{n,j} + eta."""

    spec: BasisSpec
    coeffs: FloatArray
    lifting: ExtendedFunction | None = None

    def homogeneous_part(self, x: npt.ArrayLike) -> FloatArray:
        """sum_j d_j phi_{n,j}(x), zero outside [0, 1]."""
        return expand_single_scale(self.spec, self.coeffs, x)

    def evaluate(self, x: npt.ArrayLike) -> FloatArray:
        """p_n(x); equals eta(x) outside [0, 1]."""
        values = self.homogeneous_part(x)
        if self.lifting is not None:
            values = values + self.lifting.evaluate(x)
        return values

    def __call__(self, x: npt.ArrayLike) -> FloatArray:
        return self.evaluate(x)


def solve_problem(
    prob: ProblemSpec | ResolvedProblem,
    spec: BasisSpec,
    method: SolveMethod = "pcg",
    tol: float = 1e-9,
    max_iter: int | None = None,
    cache: FirstRowCache | None = None,
) -> tuple[DiscreteSolution, SolveReport]:
    """Assemble and solve B(u_n, v) = (f, v) - B(eta, v) on V_n.

    Args:
        prob: Problem specification, or one already resolved
        spec: Basis order and level
        method: Linear solver
        tol: Relative residual tolerance of the iterative solvers
        max_iter: Iteration limit, 20 N when omitted
        cache: Optional on-disk first-row cache

    Returns:
        (discrete solution, solver report)

    Raises:
        ParameterError: If r = 1 and beta >= 1
        ProblemSpecError: If the problem is inconsistent
    """
    resolved = prob if isinstance(prob, ResolvedProblem) else resolve_problem(prob)
    params = resolved.spec.params
    stiffness = assemble_first_row(params, spec, cache)
    load = load_vector(resolved.source, spec)
    if resolved.lifting is not None:
        load = load - lifting_load(resolved.lifting, params, spec)

    coeffs, report = solve_system(stiffness, load.values, method, tol=tol, max_iter=max_iter)
    logger.info(
        f"{resolved.spec.name}: r={spec.r} n={spec.n} {params.label()} "
        f"{method} iterations={report.iterations} time={report.wall_time:.3f}s"
    )
    return DiscreteSolution(spec=spec, coeffs=coeffs, lifting=resolved.lifting), report


def _example1(params: OperatorParams) -> ProblemSpec:
    rhs = (
        ManufacturedRHS(solution="cubic")
        if params.tempered
        else ExplicitRHS(name="example1_closed_form")
    )
    return ProblemSpec(name="example1", params=params, rhs=rhs, exact="cubic")


def _example2(params: OperatorParams) -> ProblemSpec:
    return ProblemSpec(
        name="example2",
        params=params,
        rhs=ConstantRHS(value=1.0),
        exact=None if params.tempered else "example2",
    )


def _example3_gauss(params: OperatorParams) -> ProblemSpec:
    return ProblemSpec(
        name="example3_gauss",
        params=params,
        rhs=ManufacturedRHS(solution="gauss"),
        exterior=NamedExterior(name="gauss_exterior"),
        lifting=LiftingSpec(kind="S1"),
        exact="gauss",
    )


def _example3_tent(lifting: LiftingSpec, name: str) -> Callable[[OperatorParams], ProblemSpec]:
    def build(params: OperatorParams) -> ProblemSpec:
        return ProblemSpec(
            name=name,
            params=params,
            rhs=ManufacturedRHS(solution="tent_quartic"),
            exterior=NamedExterior(name="tent_exterior"),
            lifting=lifting,
            exact="tent_quartic",
        )

    return build


def _constant_one(params: OperatorParams) -> ProblemSpec:
    return ProblemSpec(
        name="constant_one",
        params=params,
        rhs=ConstantRHS(value=0.0),
        exterior=NamedExterior(name="one"),
        lifting=LiftingSpec(kind="S1"),
        exact="one",
    )


_PROBLEMS: dict[str, Callable[[OperatorParams], ProblemSpec]] = {
    "example1": _example1,
    "example2": _example2,
    "example3_gauss": _example3_gauss,
    "example3_tent_s3": _example3_tent(LiftingSpec(kind="S3"), "example3_tent_s3"),
    "example3_tent_s2": _example3_tent(
        LiftingSpec(kind="custom", interior="zero"), "example3_tent_s2"
    ),
    "constant_one": _constant_one,
}


def problem_names() -> list[str]:
    """Registered problem identifiers."""
    return list(_PROBLEMS.keys())


def get_problem(name: str, params: OperatorParams) -> ProblemSpec:
    """Get a registered problem for the given operator parameters.

    Args:
        name: Problem identifier (e.g., 'example1', 'example3_tent_s3')
        params: Operator parameters

    Returns:
        ProblemSpec instance

    Raises:
        ProblemSpecError: If the name is not registered
    """
    return _lookup(_PROBLEMS, name.lower(), "problem")(params)
