"""Functions on the real line given piecewise: a part on Omega = (0, 1) and exterior data."""

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]
RealFunction = Callable[[FloatArray], FloatArray]


@dataclass(frozen=True)
class ExteriorPiece:
    """Exterior data g on the interval [lo, hi] outside Omega."""

    lo: float
    hi: float
    func: RealFunction


@dataclass(frozen=True)
class ExtendedFunction:
    """A function on R: `interior` on Omega, exterior pieces, constants far away.

    Outside Omega and outside every exterior piece the function equals
    `far_left` (x < 0) or `far_right` (x > 1). When the restriction to Omega is a
    polynomial, `interior_poly` holds it; kernel-side operator application needs it.
    """

    interior: RealFunction
    interior_poly: np.polynomial.Polynomial | None = None
    exterior: tuple[ExteriorPiece, ...] = ()
    far_left: float = 0.0
    far_right: float = 0.0
    transform: Callable[[FloatArray], ComplexArray] | None = field(default=None, compare=False)
    note: str = ""

    @classmethod
    def from_polynomial(
        cls,
        coeffs: npt.ArrayLike,
        exterior: tuple[ExteriorPiece, ...] = (),
        far_left: float = 0.0,
        far_right: float = 0.0,
        transform: Callable[[FloatArray], ComplexArray] | None = None,
        note: str = "",
    ) -> "ExtendedFunction":
        """Build from ascending polynomial coefficients on Omega."""
        poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=np.float64))
        return cls(
            interior=lambda x: np.asarray(poly(x), dtype=np.float64),
            interior_poly=poly,
            exterior=exterior,
            far_left=far_left,
            far_right=far_right,
            transform=transform,
            note=note,
        )

    @property
    def vanishes_outside(self) -> bool:
        """True when the exterior data are identically zero."""
        return not self.exterior and self.far_left == 0.0 and self.far_right == 0.0

    @property
    def breakpoints(self) -> FloatArray:
        """Sorted points where the piecewise description changes."""
        points = {0.0, 1.0}
        for piece in self.exterior:
            points.update((piece.lo, piece.hi))
        return np.array(sorted(points))

    def evaluate(self, x: npt.ArrayLike) -> FloatArray:
        """Vectorized evaluation on R."""
        xa = np.asarray(x, dtype=np.float64)
        out = np.where(xa < 0.0, self.far_left, self.far_right).astype(np.float64)
        inside = (xa >= 0.0) & (xa <= 1.0)
        if np.any(inside):
            out[inside] = self.interior(xa[inside])
        for piece in self.exterior:
            mask = (xa >= piece.lo) & (xa <= piece.hi) & ~inside
            if np.any(mask):
                out[mask] = piece.func(xa[mask])
        return out

    def __call__(self, x: npt.ArrayLike) -> FloatArray:
        return self.evaluate(x)
