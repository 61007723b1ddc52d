"""Operator and discretization parameter models."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class OperatorParams(BaseModel):
    """Order and tempering rate of -(Delta + lambda)^{beta/2}."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    beta: float = Field(gt=0.0, lt=2.0, description="Order of the operator, 0 < beta < 2")

    lam: float = Field(
        default=0.0,
        ge=0.0,
        alias="lambda",
        description="Tempering rate (1/length); 0 gives the fractional Laplacian",
    )

    @property
    def tempered(self) -> bool:
        """Whether the exponential tempering is active."""
        return self.lam > 0.0

    def label(self) -> str:
        """Short identifier used in logs and file names."""
        return f"beta={self.beta:g},lambda={self.lam:g}"


def coarsest_level(r: int) -> int:
    """Least integer n0 with 2^n0 >= 2r."""
    n0 = 0
    while 2**n0 < 2 * r:
        n0 += 1
    return n0


class BasisSpec(BaseModel):
    """Spline order and refinement level of the Galerkin space V_n."""

    model_config = ConfigDict(frozen=True)

    r: Literal[1, 2] = Field(description="B-spline order (1: piecewise constant, 2: hat)")

    n: int = Field(ge=1, le=24, description="Refinement level, mesh width 2^-n")

    @model_validator(mode="after")
    def check_level(self) -> "BasisSpec":
        """Reject levels below the coarsest admissible one."""
        if self.n < self.n0:
            raise ValueError(f"level n={self.n} is below the coarsest level n0={self.n0}")
        return self

    @property
    def n0(self) -> int:
        """Coarsest level of the multiscale hierarchy."""
        return coarsest_level(self.r)

    @property
    def h(self) -> float:
        """Mesh width 2^-n."""
        return 2.0**-self.n

    @property
    def dimension(self) -> int:
        """Number of unknowns N(n) = 2^n - r + 1."""
        return 2**self.n - self.r + 1

    def at_level(self, n: int) -> "BasisSpec":
        """Same spline order at another level."""
        return BasisSpec(r=self.r, n=n)
