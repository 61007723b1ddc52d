"""Declarative problem specifications.

Closed-form pieces (solutions, exterior data, lifting interiors) are referenced
by registered name so that a ProblemSpec round-trips through JSON.
"""

from typing import Annotated, Literal

from pydantic import BaseModel, Field, model_validator

from .operator import OperatorParams


class ManufacturedRHS(BaseModel):
    """Right-hand side derived from a registered exact solution u."""

    kind: Literal["manufactured"] = "manufactured"

    solution: str = Field(description="Registered solution, e.g. 'cubic', 'gauss', 'tent_quartic'")


class ConstantRHS(BaseModel):
    """Constant right-hand side."""

    kind: Literal["constant"] = "constant"

    value: float = Field(default=1.0, description="Value of f on Omega")


class ExplicitRHS(BaseModel):
    """Registered closed-form right-hand side."""

    kind: Literal["explicit"] = "explicit"

    name: str = Field(description="Registered f, e.g. 'example1_closed_form'")


RHSSpec = Annotated[ManufacturedRHS | ConstantRHS | ExplicitRHS, Field(discriminator="kind")]


class ZeroExterior(BaseModel):
    """Homogeneous exterior condition p = 0 outside Omega."""

    kind: Literal["zero"] = "zero"


class NamedExterior(BaseModel):
    """Registered exterior data g."""

    kind: Literal["named"] = "named"

    name: str = Field(
        description="Registered exterior data, e.g. 'gauss_exterior', 'tent_exterior'"
    )


ExteriorSpec = Annotated[ZeroExterior | NamedExterior, Field(discriminator="kind")]


class LiftingSpec(BaseModel):
    """Extension of the exterior data into Omega."""

    kind: Literal["none", "S1", "S3", "custom"] = Field(
        default="none",
        description="S1: linear interpolant, S3: cubic Hermite, custom: registered interior",
    )

    interior: str | None = Field(
        default=None, description="Registered interior polynomial for custom liftings, e.g. 'zero'"
    )

    @model_validator(mode="after")
    def check_custom(self) -> "LiftingSpec":
        """A custom lifting names its interior and only a custom lifting does."""
        if (self.kind == "custom") != (self.interior is not None):
            raise ValueError("a custom lifting needs 'interior' and other kinds must omit it")
        return self


class ProblemSpec(BaseModel):
    """Operator, right-hand side, exterior data and lifting of one problem."""

    name: str = Field(description="Problem identifier used in reports")

    params: OperatorParams = Field(description="Operator parameters")

    rhs: RHSSpec = Field(description="Right-hand side on Omega")

    exterior: ExteriorSpec = Field(
        default_factory=ZeroExterior, description="Exterior condition on R minus Omega"
    )

    lifting: LiftingSpec = Field(default_factory=LiftingSpec, description="Lifting choice")

    exact: str | None = Field(
        default=None,
        description="Registered exact solution on R; successive errors are used when absent",
    )

    @model_validator(mode="after")
    def check_lifting(self) -> "ProblemSpec":
        """Lifting is none exactly when the exterior condition is homogeneous."""
        if (self.lifting.kind == "none") != (self.exterior.kind == "zero"):
            raise ValueError("lifting must be 'none' exactly when the exterior data are zero")
        return self
