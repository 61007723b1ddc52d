"""Solver, convergence and conditioning report models."""

import math
from typing import Literal

from pydantic import BaseModel, Field, model_validator

SolveMethod = Literal["cg", "pcg", "dense"]

ErrorMode = Literal["exact", "successive", "both"]

ErrorChoice = Literal["auto", "exact", "successive", "both"]


class SolveReport(BaseModel):
    """Outcome of one linear solve."""

    method: SolveMethod = Field(description="Solver used")

    size: int = Field(ge=0, description="Number of unknowns")

    iterations: int = Field(default=0, ge=0, description="Iterations performed (0 for dense)")

    residual_history: list[float] = Field(
        default_factory=list,
        description="Relative residual norms ||r_k|| / ||r_0||, one per iteration, starting at k=0",
    )

    tolerance: float = Field(default=1e-9, gt=0.0, description="Relative residual tolerance")

    converged: bool = Field(default=True, description="Whether the stopping criterion was met")

    wall_time: float = Field(default=0.0, ge=0.0, description="Solve time in seconds")

    @model_validator(mode="after")
    def check_history(self) -> "SolveReport":
        """A converged iterative report ends below its tolerance."""
        if self.converged and self.residual_history and self.iterations > 0:
            if self.residual_history[-1] > self.tolerance:
                raise ValueError(
                    f"converged report ends at {self.residual_history[-1]:.3e} "
                    f"above tolerance {self.tolerance:.1e}"
                )
        return self

    @property
    def final_residual(self) -> float:
        """Last relative residual, 0 when none was recorded."""
        return self.residual_history[-1] if self.residual_history else 0.0


class ConvergenceRow(BaseModel):
    """Errors at one refinement level."""

    n: int = Field(description="Refinement level")

    error_h: float = Field(ge=0.0, description="H^{beta/2}(R) error")

    rate_h: float | None = Field(default=None, description="log2 ratio to the previous level")

    error_l2: float = Field(ge=0.0, description="L^2(R) error")

    rate_l2: float | None = Field(default=None, description="log2 ratio to the previous level")

    error_h_hat: float | None = Field(
        default=None, ge=0.0, description="H^{beta/2} difference to level n+1 (both mode)"
    )

    rate_h_hat: float | None = Field(default=None, description="log2 ratio of error_h_hat")

    error_l2_hat: float | None = Field(
        default=None, ge=0.0, description="L^2 difference to level n+1 (both mode)"
    )

    rate_l2_hat: float | None = Field(default=None, description="log2 ratio of error_l2_hat")

    iterations: int = Field(default=0, ge=0, description="Solver iterations at this level")


def log2_rate(previous: float, current: float) -> float | None:
    """log2(previous / current), None when undefined."""
    if previous <= 0.0 or current <= 0.0:
        return None
    return math.log2(previous / current)


def _rate(previous: float | None, current: float | None) -> float | None:
    if previous is None or current is None:
        return None
    return log2_rate(previous, current)


class ConvergenceReport(BaseModel):
    """Error table of a level sweep."""

    problem: str = Field(description="Problem identifier")

    r: int = Field(description="B-spline order")

    beta: float = Field(description="Operator order")

    lam: float = Field(description="Tempering rate")

    method: SolveMethod = Field(description="Solver used for every level")

    error_mode: ErrorMode = Field(
        description=(
            "exact: against the known solution; successive: against the next level; "
            "both: exact columns plus the successive ones"
        )
    )

    rows: list[ConvergenceRow] = Field(default_factory=list, description="One row per level")

    notes: list[str] = Field(default_factory=list, description="Truncation and provenance notes")

    def add_row(
        self,
        n: int,
        error_h: float,
        error_l2: float,
        iterations: int = 0,
        error_h_hat: float | None = None,
        error_l2_hat: float | None = None,
    ) -> ConvergenceRow:
        """Append a level and compute its rates against the previous row."""
        previous = self.rows[-1] if self.rows else None
        row = ConvergenceRow(
            n=n,
            error_h=error_h,
            rate_h=_rate(previous.error_h if previous else None, error_h),
            error_l2=error_l2,
            rate_l2=_rate(previous.error_l2 if previous else None, error_l2),
            error_h_hat=error_h_hat,
            rate_h_hat=_rate(previous.error_h_hat if previous else None, error_h_hat),
            error_l2_hat=error_l2_hat,
            rate_l2_hat=_rate(previous.error_l2_hat if previous else None, error_l2_hat),
            iterations=iterations,
        )
        self.rows.append(row)
        return row


class ConditionRow(BaseModel):
    """Conditioning and iteration counts at one level."""

    n: int = Field(description="Refinement level")

    cond_cg: float = Field(gt=0.0, description="Condition number of the stiffness matrix")

    rate: float | None = Field(default=None, description="log2 ratio of consecutive conditions")

    iterations_cg: int = Field(ge=0, description="Plain CG iterations")

    cond_pcg: float = Field(gt=0.0, description="Condition number of the preconditioned operator")

    iterations_pcg: int = Field(ge=0, description="Preconditioned CG iterations")

    time_cg: float = Field(default=0.0, ge=0.0, description="Plain CG wall time (s)")

    time_pcg: float = Field(default=0.0, ge=0.0, description="Preconditioned CG wall time (s)")

    time_dense: float | None = Field(default=None, description="Dense solve wall time (s)")


class ConditionReport(BaseModel):
    """Condition-number table of a level sweep."""

    r: int = Field(description="B-spline order")

    beta: float = Field(description="Operator order")

    lam: float = Field(description="Tempering rate")

    estimator: str = Field(description="How condition numbers were obtained")

    rows: list[ConditionRow] = Field(default_factory=list, description="One row per level")
