"""Configuration models for the tempered-galerkin CLI tool."""

from pathlib import Path

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .operator import OperatorParams
from .problem import ProblemSpec
from .report import ErrorChoice, SolveMethod


class SolverSettings(BaseSettings):
    """Numerical defaults, overridable through TEMPERED_* environment variables."""

    model_config = SettingsConfigDict(env_prefix="TEMPERED_")

    tol: float = Field(default=1e-9, gt=0.0, lt=1.0, description="CG/PCG relative tolerance")

    max_iter_factor: int = Field(
        default=20, gt=0, description="Iteration limit as a multiple of the system size"
    )

    lanczos_iterations: int = Field(default=200, gt=1, description="Lanczos steps")

    dense_eig_limit: int = Field(
        default=512, gt=0, description="Largest N handled by the dense eigensolver"
    )

    dense_solve_limit: int = Field(
        default=8192, gt=0, description="Largest N accepted by the dense solver"
    )

    eigs_max_level: int = Field(default=9, gt=0, description="Largest level for eigenvalue dumps")

    cache_dir: Path | None = Field(
        default=None, description="First-row cache directory; unset disables the cache"
    )

    error_oversampling: int = Field(
        default=6, ge=0, le=10, description="Error grids use 2^(n + oversampling) samples"
    )

    fft_pad_factor: int = Field(default=8, ge=1, description="Zero padding of the error FFT")


class ExperimentConfig(BaseModel):
    """One experiment: problem, operator, basis order, levels and solver."""

    problem: str | ProblemSpec = Field(
        default="example1", description="Registered problem id or an inline ProblemSpec"
    )

    beta: float = Field(gt=0.0, lt=2.0, description="Operator order")

    lam: float = Field(default=0.0, ge=0.0, description="Tempering rate")

    r: int = Field(default=2, ge=1, le=2, description="B-spline order")

    n_range: list[int] = Field(description="Refinement levels, ascending")

    method: SolveMethod = Field(default="pcg", description="Linear solver")

    out_dir: Path = Field(default=Path("results"), description="Directory for artifacts")

    tol: float | None = Field(default=None, gt=0.0, description="Overrides SolverSettings.tol")

    max_iter: int | None = Field(default=None, gt=0, description="Iteration limit override")

    errors: ErrorChoice = Field(
        default="auto", description="Convergence errors: auto, exact, successive or both"
    )

    @field_validator("n_range")
    @classmethod
    def validate_levels(cls, v: list[int]) -> list[int]:
        """Levels are non-empty, positive and strictly ascending."""
        if not v:
            raise ValueError("n_range must not be empty")
        if any(n < 1 for n in v):
            raise ValueError(f"levels must be positive, got {v}")
        if any(b <= a for a, b in zip(v, v[1:], strict=False)):
            raise ValueError(f"n_range must be strictly ascending, got {v}")
        return v

    @model_validator(mode="after")
    def check_admissible(self) -> "ExperimentConfig":
        """Piecewise constants need beta < 1; inline problems must agree on the operator."""
        if self.r == 1 and self.beta >= 1.0:
            raise ValueError(f"r=1 requires beta < 1, got beta={self.beta}")
        if isinstance(self.problem, ProblemSpec) and self.problem.params != self.params:
            raise ValueError(
                f"inline problem has {self.problem.params.label()} "
                f"but the experiment asks for {self.params.label()}"
            )
        return self

    @property
    def params(self) -> OperatorParams:
        """Operator parameters of the experiment."""
        return OperatorParams(beta=self.beta, lam=self.lam)

    @property
    def problem_name(self) -> str:
        """Identifier used in file names and reports."""
        return self.problem if isinstance(self.problem, str) else self.problem.name
