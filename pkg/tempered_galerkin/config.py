"""Configuration loading and table presets."""

import json
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from .models.config import ExperimentConfig
from .models.problem import ProblemSpec
from .models.report import SolveMethod
from .problems import get_problem

# (problem, r, betas, lambdas, levels)
_Grid = list[tuple[str, int, tuple[float, ...], tuple[float, ...], list[int]]]

# per preset table
_TABLE_GRIDS: dict[int, _Grid] = {
    1: [
        ("example1", 1, (0.3, 0.8), (0.0, 3.0), [10, 11, 12]),
        ("example1", 2, (0.5, 1.0, 1.8), (0.0, 3.0), [9, 10, 11]),
    ],
    2: [
        ("example1", 1, (0.3, 0.5, 0.8), (3.0,), [11, 12, 13]),
        ("example1", 2, (0.5, 1.0, 1.5, 1.8), (3.0,), [10, 11, 12]),
    ],
    3: [("example2", 2, (0.5, 1.0, 1.5), (0.0,), [8, 9, 10])],
    4: [("example2", 2, (0.5, 1.0, 1.5), (1.5, 3.0), [8, 9, 10])],
    5: [
        ("example3_tent_s3", 2, (0.5, 1.0, 1.6), (0.0, 3.0), [9, 10, 11]),
        ("example3_tent_s2", 2, (0.5, 1.0, 1.6), (0.0, 3.0), [9, 10, 11]),
    ],
}

# named runs outside the tables
_NAMED_GRIDS: dict[str, _Grid] = {
    "gauss_s1": [
        ("example3_gauss", 1, (0.3,), (1.5,), [8, 9, 10, 11]),
        ("example3_gauss", 1, (0.7,), (3.0,), [8, 9, 10, 11]),
    ],
}


def load_experiment_config(path: Path) -> ExperimentConfig:
    """Read an ExperimentConfig from a JSON document.

    Args:
        path: JSON file

    Returns:
        Validated ExperimentConfig

    Raises:
        OSError: If the file cannot be read
        ValidationError: If the document does not describe a valid experiment
    """
    return ExperimentConfig.model_validate_json(path.read_text())


def load_config_from_cli(
    config_path: Path | None,
    problem: str | None,
    beta: float | None,
    lam: float | None,
    r: int | None,
    levels: list[int] | None,
    method: SolveMethod | None,
    out_dir: Path | None,
    tol: float | None,
) -> ExperimentConfig:
    """Load configuration from CLI arguments over an optional JSON document.

    Args:
        config_path: JSON config file, optional
        problem: Registered problem id
        beta: Operator order
        lam: Tempering rate
        r: B-spline order
        levels: Refinement levels
        method: Linear solver
        out_dir: Output directory
        tol: Solver tolerance

    Returns:
        ExperimentConfig instance

    Raises:
        ValidationError: If the merged configuration is invalid
        OSError: If the config file cannot be read
        json.JSONDecodeError: If the config file is not JSON
    """
    data: dict[str, Any] = json.loads(config_path.read_text()) if config_path else {}

    overrides = {
        "problem": problem,
        "beta": beta,
        "lam": lam,
        "r": r,
        "n_range": levels,
        "method": method,
        "out_dir": out_dir,
        "tol": tol,
    }
    data.update({key: value for key, value in overrides.items() if value is not None})
    return ExperimentConfig.model_validate(data)


def resolve_config_problem(config: ExperimentConfig) -> ProblemSpec:
    """The ProblemSpec an experiment runs, registered or inline."""
    if isinstance(config.problem, ProblemSpec):
        return config.problem
    return get_problem(config.problem, config.params)


def table_numbers() -> list[int]:
    """Tables with a preset."""
    return sorted(_TABLE_GRIDS)


def table_configs(k: int, out_dir: Path = Path("results")) -> list[ExperimentConfig]:
    """Experiment grid of preset table k.

    Args:
        k: Table number (1..5)
        out_dir: Output directory of every generated config

    Returns:
        One ExperimentConfig per (problem, r, beta, lambda) block

    Raises:
        ValueError: If k has no preset
    """
    grid = _TABLE_GRIDS.get(k)
    if grid is None:
        supported = ", ".join(str(t) for t in table_numbers())
        raise ValueError(f"Unsupported table: {k}. Supported: {supported}")
    return _expand(grid, out_dir, f"table {k}")


def preset_names() -> list[str]:
    """Named runs with a preset."""
    return sorted(_NAMED_GRIDS)


def preset_configs(name: str, out_dir: Path = Path("results")) -> list[ExperimentConfig]:
    """Experiment grid of a named preset, e.g. the Gaussian exterior runs with S1 lifting.

    Raises:
        ValueError: If name has no preset
    """
    grid = _NAMED_GRIDS.get(name)
    if grid is None:
        supported = ", ".join(preset_names())
        raise ValueError(f"Unsupported preset: {name}. Supported: {supported}")
    return _expand(grid, out_dir, f"preset {name}")


def _expand(grid: _Grid, out_dir: Path, label: str) -> list[ExperimentConfig]:
    try:
        return [
            ExperimentConfig(
                problem=problem, beta=beta, lam=lam, r=r, n_range=levels, out_dir=out_dir
            )
            for problem, r, betas, lams, levels in grid
            for lam in lams
            for beta in betas
        ]
    except ValidationError as exc:
        raise ValueError(f"{label} is invalid: {exc}") from exc
