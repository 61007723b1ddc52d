"""CSV tables, JSON provenance sidecars and gnuplot scripts."""

import csv
import io
import logging
from collections.abc import Sequence
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

from ..models.report import ConditionReport, ConvergenceReport

logger = logging.getLogger(__name__)

Cell = float | int | str | None


class ArtifactMetadata(BaseModel):
    """Provenance written next to every table."""

    command: str = Field(description="CLI command that produced the table")

    problem: str | None = Field(default=None, description="Problem identifier")

    r: int | None = Field(default=None, description="B-spline order")

    beta: float | None = Field(default=None, description="Operator order")

    lam: float | None = Field(default=None, description="Tempering rate")

    levels: list[int] = Field(default_factory=list, description="Refinement levels")

    method: str | None = Field(default=None, description="Linear solver")

    tol: float | None = Field(default=None, description="Solver tolerance")

    error_mode: str | None = Field(default=None, description="exact, successive or both")

    estimator: str | None = Field(default=None, description="Condition-number estimator")

    notes: list[str] = Field(default_factory=list, description="Truncation and provenance notes")

    extra: dict[str, Any] = Field(default_factory=dict, description="Command-specific data")

    created_at: datetime = Field(
        default_factory=lambda: datetime.now(timezone.utc), description="Creation time (UTC)"
    )


def format_cell(value: Cell) -> str:
    """Floats in scientific notation with 5 significant digits, ints verbatim, None empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.4e}"
    return value


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Cell]]) -> str:
    """Comma-separated table text with a header row."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def write_table(
    path: Path,
    header: Sequence[str],
    rows: Sequence[Sequence[Cell]],
    metadata: ArtifactMetadata,
) -> tuple[Path, Path]:
    """Write `path` as CSV and `path` with suffix .json as its sidecar.

    Returns:
        (csv path, json path)
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(header, rows))
    sidecar = path.with_suffix(".json")
    sidecar.write_text(metadata.model_dump_json(indent=2))
    logger.debug(f"Wrote {path} and {sidecar}")
    return path, sidecar


CONVERGENCE_HEADER = {
    "exact": ["n", "H_err", "H_rate", "L2_err", "L2_rate", "iterations"],
    "successive": ["n", "Hhat_err", "Hhat_rate", "L2hat_err", "L2hat_rate", "iterations"],
    "both": [
        "n",
        "H_err",
        "H_rate",
        "L2_err",
        "L2_rate",
        "Hhat_err",
        "Hhat_rate",
        "L2hat_err",
        "L2hat_rate",
        "iterations",
    ],
}

CONDITION_HEADER = ["n", "cond", "rate", "iter_cg", "cond_pcg", "iter_pcg"]


def convergence_rows(report: ConvergenceReport) -> list[list[Cell]]:
    """Table rows of a convergence report; `both` adds the successive columns."""
    rows: list[list[Cell]] = []
    for row in report.rows:
        cells: list[Cell] = [row.n, row.error_h, row.rate_h, row.error_l2, row.rate_l2]
        if report.error_mode == "both":
            cells += [row.error_h_hat, row.rate_h_hat, row.error_l2_hat, row.rate_l2_hat]
        rows.append([*cells, row.iterations])
    return rows


def condition_rows(report: ConditionReport) -> list[list[Cell]]:
    """Table rows of a condition report; timings stay in the sidecar."""
    return [
        [row.n, row.cond_cg, row.rate, row.iterations_cg, row.cond_pcg, row.iterations_pcg]
        for row in report.rows
    ]


def artifact_stem(prefix: str, problem: str | None, r: int, beta: float, lam: float) -> str:
    """File stem like `convergence_example1_r2_b0p5_l3`."""
    parts = [prefix] + ([problem] if problem else []) + [f"r{r}", f"b{beta:g}", f"l{lam:g}"]
    return "_".join(parts).replace(".", "p")


def write_gnuplot_script(path: Path, data_files: Sequence[Path], title: str) -> Path:
    """Script plotting column 2 (and 3 when present) of each CSV on a log scale."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set logscale y",
        "set xlabel 'index'",
        "set ylabel 'eigenvalue'",
        f"set title '{title}'",
    ]
    plots = []
    for data in data_files:
        plots.append(f"'{data.name}' using 1:2 with points")
        plots.append(f"'{data.name}' using 1:3 with points")
    lines.append("plot " + ", \\\n     ".join(plots))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path
