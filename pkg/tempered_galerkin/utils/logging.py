"""Logging utilities with Rich console output."""

from collections.abc import Sequence

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from ..models.report import ConditionReport, ConvergenceReport, SolveReport
from .output import Cell, convergence_rows, format_cell

# Global console instance
console = Console()


def log_run_header(command: str, details: dict[str, object]) -> None:
    """Log the parameters of a run in a panel.

    Args:
        command: Command name
        details: Parameter names and values
    """
    body = "\n".join(f"[bold]{key}:[/bold] {value}" for key, value in details.items())
    console.print(Panel(body, title=f"tempered-galerkin {command}", expand=False))


def log_table(title: str, header: Sequence[str], rows: Sequence[Sequence[Cell]]) -> None:
    """Log a table formatted like the CSV artifacts.

    Args:
        title: Table title
        header: Column names
        rows: Table rows
    """
    table = Table(title=title, show_header=True, header_style="bold")
    for name in header:
        table.add_column(name, justify="right")
    for row in rows:
        table.add_row(*(format_cell(v) for v in row))
    console.print(table)


def log_solve_report(report: SolveReport) -> None:
    """Log the outcome of a linear solve.

    Args:
        report: Solver report
    """
    status = "[green]converged[/green]" if report.converged else "[red]not converged[/red]"
    console.print(
        f"[bold]{report.method}[/bold] N={report.size} iterations={report.iterations} "
        f"residual={report.final_residual:.3e} {status} ({report.wall_time:.3f}s)"
    )


def log_convergence(report: ConvergenceReport) -> None:
    """Log a convergence table."""
    header = ["n", "H err", "rate", "L2 err", "rate"]
    if report.error_mode == "both":
        header += ["Hhat err", "rate", "L2hat err", "rate"]
    header.append("iter")
    rows = convergence_rows(report)
    title = (
        f"{report.problem} r={report.r} beta={report.beta:g} lambda={report.lam:g} "
        f"({report.error_mode})"
    )
    log_table(title, header, rows)


def log_condition(report: ConditionReport) -> None:
    """Log a condition-number table with timings."""
    header = ["n", "cond", "rate", "iter", "time", "cond pcg", "iter", "time", "time dense"]
    rows = [
        [
            row.n,
            row.cond_cg,
            row.rate,
            row.iterations_cg,
            row.time_cg,
            row.cond_pcg,
            row.iterations_pcg,
            row.time_pcg,
            row.time_dense,
        ]
        for row in report.rows
    ]
    log_table(f"r={report.r} beta={report.beta:g} lambda={report.lam:g}", header, rows)


def log_error(message: str, details: str | None = None) -> None:
    """Log an error message.

    Args:
        message: Error message
        details: Optional error details
    """
    console.print(f"[bold red]✗ Error:[/bold red] {message}")
    if details:
        console.print(f"[dim]{details}[/dim]")


def log_warning(message: str) -> None:
    """Log a warning message."""
    console.print(f"[yellow]⚠ Warning:[/yellow] {message}")


def log_info(message: str) -> None:
    """Log an info message."""
    console.print(f"[blue]ℹ[/blue] {message}")


def log_success(message: str) -> None:
    """Log a success message."""
    console.print(f"[bold green]✓ {message}[/bold green]")
