"""CLI entry point for the tempered-galerkin tool."""

import json
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Annotated, Optional

import numpy as np
import typer
from pydantic import ValidationError
from rich.logging import RichHandler
from rich.progress import Progress, SpinnerColumn, TextColumn

from .analysis import condition_sweep, convergence_sweep, eigenvalue_dump, spread
from .assembly import assemble_first_row
from .cache import FirstRowCache
from .config import (
    load_config_from_cli,
    preset_configs,
    resolve_config_problem,
    table_configs,
)
from .errors import GalerkinError, ParameterError, ProblemSpecError, SizeGuardError
from .linsolve import build_diag
from .models.config import ExperimentConfig, SolverSettings
from .models.operator import BasisSpec, OperatorParams
from .models.report import ErrorChoice, SolveMethod
from .problems import solve_problem
from .symbol import c_beta, kernel_symbol, symbol_g
from .utils.logging import (
    console,
    log_condition,
    log_convergence,
    log_error,
    log_info,
    log_run_header,
    log_solve_report,
    log_success,
    log_warning,
)
from .utils.output import (
    CONDITION_HEADER,
    CONVERGENCE_HEADER,
    ArtifactMetadata,
    artifact_stem,
    condition_rows,
    convergence_rows,
    write_gnuplot_script,
    write_table,
)

logger = logging.getLogger(__name__)

app = typer.Typer(
    add_completion=False, help="Wavelet-Galerkin solver for -(Delta + lambda)^{beta/2}"
)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

ConfigOption = Annotated[
    Optional[Path],  # noqa: UP045 - Typer doesn't support X | None syntax
    typer.Option("--config", "-c", help="JSON experiment config", dir_okay=False),
]
TableOption = Annotated[
    Optional[int],  # noqa: UP045
    typer.Option("--table", help="Run a preset parameter grid (tables 1-5)"),
]
PresetOption = Annotated[
    Optional[str],  # noqa: UP045
    typer.Option("--preset", help="Run a named parameter grid (e.g., gauss_s1)"),
]
ProblemOption = Annotated[
    Optional[str],  # noqa: UP045
    typer.Option("--problem", "-p", help="Registered problem id (e.g., example1, example2)"),
]
BetaOption = Annotated[
    Optional[float],  # noqa: UP045
    typer.Option("--beta", "-b", help="Operator order, 0 < beta < 2"),
]
LambdaOption = Annotated[
    Optional[float],  # noqa: UP045
    typer.Option("--lambda", "-l", help="Tempering rate, lambda >= 0"),
]
OrderOption = Annotated[
    Optional[int],  # noqa: UP045
    typer.Option("--r", "-r", help="B-spline order (1 or 2)"),
]
LevelsOption = Annotated[
    Optional[str],  # noqa: UP045
    typer.Option("--levels", "-n", help="Levels, e.g. '9,10,11' or '9..11'"),
]
MethodOption = Annotated[
    Optional[str],  # noqa: UP045
    typer.Option("--method", "-m", help="Linear solver (cg, pcg, dense)"),
]
TolOption = Annotated[
    Optional[float],  # noqa: UP045
    typer.Option("--tol", help="Relative residual tolerance"),
]
OutOption = Annotated[
    Optional[Path],  # noqa: UP045
    typer.Option("--out", "-o", help="Output directory", file_okay=False),
]
ErrorsOption = Annotated[
    Optional[str],  # noqa: UP045
    typer.Option("--errors", "-e", help="Convergence errors (auto, exact, successive, both)"),
]
VerboseOption = Annotated[bool, typer.Option("--verbose", "-V", help="Enable verbose logging")]


def parse_levels(text: str | None) -> list[int] | None:
    """Parse '9,10,11' or '9..11' into a list of levels.

    Raises:
        ParameterError: If the text is not a level list
    """
    if text is None:
        return None
    text = text.strip()
    if not text:
        return []
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ParameterError(f"cannot parse levels '{text}'") from exc


def _parse_method(method: str | None) -> SolveMethod | None:
    if method is None:
        return None
    if method not in ("cg", "pcg", "dense"):
        raise ParameterError(f"Unsupported method: {method}. Supported: cg, pcg, dense")
    return method  # type: ignore[return-value]


def _parse_errors(errors: str | None) -> ErrorChoice | None:
    if errors is None:
        return None
    if errors not in ("auto", "exact", "successive", "both"):
        raise ParameterError(
            f"Unsupported errors: {errors}. Supported: auto, exact, successive, both"
        )
    return errors  # type: ignore[return-value]


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        handlers=[RichHandler(console=console, rich_tracebacks=True)],
        force=True,
    )


def _run(verbose: bool, body: Callable[[], None]) -> None:
    """Run a command body and map failures to exit codes."""
    _setup_logging(verbose)
    try:
        body()
    except KeyboardInterrupt:
        console.print("\n\n[yellow]⚠️  Run interrupted by user[/yellow]")
        sys.exit(130)
    except (
        ValidationError,
        ParameterError,
        ProblemSpecError,
        SizeGuardError,
        OSError,
        json.JSONDecodeError,
    ) as e:
        log_error("invalid configuration", str(e))
        sys.exit(EXIT_CONFIG)
    except GalerkinError as e:
        log_error("numerical failure", str(e))
        if verbose:
            console.print_exception()
        sys.exit(EXIT_NUMERICAL)
    except ValueError as e:
        log_error("invalid configuration", str(e))
        sys.exit(EXIT_CONFIG)


def _configs(
    table: int | None,
    config_path: Path | None,
    problem: str | None,
    beta: float | None,
    lam: float | None,
    r: int | None,
    levels: str | None,
    method: str | None,
    out: Path | None,
    tol: float | None,
    preset: str | None = None,
) -> list[ExperimentConfig]:
    parsed_method = _parse_method(method)
    if table is not None and preset is not None:
        raise ParameterError("--table and --preset are mutually exclusive")
    if table is not None or preset is not None:
        configs = (
            table_configs(table, out or Path("results"))
            if table is not None
            else preset_configs(str(preset), out or Path("results"))
        )
        update = {
            key: value
            for key, value in (("method", parsed_method), ("tol", tol))
            if value is not None
        }
        return [ExperimentConfig.model_validate(c.model_dump() | update) for c in configs]
    return [
        load_config_from_cli(
            config_path=config_path,
            problem=problem,
            beta=beta,
            lam=lam,
            r=r,
            levels=parse_levels(levels),
            method=parsed_method,
            out_dir=out,
            tol=tol,
        )
    ]


def _cache(settings: SolverSettings) -> FirstRowCache | None:
    return FirstRowCache(settings.cache_dir) if settings.cache_dir is not None else None


def _max_iter(config: ExperimentConfig, settings: SolverSettings) -> int:
    if config.max_iter is not None:
        return config.max_iter
    largest = BasisSpec(r=config.r, n=config.n_range[-1])  # type: ignore[arg-type]
    return settings.max_iter_factor * largest.dimension


def _metadata(
    command: str, config: ExperimentConfig, settings: SolverSettings
) -> ArtifactMetadata:
    return ArtifactMetadata(
        command=command,
        problem=config.problem_name,
        r=config.r,
        beta=config.beta,
        lam=config.lam,
        levels=config.n_range,
        method=config.method,
        tol=config.tol or settings.tol,
    )


def _header(command: str, config: ExperimentConfig) -> None:
    log_run_header(
        command,
        {
            "Problem": config.problem_name,
            "r": config.r,
            "beta": config.beta,
            "lambda": config.lam,
            "Levels": ", ".join(str(n) for n in config.n_range),
            "Method": config.method,
            "Output": config.out_dir,
        },
    )


@app.command()
def solve(
    config: ConfigOption = None,
    problem: ProblemOption = None,
    beta: BetaOption = None,
    lam: LambdaOption = None,
    r: OrderOption = None,
    levels: LevelsOption = None,
    method: MethodOption = None,
    tol: TolOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Solve one problem on each level and write solution samples.

    Example:
        tempered-galerkin solve --problem example1 --beta 0.5 --r 2 --levels 9
    """

    def body() -> None:
        settings = SolverSettings()
        cfg = _configs(None, config, problem, beta, lam, r, levels, method, out, tol)[0]
        _header("solve", cfg)
        prob = resolve_config_problem(cfg)
        cache = _cache(settings)
        for n in cfg.n_range:
            spec = BasisSpec(r=cfg.r, n=n)  # type: ignore[arg-type]
            if cfg.method == "dense" and spec.dimension > settings.dense_solve_limit:
                raise SizeGuardError(
                    f"dense solve limited to N <= {settings.dense_solve_limit}, "
                    f"got {spec.dimension}"
                )
            solution, report = solve_problem(
                prob,
                spec,
                cfg.method,
                tol=cfg.tol or settings.tol,
                max_iter=_max_iter(cfg, settings),
                cache=cache,
            )
            log_solve_report(report)
            x = np.linspace(0.0, 1.0, spec.dimension + 1)
            values = solution.evaluate(x)
            metadata = _metadata("solve", cfg, settings)
            metadata.levels = [n]
            metadata.extra = {"report": report.model_dump()}
            stem = artifact_stem("solve", cfg.problem_name, cfg.r, cfg.beta, cfg.lam)
            path, _ = write_table(
                cfg.out_dir / f"{stem}_n{n}.csv",
                ["x", "p"],
                [[float(a), float(b)] for a, b in zip(x, values, strict=True)],
                metadata,
            )
            log_success(f"Wrote {path}")

    _run(verbose, body)


@app.command()
def convergence(
    config: ConfigOption = None,
    table: TableOption = None,
    preset: PresetOption = None,
    problem: ProblemOption = None,
    beta: BetaOption = None,
    lam: LambdaOption = None,
    r: OrderOption = None,
    levels: LevelsOption = None,
    method: MethodOption = None,
    tol: TolOption = None,
    errors: ErrorsOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Error and rate tables over a level range.

    Example:
        tempered-galerkin convergence --table 1 --out results
        tempered-galerkin convergence --preset gauss_s1
    """

    def body() -> None:
        if table == 2:
            raise ParameterError("table 2 is a conditioning table; use the condition command")
        requested_errors = _parse_errors(errors)
        settings = SolverSettings()
        cache = _cache(settings)
        configs = _configs(table, config, problem, beta, lam, r, levels, method, out, tol, preset)
        for cfg in configs:
            _header("convergence", cfg)
            with Progress(
                SpinnerColumn(),
                TextColumn("[progress.description]{task.description}"),
                console=console,
                transient=True,
            ) as progress:
                progress.add_task(f"Sweeping levels {cfg.n_range}...", total=None)
                report = convergence_sweep(
                    resolve_config_problem(cfg),
                    cfg.r,
                    cfg.n_range,
                    cfg.method,
                    tol=cfg.tol or settings.tol,
                    max_iter=_max_iter(cfg, settings),
                    cache=cache,
                    oversampling=settings.error_oversampling,
                    pad_factor=settings.fft_pad_factor,
                    errors=requested_errors or cfg.errors,
                )
            log_convergence(report)
            for note in report.notes:
                log_info(note)
            metadata = _metadata("convergence", cfg, settings)
            metadata.error_mode = report.error_mode
            metadata.notes = report.notes
            stem = artifact_stem("convergence", cfg.problem_name, cfg.r, cfg.beta, cfg.lam)
            path, _ = write_table(
                cfg.out_dir / f"{stem}.csv",
                CONVERGENCE_HEADER[report.error_mode],
                convergence_rows(report),
                metadata,
            )
            log_success(f"Wrote {path}")

    _run(verbose, body)


@app.command()
def condition(
    config: ConfigOption = None,
    table: TableOption = None,
    beta: BetaOption = None,
    lam: LambdaOption = None,
    r: OrderOption = None,
    levels: LevelsOption = None,
    tol: TolOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Condition numbers and CG/PCG iteration counts.

    Example:
        tempered-galerkin condition --table 2
    """

    def body() -> None:
        if table is not None and table != 2:
            raise ParameterError(f"table {table} is a convergence table; use convergence")
        settings = SolverSettings()
        cache = _cache(settings)
        for cfg in _configs(table, config, None, beta, lam, r, levels, None, out, tol):
            _header("condition", cfg)
            report = condition_sweep(
                cfg.params,
                cfg.r,
                cfg.n_range,
                tol=cfg.tol or settings.tol,
                max_iter=_max_iter(cfg, settings),
                cache=cache,
                lanczos_iterations=settings.lanczos_iterations,
                dense_limit=settings.dense_eig_limit,
                dense_timing_limit=settings.dense_solve_limit,
            )
            log_condition(report)
            metadata = _metadata("condition", cfg, settings)
            metadata.method = "cg, pcg"
            metadata.estimator = report.estimator
            metadata.extra = {
                "timings": [
                    {"n": row.n, "cg": row.time_cg, "pcg": row.time_pcg, "dense": row.time_dense}
                    for row in report.rows
                ]
            }
            stem = artifact_stem("condition", None, cfg.r, cfg.beta, cfg.lam)
            path, _ = write_table(
                cfg.out_dir / f"{stem}.csv", CONDITION_HEADER, condition_rows(report), metadata
            )
            log_success(f"Wrote {path}")

    _run(verbose, body)


@app.command()
def eigs(
    config: ConfigOption = None,
    beta: BetaOption = None,
    lam: LambdaOption = None,
    r: OrderOption = None,
    levels: LevelsOption = None,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Full spectra of the plain and preconditioned systems.

    Example:
        tempered-galerkin eigs --beta 1.0 --lambda 3 --r 2 --levels 7..9
    """

    def body() -> None:
        settings = SolverSettings()
        cfg = _configs(None, config, None, beta, lam, r, levels, None, out, None)[0]
        _header("eigs", cfg)
        too_fine = [n for n in cfg.n_range if n > settings.eigs_max_level]
        if too_fine:
            raise SizeGuardError(
                f"eigenvalue dumps limited to n <= {settings.eigs_max_level}, got {too_fine}"
            )
        cache = _cache(settings)
        files = []
        stem = artifact_stem("eigs", None, cfg.r, cfg.beta, cfg.lam)
        for n in cfg.n_range:
            spec = BasisSpec(r=cfg.r, n=n)  # type: ignore[arg-type]
            stiffness = assemble_first_row(cfg.params, spec, cache)
            plain = eigenvalue_dump(stiffness, max_level=settings.eigs_max_level)
            scaled = eigenvalue_dump(
                stiffness, build_diag(stiffness, cache), max_level=settings.eigs_max_level
            )
            log_info(
                f"n={n}: spread {spread(plain):.4e} plain, {spread(scaled):.4f} preconditioned"
            )
            metadata = _metadata("eigs", cfg, settings)
            metadata.levels = [n]
            metadata.method = None
            metadata.extra = {"spread_plain": spread(plain), "spread_pcg": spread(scaled)}
            path, _ = write_table(
                cfg.out_dir / f"{stem}_n{n}.csv",
                ["index", "plain", "preconditioned"],
                [
                    [i + 1, float(a), float(b)]
                    for i, (a, b) in enumerate(zip(plain, scaled, strict=True))
                ],
                metadata,
            )
            files.append(path)
        script = write_gnuplot_script(
            cfg.out_dir / f"{stem}.gp",
            files,
            f"r={cfg.r} beta={cfg.beta:g} lambda={cfg.lam:g}",
        )
        log_success(f"Wrote {len(files)} spectra and {script}")

    _run(verbose, body)


@app.command()
def symbol(
    beta: Annotated[float, typer.Option("--beta", "-b", help="Operator order")],
    lam: Annotated[float, typer.Option("--lambda", "-l", help="Tempering rate")] = 0.0,
    xi_max: Annotated[float, typer.Option("--xi-max", help="Largest frequency")] = 100.0,
    points: Annotated[int, typer.Option("--points", help="Grid points", min=2)] = 1001,
    out: OutOption = None,
    verbose: VerboseOption = False,
) -> None:
    """Dump the symbol G and G / c_beta on a frequency grid.

    Example:
        tempered-galerkin symbol --beta 0.5 --lambda 3 --xi-max 50
    """

    def body() -> None:
        params = OperatorParams(beta=beta, lam=lam)
        xi = np.linspace(0.0, xi_max, points)
        values = symbol_g(params, xi)
        bare = kernel_symbol(params, xi)
        if np.any(values < 0.0):
            log_warning(f"symbol is negative at {int(np.sum(values < 0.0))} grid points")
        out_dir = out or Path("results")
        metadata = ArtifactMetadata(
            command="symbol",
            beta=beta,
            lam=lam,
            extra={"c_beta": c_beta(params), "xi_max": xi_max, "points": points},
        )
        name = f"symbol_b{beta:g}_l{lam:g}".replace(".", "p")
        path, _ = write_table(
            out_dir / f"{name}.csv",
            ["xi", "G", "G_over_c"],
            [[float(a), float(b), float(c)] for a, b, c in zip(xi, values, bare, strict=True)],
            metadata,
        )
        log_success(f"Wrote {path}")

    _run(verbose, body)


if __name__ == "__main__":
    app()
