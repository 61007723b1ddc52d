"""Tests for the command-line interface."""

import csv
import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from tempered_galerkin.cli import app, parse_levels
from tempered_galerkin.errors import ParameterError

runner = CliRunner()


def read_rows(path: Path) -> list[list[str]]:
    with path.open() as f:
        return list(csv.reader(f))


class TestParseLevels:
    """Tests for parse_levels."""

    @pytest.mark.parametrize(
        ("text", "expected"),
        [("9,10,11", [9, 10, 11]), ("9..11", [9, 10, 11]), (" 7 ", [7]), ("", []), (None, None)],
    )
    def test_forms(self, text: str | None, expected: list[int] | None) -> None:
        assert parse_levels(text) == expected

    def test_garbage(self) -> None:
        with pytest.raises(ParameterError):
            parse_levels("a..b")


class TestSolveCommand:
    """Tests for the solve command."""

    def test_constant_solution(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app,
            "solve -p constant_one -b 0.6 -l 3 -r 2 -n 5".split() + ["-o", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        csv_path = tmp_path / "solve_constant_one_r2_b0p6_l3_n5.csv"
        rows = read_rows(csv_path)
        assert rows[0] == ["x", "p"]
        assert len(rows) == 1 + 2**5
        assert all(abs(float(p) - 1.0) < 1e-8 for _, p in rows[1:])
        sidecar = json.loads(csv_path.with_suffix(".json").read_text())
        assert sidecar["command"] == "solve"
        assert sidecar["levels"] == [5]
        assert sidecar["extra"]["report"]["converged"] is True

    def test_piecewise_constants_with_large_beta(self, tmp_path: Path) -> None:
        args = ["solve", "-b", "1.2", "-r", "1", "-n", "5", "-o", str(tmp_path)]
        result = runner.invoke(app, args)
        assert result.exit_code == 2

    def test_unknown_method(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app, ["solve", "-b", "0.5", "-n", "5", "-m", "gmres", "-o", str(tmp_path)]
        )
        assert result.exit_code == 2
        assert "Unsupported method" in result.output

    def test_unknown_problem(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app, ["solve", "-p", "nope", "-b", "0.5", "-n", "5", "-o", str(tmp_path)]
        )
        assert result.exit_code == 2

    def test_iteration_limit_is_a_numerical_failure(self, tmp_path: Path) -> None:
        config = tmp_path / "run.json"
        config.write_text(
            json.dumps({"beta": 1.5, "lam": 3.0, "n_range": [6], "method": "cg", "max_iter": 1})
        )
        result = runner.invoke(app, ["solve", "-c", str(config), "-o", str(tmp_path)])
        assert result.exit_code == 3

    def test_malformed_config(self, tmp_path: Path) -> None:
        config = tmp_path / "run.json"
        config.write_text("{beta: 0.5")
        result = runner.invoke(app, ["solve", "-c", str(config)])
        assert result.exit_code == 2

    def test_dense_size_guard(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app,
            ["solve", "-b", "0.5", "-n", "6", "-m", "dense", "-o", str(tmp_path)],
            env={"TEMPERED_DENSE_SOLVE_LIMIT": "10"},
        )
        assert result.exit_code == 2

    def test_first_rows_are_cached(self, tmp_path: Path) -> None:
        cache_dir = tmp_path / "cache"
        args = ["solve", "-b", "0.5", "-l", "1.5", "-n", "5", "-o", str(tmp_path)]
        env = {"TEMPERED_CACHE_DIR": str(cache_dir)}
        assert runner.invoke(app, args, env=env).exit_code == 0
        assert list(cache_dir.glob("*.npy"))
        assert runner.invoke(app, args, env=env).exit_code == 0


class TestConvergenceCommand:
    """Tests for the convergence command."""

    def test_exact_table(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app,
            "convergence -p example1 -b 0.5 -r 2 -n 4..5".split() + ["-o", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        csv_path = tmp_path / "convergence_example1_r2_b0p5_l0.csv"
        rows = read_rows(csv_path)
        assert rows[0] == ["n", "H_err", "H_rate", "L2_err", "L2_rate", "iterations"]
        assert [row[0] for row in rows[1:]] == ["4", "5"]
        assert rows[1][2] == ""
        assert "e-" in rows[1][1]
        sidecar = json.loads(csv_path.with_suffix(".json").read_text())
        assert sidecar["error_mode"] == "exact"

    def test_successive_table(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app,
            "convergence -p example2 -b 0.5 -l 1.5 -r 1 -n 4".split() + ["-o", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        rows = read_rows(tmp_path / "convergence_example2_r1_b0p5_l1p5.csv")
        assert rows[0][1] == "Hhat_err"
        assert len(rows) == 2

    def test_empty_levels(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["convergence", "-b", "0.5", "-n", "", "-o", str(tmp_path)])
        assert result.exit_code == 2

    def test_conditioning_table_is_rejected(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["convergence", "--table", "2", "-o", str(tmp_path)])
        assert result.exit_code == 2

    def test_unknown_table(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["convergence", "--table", "9", "-o", str(tmp_path)])
        assert result.exit_code == 2
        assert "Unsupported table" in result.output

    def test_unknown_preset(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["convergence", "--preset", "nope", "-o", str(tmp_path)])
        assert result.exit_code == 2
        assert "Unsupported preset" in result.output

    def test_table_and_preset_are_exclusive(self, tmp_path: Path) -> None:
        args = ["convergence", "--table", "1", "--preset", "gauss_s1", "-o", str(tmp_path)]
        assert runner.invoke(app, args).exit_code == 2

    def test_exact_and_successive_errors_side_by_side(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app,
            "convergence -p example1 -b 0.5 -r 2 -n 4..5 --errors both".split()
            + ["-o", str(tmp_path)],
        )
        assert result.exit_code == 0, result.output
        csv_path = tmp_path / "convergence_example1_r2_b0p5_l0.csv"
        rows = read_rows(csv_path)
        assert rows[0][1] == "H_err"
        assert rows[0][5] == "Hhat_err"
        assert len(rows[0]) == 10
        assert all(len(row) == 10 for row in rows[1:])
        sidecar = json.loads(csv_path.with_suffix(".json").read_text())
        assert sidecar["error_mode"] == "both"

    def test_unknown_error_mode(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app, ["convergence", "-b", "0.5", "-n", "4", "--errors", "bogus", "-o", str(tmp_path)]
        )
        assert result.exit_code == 2
        assert "Unsupported errors" in result.output


class TestConditionCommand:
    """Tests for the condition command."""

    def test_table(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app, ["condition", "-b", "1.0", "-l", "3", "-r", "2", "-n", "4,5", "-o", str(tmp_path)]
        )
        assert result.exit_code == 0, result.output
        csv_path = tmp_path / "condition_r2_b1_l3.csv"
        rows = read_rows(csv_path)
        assert rows[0] == ["n", "cond", "rate", "iter_cg", "cond_pcg", "iter_pcg"]
        assert len(rows) == 3
        sidecar = json.loads(csv_path.with_suffix(".json").read_text())
        assert [t["n"] for t in sidecar["extra"]["timings"]] == [4, 5]
        assert sidecar["estimator"]

    def test_dense_timing_baseline(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app,
            ["condition", "-b", "0.6", "-r", "2", "-n", "3..5", "-o", str(tmp_path)],
            env={"TEMPERED_DENSE_SOLVE_LIMIT": "20"},
        )
        assert result.exit_code == 0, result.output
        sidecar = json.loads((tmp_path / "condition_r2_b0p6_l0.json").read_text())
        timings = {t["n"]: t["dense"] for t in sidecar["extra"]["timings"]}
        assert timings[3] is not None and timings[3] >= 0.0
        assert timings[4] is not None
        # N = 31 at n = 5 exceeds the limit
        assert timings[5] is None

    def test_convergence_table_is_rejected(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["condition", "--table", "1", "-o", str(tmp_path)])
        assert result.exit_code == 2


class TestEigsCommand:
    """Tests for the eigs command."""

    def test_spectra_and_script(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app, ["eigs", "-b", "0.8", "-l", "1", "-r", "1", "-n", "3..4", "-o", str(tmp_path)]
        )
        assert result.exit_code == 0, result.output
        rows = read_rows(tmp_path / "eigs_r1_b0p8_l1_n4.csv")
        assert rows[0] == ["index", "plain", "preconditioned"]
        assert len(rows) == 1 + 2**4
        script = (tmp_path / "eigs_r1_b0p8_l1.gp").read_text()
        assert "eigs_r1_b0p8_l1_n3.csv" in script

    def test_size_guard(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["eigs", "-b", "0.5", "-n", "12", "-o", str(tmp_path)])
        assert result.exit_code == 2


class TestSymbolCommand:
    """Tests for the symbol command."""

    def test_dump_is_nonnegative(self, tmp_path: Path) -> None:
        result = runner.invoke(
            app, ["symbol", "-b", "1.5", "-l", "3", "--points", "11", "-o", str(tmp_path)]
        )
        assert result.exit_code == 0, result.output
        rows = read_rows(tmp_path / "symbol_b1p5_l3.csv")
        assert rows[0] == ["xi", "G", "G_over_c"]
        assert len(rows) == 12
        assert all(float(row[1]) >= 0.0 for row in rows[1:])

    def test_invalid_parameters(self, tmp_path: Path) -> None:
        result = runner.invoke(app, ["symbol", "-b", "2.5", "-o", str(tmp_path)])
        assert result.exit_code == 2
