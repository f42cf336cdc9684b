import re

import pytest
from click.testing import CliRunner

from BackEnd_01_ARC_Core import ARCInputError
from BackEnd_03_OneWay_Trading import MarketSpec
from BackEnd_06_Reports import read_curve_csv
from FrontEnd import RunConfig, main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def classic_file(tmp_path):
    path = tmp_path / "classic.txt"
    path.write_text("# two rows, two scenarios\nmatrix 2 2\n3 1\n2 2\n")
    return path


class TestRunConfig:
    def test_betas(self):
        config = RunConfig("sweep", "classic", 0.0, 1.0, 5)
        assert config.betas.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(command="sweep", source="classic", beta_count=1),
            dict(command="sweep", source="classic", beta_start=1.0, beta_stop=0.5),
            dict(command="cr", source="classic", tolerance=0.0),
            dict(command="cr"),
            dict(command="simulate"),
            dict(command="oneway", market=MarketSpec(1.0, 2.0, 2), crosscheck=(1,)),
            dict(command="plot"),
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ARCInputError):
            RunConfig(**kwargs)


class TestSweep:
    def test_matrix_file(self, runner, tmp_path, classic_file):
        out = tmp_path / "curve.csv"
        result = runner.invoke(main, ["sweep", str(classic_file), "--count", "5", "-o", str(out)])
        assert result.exit_code == 0, result.output
        curve = read_curve_csv(out)
        assert len(curve.samples) == 5
        assert curve.samples[0].value == -2
        assert curve.samples[-1].value == 1
        assert len(out.with_suffix(".dat").read_text().splitlines()) == 5

    def test_oneway_description(self, runner, tmp_path):
        out = tmp_path / "oneway.csv"
        result = runner.invoke(main, ["sweep", "oneway m=1 M=2 T=2", "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert result.output.splitlines()[4].startswith("1.000000 0.250000 ")

    def test_single_point_grid(self, runner, tmp_path, classic_file):
        result = runner.invoke(main, ["sweep", str(classic_file), "--count", "1", "-o", str(tmp_path / "x.csv")])
        assert result.exit_code == 1
        assert "at least 2 points" in result.output

    def test_deterministic(self, runner, tmp_path, classic_file):
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        runner.invoke(main, ["sweep", "capacity", "--count", "7", "-o", str(first)])
        runner.invoke(main, ["sweep", "capacity", "--count", "7", "-o", str(second)])
        assert first.read_bytes() == second.read_bytes()


class TestCr:
    def test_classic(self, runner):
        result = runner.invoke(main, ["cr", "classic"])
        assert result.exit_code == 0, result.output
        assert "beta0: 0.666667" in result.output
        assert "degenerate: false" in result.output

    def test_oneway_reports_closed_form(self, runner):
        result = runner.invoke(main, ["cr", "oneway m=1 M=2 T=2"])
        assert result.exit_code == 0, result.output
        assert "closed-form beta0: 0.853553" in result.output

    def test_degenerate(self, runner, tmp_path):
        path = tmp_path / "zero.txt"
        path.write_text("matrix 1 1\n0\n")
        result = runner.invoke(main, ["cr", str(path)])
        assert result.exit_code == 2
        assert "degenerate: true" in result.output

    def test_missing_source(self, runner, tmp_path):
        result = runner.invoke(main, ["cr", str(tmp_path / "missing.txt")])
        assert result.exit_code == 1


class TestOneWay:
    @pytest.mark.parametrize("T", ["1", "2"])
    def test_curve_is_convex(self, runner, tmp_path, T):
        out = tmp_path / "oneway.csv"
        result = runner.invoke(main, ["oneway", "--m", "1", "--M", "2", "--T", T, "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert "convex: true" in result.output
        assert len(read_curve_csv(out).samples) == 101
        assert (tmp_path / "oneway_policy.csv").exists()

    def test_crosscheck(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["oneway", "--m", "1", "--M", "2", "--T", "2", "--crosscheck", "3", "--crosscheck", "5",
             "--crosscheck", "9", "-o", str(tmp_path / "oneway.csv")],
        )
        assert result.exit_code == 0, result.output
        gaps = [float(g) for g in re.findall(r"gap=(\S+)", result.output)]
        assert len(gaps) == 3
        assert all(b <= a + 1e-6 for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] <= 0.05

    def test_bad_market(self, runner, tmp_path):
        result = runner.invoke(main, ["oneway", "--m", "2", "--M", "1", "--T", "2", "-o", str(tmp_path / "x.csv")])
        assert result.exit_code == 1


class TestSimulate:
    def test_path_file(self, runner, tmp_path):
        path = tmp_path / "path.txt"
        path.write_text("1.5\n1\n")
        out = tmp_path / "trace.csv"
        result = runner.invoke(
            main, ["simulate", "--m", "1", "--M", "2", "--T", "2", "--path-file", str(path), "-o", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert "regret 0.250000" in result.output
        assert "PASS" in result.output
        assert out.exists()

    def test_price_out_of_range(self, runner, tmp_path):
        path = tmp_path / "path.txt"
        path.write_text("2.5\n1\n")
        result = runner.invoke(
            main, ["simulate", "--m", "1", "--M", "2", "--T", "2", "--path-file", str(path), "-o", str(tmp_path / "t.csv")]
        )
        assert result.exit_code == 1
        assert "line 1" in result.output

    def test_random_paths(self, runner, tmp_path):
        out = tmp_path / "simulate.csv"
        result = runner.invoke(
            main, ["simulate", "--m", "1", "--M", "3", "--T", "3", "--beta", "0.8", "--paths", "1000", "-o", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert "failures 0" in result.output
        assert len(out.read_text().splitlines()) == 1001

    def test_needs_paths(self, runner):
        result = runner.invoke(main, ["simulate", "--m", "1", "--M", "2", "--T", "2"])
        assert result.exit_code == 1


class TestVerify:
    def test_single_suite(self, runner):
        result = runner.invoke(main, ["verify", "--only", "slope"])
        assert result.exit_code == 0, result.output
        lines = result.output.splitlines()
        assert all(line.startswith("PASS slope: ") for line in lines[:-1])
        assert lines[-1].endswith(", 0 failed")

    def test_unknown_suite(self, runner):
        result = runner.invoke(main, ["verify", "--only", "speed"])
        assert result.exit_code == 1


class TestUsageErrors:
    @pytest.mark.parametrize(
        "args",
        [
            ["simulate", "--m", "1", "--M", "2", "--paths", "10"],
            ["sweep", "classic", "--start", "abc"],
            ["cr"],
            ["plot", "classic"],
        ],
    )
    def test_exit_as_input_error(self, runner, args):
        result = runner.invoke(main, args)
        assert result.exit_code == 1, result.output

    def test_distinct_from_degenerate(self, runner, tmp_path):
        path = tmp_path / "zero.txt"
        path.write_text("matrix 1 1\n0\n")
        assert runner.invoke(main, ["cr", str(path)]).exit_code == 2
        assert runner.invoke(main, ["cr", str(path), "--tol", "tight"]).exit_code == 1
