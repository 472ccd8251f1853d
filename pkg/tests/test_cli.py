"""
Тесты командной строки.
"""
import json
from pathlib import Path

import pandas as pd
import pytest

from src.cli import build_parser, run
from src.core.config import get_config
from src.domain import UsageError
from src.services.densities import Exponential
from src.storage import SampleRepository


@pytest.fixture
def sample_path(tmp_path: Path) -> Path:
    """40 наблюдений Exp(1) на диске."""
    path = tmp_path / "data.csv"
    SampleRepository(path).save(Exponential().sample(40, seed=11))
    return path


@pytest.fixture
def fresh_config():
    """Сбрасывает кэш конфига до и после теста."""
    get_config.cache_clear()
    yield
    get_config.cache_clear()


@pytest.fixture
def fitted(tmp_path: Path, sample_path: Path) -> Path:
    """fit-файл MLE для k = 2."""
    out = tmp_path / "fit.json"
    assert run(["fit", "--method", "mle", "--k", "2", "--input", str(sample_path), "--out", str(out)]) == 0
    return out


class TestParser:
    """Тесты build_parser()."""

    def test_missing_argument_raises_usage_error(self):
        with pytest.raises(UsageError):
            build_parser().parse_args(["fit", "--method", "mle"])

    def test_lists(self):
        args = build_parser().parse_args(["bounds", "--k", "3", "--x0", "1", "--g0", "0.5", "--gk", "-1", "--j", "0,2"])
        assert args.j == (0, 2)

    def test_help_exits_zero(self):
        assert run(["--help"]) == 0

    @pytest.mark.parametrize(
        "argv",
        [
            ["fit", "--method", "mle"],
            ["fit", "--method", "em", "--k", "2", "--input", "a", "--out", "b"],
            ["bounds", "--k", "0", "--x0", "1", "--g0", "1", "--gk", "1"],
            ["simulate", "--k", "2", "--n", "ten"],
            ["unknown"],
        ],
    )
    def test_usage_errors_exit_one(self, argv):
        assert run(argv) == 1


class TestBounds:
    """bounds."""

    def test_text_table(self, capsys):
        assert run(["bounds", "--k", "3", "--x0", "1", "--g0", "0.3679", "--gk", "-0.3679"]) == 0
        out = capsys.readouterr().out
        assert "lambda2_k" in out
        assert len(out.strip().splitlines()) == 4

    def test_csv_file(self, tmp_path):
        out = tmp_path / "bounds.csv"
        argv = ["bounds", "--k", "2", "--x0", "1", "--g0", "0.3679", "--gk", "0.3679", "--format", "csv"]
        assert run(argv + ["--out", str(out)]) == 0
        table = pd.read_csv(out)
        assert list(table["j"]) == [0, 1]
        assert pd.isna(table["mixing_bound"].iloc[0])
        assert table["mixing_bound"].iloc[1] > 0.0

    def test_order_one_rejected(self):
        assert run(["bounds", "--k", "1", "--x0", "1", "--g0", "1", "--gk", "-1"]) == 1

    def test_j_out_of_range(self):
        assert run(["bounds", "--k", "2", "--x0", "1", "--g0", "1", "--gk", "1", "--j", "2"]) == 1


class TestFitVerify:
    """fit + verify."""

    def test_fit_writes_file(self, fitted, capsys):
        record = json.loads(fitted.read_text(encoding="utf-8"))
        assert record["k"] == 2
        assert record["method"] == "mle"
        assert sum(record["weights"]) == pytest.approx(1.0)

    def test_verify_passes(self, fitted, sample_path, tmp_path):
        report = tmp_path / "report.json"
        argv = ["verify", "--fit", str(fitted), "--input", str(sample_path), "--grid", "256", "--tol", "1e-5"]
        assert run(argv + ["--strict", "--out", str(report)]) == 0
        assert json.loads(report.read_text(encoding="utf-8"))["k"] == 2

    def test_verify_strict_fails_on_tampered_weights(self, fitted, sample_path):
        record = json.loads(fitted.read_text(encoding="utf-8"))
        record["weights"] = [1.1 * w for w in record["weights"]]
        fitted.write_text(json.dumps(record), encoding="utf-8")
        argv = ["verify", "--fit", str(fitted), "--input", str(sample_path), "--grid", "256"]
        assert run(argv) == 0
        assert run(argv + ["--strict"]) == 2

    def test_lse_fit(self, tmp_path, sample_path):
        out = tmp_path / "lse.json"
        assert run(["fit", "--method", "lse", "--k", "2", "--input", str(sample_path), "--out", str(out)]) == 0
        assert json.loads(out.read_text(encoding="utf-8"))["method"] == "lse"

    def test_strict_fit_without_convergence(self, tmp_path, sample_path):
        out = tmp_path / "fit.json"
        argv = ["fit", "--method", "mle", "--k", "3", "--input", str(sample_path), "--out", str(out)]
        assert run(argv + ["--max-iter", "1", "--tol", "1e-10", "--strict"]) == 2
        assert out.exists()

    def test_malformed_sample(self, tmp_path, write_sample):
        path = write_sample("x\n1.0\nabc\n")
        argv = ["fit", "--method", "mle", "--k", "2", "--input", str(path), "--out", str(tmp_path / "f.json")]
        assert run(argv) == 1


class TestInvert:
    """invert."""

    def test_needs_points_or_curves(self, fitted):
        assert run(["invert", "--fit", str(fitted)]) == 1

    def test_points(self, fitted, capsys):
        assert run(["invert", "--fit", str(fitted), "--t", "0.5,1,2"]) == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 3

    def test_curves_with_truth(self, fitted, tmp_path):
        curves = tmp_path / "curves.csv"
        argv = ["invert", "--fit", str(fitted), "--curves", str(curves), "--truth", "exp1", "--grid-points", "20"]
        assert run(argv) == 0
        frame = pd.read_csv(curves)
        assert len(frame) == 20
        assert frame["F0"].notna().all()


class TestSimulate:
    """simulate."""

    def test_writes_tables(self, tmp_path):
        out = tmp_path / "study"
        argv = ["simulate", "--k", "2", "--n", "20", "--reps", "2", "--seed", "3", "--jobs", "1"]
        assert run(argv + ["--grid-points", "16", "--out", str(out)]) == 0
        rows = pd.read_csv(out / "rows.csv")
        assert len(rows) == 4
        assert (out / "summary.csv").exists()
        assert (out / "timings.csv").exists()
        assert len(list((out / "fits").glob("*.json"))) == 4
        record = json.loads(next((out / "fits").glob("mle_*.json")).read_text(encoding="utf-8"))
        assert record["diagnostics"]["truth"] == "exp1"

    def test_mixture_truth_with_other_order(self, fitted, tmp_path):
        """fit-файл k = 2 как истина для k = 3: ошибка аргументов до запуска."""
        argv = ["simulate", "--dist", str(fitted), "--k", "3", "--n", "20", "--reps", "1", "--jobs", "1"]
        assert run(argv + ["--out", str(tmp_path / "study")]) == 1
        assert not (tmp_path / "study").exists()


class TestEnvironmentAndFiles:
    """Ошибки окружения и записи файлов дают код 1 без трассировки."""

    def test_bad_seed_in_environment(self, monkeypatch, fresh_config, capsys):
        monkeypatch.setenv("KMONO_SEED", "seventeen")
        assert run(["bounds", "--k", "3", "--x0", "1", "--g0", "0.3679", "--gk", "-0.3679"]) == 1
        assert "KMONO_SEED" in capsys.readouterr().err

    def test_unwritable_output(self, tmp_path, sample_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory\n", encoding="utf-8")
        out = blocker / "fit.json"
        assert run(["fit", "--method", "mle", "--k", "2", "--input", str(sample_path), "--out", str(out)]) == 1
        assert "error:" in capsys.readouterr().err
