"""
Тесты для FitFileRepository.
"""
import json
import math

import numpy as np
import pytest

from src.domain import FitMethod, FitResult, MalformedInput
from src.storage import FitFileRepository, fit_to_record, mixture_to_record


@pytest.fixture
def fit(two_atom_mixture) -> FitResult:
    """Результат с бесконечностью в диагностике."""
    return FitResult(
        mixture=two_atom_mixture,
        objective=-1.25,
        max_gradient=1.0000001,
        iterations=7,
        converged=True,
        method=FitMethod.MLE,
        diagnostics={"stationarity_residual": math.inf, "atoms": 2},
    )


def write_json(tmp_path, payload) -> FitFileRepository:
    path = tmp_path / "fit.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return FitFileRepository(path)


class TestRecords:
    """Тесты fit_to_record() и mixture_to_record()."""

    def test_fields(self, fit):
        record = fit_to_record(fit, truth="exp1")
        assert record["k"] == 3
        assert record["method"] == "mle"
        assert record["support"] == [1.0, 3.0]
        assert record["mass"] == pytest.approx(1.0)
        assert record["diagnostics"]["truth"] == "exp1"
        assert record["diagnostics"]["iterations"] == 7

    def test_manual_by_default(self, two_atom_mixture):
        assert mixture_to_record(two_atom_mixture)["method"] == "manual"


class TestSaveLoad:
    """Тесты FitFileRepository.save() и load()."""

    def test_restores_fit(self, tmp_path, fit):
        """load() восстанавливает смесь и диагностику."""
        repo = FitFileRepository(tmp_path / "out" / "fit.json")
        repo.save(fit)
        loaded = repo.load()
        assert loaded.method is FitMethod.MLE
        assert np.array_equal(loaded.mixture.support, fit.mixture.support)
        assert np.array_equal(loaded.mixture.weights, fit.mixture.weights)
        assert loaded.objective == fit.objective
        assert loaded.iterations == 7
        assert loaded.converged

    def test_infinite_diagnostic_written_as_null(self, tmp_path, fit):
        repo = FitFileRepository(tmp_path / "fit.json")
        repo.save(fit)
        record = json.loads(repo.path.read_text(encoding="utf-8"))
        assert record["diagnostics"]["stationarity_residual"] is None

    def test_missing_diagnostics_default(self, tmp_path):
        loaded = write_json(tmp_path, {"k": 2, "method": "manual", "support": [1.0], "weights": [1.0]}).load()
        assert loaded.method is FitMethod.MANUAL
        assert math.isnan(loaded.objective)
        assert not loaded.converged


class TestMalformed:
    """Некорректные fit-файлы."""

    def test_missing_field(self, tmp_path):
        with pytest.raises(MalformedInput) as exc_info:
            write_json(tmp_path, {"k": 2, "method": "mle", "support": [1.0]}).load()
        assert exc_info.value.token == "weights"

    def test_unknown_method(self, tmp_path):
        with pytest.raises(MalformedInput):
            write_json(tmp_path, {"k": 2, "method": "bayes", "support": [1.0], "weights": [1.0]}).load()

    def test_invalid_mixture(self, tmp_path):
        with pytest.raises(MalformedInput):
            write_json(tmp_path, {"k": 2, "method": "mle", "support": [-1.0], "weights": [1.0]}).load()

    def test_not_json(self, tmp_path):
        path = tmp_path / "fit.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(MalformedInput):
            FitFileRepository(path).load()

    def test_not_an_object(self, tmp_path):
        with pytest.raises(MalformedInput):
            write_json(tmp_path, [1, 2, 3]).load()
