"""
Тесты для SampleRepository.
"""
import numpy as np
import pytest

from src.domain import MalformedInput, Sample
from src.storage import SampleRepository


class TestLoad:
    """Тесты SampleRepository.load()."""

    def test_plain_values_are_sorted(self, write_sample):
        """load() должен читать по одному числу в строке и сортировать."""
        sample = SampleRepository(write_sample("2.5\n0.5\n1e0\n")).load()
        assert np.array_equal(sample.values, [0.5, 1.0, 2.5])

    def test_header_and_blank_lines(self, write_sample):
        """Заголовок x и пустые строки пропускаются."""
        sample = SampleRepository(write_sample("x\n1.5\n\n  \n3\n")).load()
        assert sample.n == 2

    def test_header_only_on_first_line(self, write_sample):
        with pytest.raises(MalformedInput) as exc_info:
            SampleRepository(write_sample("1.0\nx\n")).load()
        assert exc_info.value.line == 2

    def test_malformed_token_reports_line(self, write_sample):
        """Ошибка разбора содержит номер строки и токен."""
        with pytest.raises(MalformedInput) as exc_info:
            SampleRepository(write_sample("x\n1.0\n2,5\n")).load()
        assert exc_info.value.line == 3
        assert exc_info.value.token == "2,5"
        assert exc_info.value.code == "MALFORMED_INPUT"

    @pytest.mark.parametrize("token", ["0", "-1.5", "nan", "inf"])
    def test_nonpositive_or_nonfinite(self, write_sample, token):
        with pytest.raises(MalformedInput):
            SampleRepository(write_sample(f"1.0\n{token}\n")).load()

    def test_empty_file(self, write_sample):
        with pytest.raises(MalformedInput):
            SampleRepository(write_sample("x\n\n")).load()

    def test_missing_file(self, tmp_path):
        with pytest.raises(MalformedInput):
            SampleRepository(tmp_path / "absent.csv").load()


class TestSave:
    """Тесты SampleRepository.save()."""

    def test_written_values_read_back_exactly(self, tmp_path):
        """Числа пишутся через repr и читаются без потерь."""
        sample = Sample([0.1, 1.0 / 3.0, 7.25])
        repo = SampleRepository(tmp_path / "nested" / "sample.csv")
        repo.save(sample)
        assert repo.path.read_text(encoding="utf-8").startswith("x\n")
        assert np.array_equal(repo.load().values, sample.values)
