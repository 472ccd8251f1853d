"""
Табличные артефакты: таблицы исследования, кривые для графиков, таблица констант, отчёты.
"""

import json
import logging
from pathlib import Path
from typing import Any, Union

import pandas as pd

from src.core.constants import FITS_DIR, ROWS_FILE, SUMMARY_FILE
from src.domain import OutputFormat

from .fit_files import FitFileRepository

logger = logging.getLogger(__name__)

TIMINGS_FILE = "timings.csv"


def _write_csv(frame: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    # repr-форма float и "\n" в конце строк: одинаковые байты на любой платформе
    frame.to_csv(path, index=False, lineterminator="\n", float_format=None)


class StudyRepository:
    """Каталог результатов симуляционного исследования."""

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)

    @property
    def rows_path(self) -> Path:
        return self.output_dir / ROWS_FILE

    @property
    def summary_path(self) -> Path:
        return self.output_dir / SUMMARY_FILE

    @property
    def timings_path(self) -> Path:
        return self.output_dir / TIMINGS_FILE

    def save(
        self,
        rows: pd.DataFrame,
        summary: pd.DataFrame,
        timings: pd.DataFrame,
        fits: list[tuple[str, dict[str, Any]]],
    ) -> None:
        """
        Пишет rows.csv, summary.csv, timings.csv и fits/*.json.

        Время работы лежит отдельно: rows.csv и summary.csv детерминированы.
        """
        _write_csv(rows, self.rows_path)
        _write_csv(summary, self.summary_path)
        _write_csv(timings, self.timings_path)
        for name, record in fits:
            FitFileRepository(self.output_dir / FITS_DIR / f"{name}.json").save_record(record)
        logger.info(f"✅ Study written to {self.output_dir} ({len(rows)} rows, {len(fits)} fit-files)")

    def load_rows(self) -> pd.DataFrame:
        return pd.read_csv(self.rows_path)

    def load_summary(self) -> pd.DataFrame:
        return pd.read_csv(self.summary_path)


def write_curves(frame: pd.DataFrame, path: Union[str, Path]) -> None:
    """CSV кривых t, g_fit, g0, F_fit, F0."""
    _write_csv(frame, Path(path))
    logger.info(f"✅ Curves written to {path} ({len(frame)} points)")


def render_table(frame: pd.DataFrame, fmt: OutputFormat) -> str:
    """Таблица как CSV или выровненный текст."""
    if fmt is OutputFormat.CSV:
        return frame.to_csv(index=False, lineterminator="\n")
    return frame.to_string(index=False) + "\n"


def write_report(report: dict[str, Any], path: Union[str, Path]) -> None:
    """JSON-отчёт проверки."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
