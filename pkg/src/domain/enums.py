"""
Доменные перечисления.
"""

from enum import Enum


class FitMethod(Enum):
    """Способ получения смеси в fit-файле."""

    MLE = "mle"
    LSE = "lse"
    MANUAL = "manual"

    def __str__(self) -> str:
        return self.value

    @property
    def display_name(self) -> str:
        """Человекочитаемое название."""
        names = {
            self.MLE: "maximum likelihood",
            self.LSE: "least squares",
            self.MANUAL: "manual",
        }
        return names[self]

    @property
    def is_estimator(self) -> bool:
        """Получена ли смесь солвером."""
        return self in (self.MLE, self.LSE)


class OutputFormat(Enum):
    """Формат таблицы констант."""

    TEXT = "text"
    CSV = "csv"

    def __str__(self) -> str:
        return self.value
