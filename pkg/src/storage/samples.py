"""
Репозиторий выборок: CSV, одно наблюдение в строке, необязательный заголовок "x".
"""

import logging
import re
from pathlib import Path
from typing import Union

import numpy as np

from src.core.constants import SAMPLE_HEADER
from src.domain import InvalidArgument, MalformedInput, Sample

logger = logging.getLogger(__name__)

# Только точка как десятичный разделитель, без локалей и подчёркиваний
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


class SampleRepository:
    """Файл с выборкой."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def load(self) -> Sample:
        """
        Читает выборку.

        Raises:
            MalformedInput: файл не читается, токен не число или наблюдение не положительно
        """
        try:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise MalformedInput(str(self.path), None, str(self.path), reason=f"cannot read file ({e.strerror})")

        values: list[float] = []
        for number, raw in enumerate(lines, start=1):
            token = raw.strip()
            if not token:
                continue
            if number == 1 and token == SAMPLE_HEADER:
                continue
            if not _NUMBER.match(token):
                raise MalformedInput(str(self.path), number, token)
            value = float(token)
            if not value > 0.0:
                raise MalformedInput(str(self.path), number, token, reason="observation must be positive")
            values.append(value)

        if not values:
            raise MalformedInput(str(self.path), None, "", reason="no observations")
        logger.debug(f"Loaded {len(values)} observations from {self.path}")
        return Sample(np.array(values))

    def save(self, sample: Sample) -> None:
        """Пишет выборку с заголовком; числа в кратчайшем точном представлении."""
        if sample.n == 0:
            raise InvalidArgument("Cannot save an empty sample")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        body = "\n".join(repr(float(v)) for v in sample.values)
        self.path.write_text(f"{SAMPLE_HEADER}\n{body}\n", encoding="utf-8")
