from typing import Protocol, runtime_checkable

import numpy.typing as npt

from src.core.types import FloatArray
from src.domain import Sample


@runtime_checkable
class AnalyticDensity(Protocol):
    """Плотность с точными производными любого порядка."""

    name: str

    def derivative(self, j: int, x: npt.ArrayLike) -> FloatArray:
        ...

    def cdf(self, x: npt.ArrayLike) -> FloatArray:
        ...

    def mixing_cdf(self, k: int, t: npt.ArrayLike) -> FloatArray:
        ...

    def sample(self, n: int, seed: int) -> Sample:
        ...
