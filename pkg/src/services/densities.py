"""
Аналитические плотности для симуляций и возмущений.

- Exponential: Exp(rate), k-монотонна при любом k, смешивающая мера Gamma(k+1, rate)
- MixtureDensity: произвольная конечная смесь из fit-файла
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from scipy.special import gammainc

from src.core.types import FloatArray
from src.domain import InvalidArgument, KMonotoneMixture, Sample

from .kernels import derivative_values, mixture_cdf, sample_mixture

logger = logging.getLogger(__name__)


def gamma_mixing_cdf(k: int, t: float) -> float:
    """
    CDF Gamma(k+1, 1) = 1 - e^-t sum_{j<=k} t^j / j!.

    Смешивающая мера Exp(1), рассматриваемой как k-монотонная плотность.
    """
    if t < 0.0:
        raise InvalidArgument(f"gamma_mixing_cdf needs t >= 0, got {t!r}")
    return float(gammainc(k + 1, t))


@dataclass(frozen=True, slots=True)
class Exponential:
    """Плотность rate * exp(-rate * x)."""

    rate: float = 1.0
    name: str = "exp1"

    def __post_init__(self):
        if not self.rate > 0.0:
            raise InvalidArgument(f"Exponential rate must be positive, got {self.rate!r}")

    def derivative(self, j: int, x: npt.ArrayLike) -> FloatArray:
        """g^(j)(x) = (-rate)^j * rate * exp(-rate x)."""
        if j < 0:
            raise InvalidArgument(f"Derivative order must be >= 0, got {j!r}")
        xs = np.asarray(x, dtype=np.float64)
        return (-self.rate) ** j * self.rate * np.exp(-self.rate * xs)

    def cdf(self, x: npt.ArrayLike) -> FloatArray:
        xs = np.asarray(x, dtype=np.float64)
        return -np.expm1(-self.rate * np.maximum(xs, 0.0))

    def mixing_cdf(self, k: int, t: npt.ArrayLike) -> FloatArray:
        """Gamma(k+1, rate)."""
        ts = np.asarray(t, dtype=np.float64)
        return gammainc(k + 1, self.rate * np.maximum(ts, 0.0))

    def sample(self, n: int, seed: int) -> Sample:
        """Обратная функция распределения -log(1 - U) / rate; нули перевыбираются."""
        if n < 1:
            raise InvalidArgument(f"Sample size must be >= 1, got {n!r}")
        rng = np.random.default_rng(seed)
        draws = -np.log1p(-rng.random(n)) / self.rate
        zero = draws <= 0.0
        while np.any(zero):
            draws[zero] = -np.log1p(-rng.random(int(zero.sum()))) / self.rate
            zero = draws <= 0.0
        return Sample(draws)


@dataclass(frozen=True, slots=True)
class MixtureDensity:
    """Конечная k-монотонная смесь как источник данных."""

    mixture: KMonotoneMixture
    name: str = field(default="mixture")

    def derivative(self, j: int, x: npt.ArrayLike) -> FloatArray:
        """Производные до порядка k - 1; в узлах при j = k - 1 берётся левый предел."""
        xs = np.asarray(x, dtype=np.float64)
        return derivative_values(self.mixture, j, xs).reshape(xs.shape)

    def cdf(self, x: npt.ArrayLike) -> FloatArray:
        return np.asarray(mixture_cdf(self.mixture, x), dtype=np.float64)

    def mixing_cdf(self, k: int, t: npt.ArrayLike) -> FloatArray:
        """F(t) по атомам; порядок k должен совпадать с порядком смеси."""
        if k != self.mixture.k:
            raise InvalidArgument(f"Mixture has order {self.mixture.k}, mixing CDF requested for k={k}")
        ts = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.mixture.support, ts, side="right")
        cumulative = np.concatenate([[0.0], np.cumsum(self.mixture.weights)])
        return cumulative[idx]

    def sample(self, n: int, seed: int) -> Sample:
        return sample_mixture(self.mixture.normalized(), n, seed)
