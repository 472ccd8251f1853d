"""
Доменные модели (value objects).

Правила:
- Используем dataclasses для immutability
- Модели не знают о файлах и солверах
- Массивы внутри моделей read-only
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional, Sequence

import numpy as np

from src.core.constants import (
    COALESCE_RTOL,
    DEFAULT_ERROR_GRID,
    DEFAULT_ERROR_GRID_POINTS,
    DEFAULT_GRID_DENSITY,
    DEFAULT_MAX_INNER_ITER,
    DEFAULT_MAX_OUTER_ITER,
    DEFAULT_PRUNE_WEIGHT,
    DEFAULT_SEARCH_FACTOR_PER_K,
    DEFAULT_TOL,
)
from src.core.types import FloatArray

from .enums import FitMethod
from .exceptions import InvalidArgument


def _frozen_array(values: Any) -> FloatArray:
    arr = np.array(values, dtype=np.float64).ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, slots=True, eq=False)
class Sample:
    """Выборка: положительные наблюдения, отсортированные по возрастанию."""

    values: FloatArray

    def __post_init__(self):
        arr = np.sort(np.array(self.values, dtype=np.float64).ravel())
        if arr.size == 0:
            raise InvalidArgument("Sample must contain at least one observation")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgument("Sample contains non-finite values")
        if arr[0] <= 0.0:
            raise InvalidArgument(f"Sample values must be positive, got {arr[0]!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def min(self) -> float:
        """X_(1)."""
        return float(self.values[0])

    @property
    def max(self) -> float:
        """X_(n)."""
        return float(self.values[-1])

    @property
    def median(self) -> float:
        return float(np.median(self.values))

    def ecdf(self, t: float) -> float:
        """Эмпирическая функция распределения G_n(t) = #{X_i <= t} / n."""
        return float(np.searchsorted(self.values, t, side="right")) / self.n

    def scaled(self, c: float) -> "Sample":
        """Выборка c * X."""
        if c <= 0:
            raise InvalidArgument(f"Scale must be positive, got {c!r}")
        return Sample(self.values * c)

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True, slots=True, eq=False)
class MixingMeasure:
    """
    Атомарная мера F: точки носителя a_1 < ... < a_m и веса w_i > 0.

    Атомы ближе чем 1e-10 * a_m склеиваются при создании (веса суммируются).
    """

    support: FloatArray
    weights: FloatArray

    def __post_init__(self):
        support = np.array(self.support, dtype=np.float64).ravel()
        weights = np.array(self.weights, dtype=np.float64).ravel()
        if support.size == 0:
            raise InvalidArgument("Mixing measure needs at least one atom")
        if support.size != weights.size:
            raise InvalidArgument(f"Support has {support.size} points but {weights.size} weights")
        if not (np.all(np.isfinite(support)) and np.all(np.isfinite(weights))):
            raise InvalidArgument("Mixing measure contains non-finite values")
        if np.any(support <= 0.0):
            raise InvalidArgument("Support points must be positive")
        if np.any(weights <= 0.0):
            raise InvalidArgument("Weights must be positive")

        order = np.argsort(support, kind="stable")
        support, weights = _coalesce(support[order], weights[order])

        object.__setattr__(self, "support", _frozen_array(support))
        object.__setattr__(self, "weights", _frozen_array(weights))

    @classmethod
    def from_atoms(cls, support: Sequence[float], weights: Sequence[float]) -> "MixingMeasure":
        """Строит меру из сырых атомов солвера, выбрасывая нулевые веса."""
        support_arr = np.asarray(support, dtype=np.float64).ravel()
        weights_arr = np.asarray(weights, dtype=np.float64).ravel()
        if support_arr.size != weights_arr.size:
            raise InvalidArgument(f"Support has {support_arr.size} points but {weights_arr.size} weights")
        keep = weights_arr > 0.0
        return cls(support_arr[keep], weights_arr[keep])

    @property
    def m(self) -> int:
        """Количество атомов."""
        return int(self.support.size)

    @property
    def mass(self) -> float:
        """Полная масса (всегда пересчитывается)."""
        return float(np.sum(self.weights))

    def cdf(self, t: float) -> float:
        """F(t) = сумма весов атомов a_i <= t."""
        idx = int(np.searchsorted(self.support, t, side="right"))
        return float(np.sum(self.weights[:idx]))

    def scaled(self, c: float) -> "MixingMeasure":
        return MixingMeasure(self.support * c, self.weights)

    def normalized(self) -> "MixingMeasure":
        return MixingMeasure(self.support, self.weights / self.mass)


def _coalesce(support: FloatArray, weights: FloatArray) -> tuple[FloatArray, FloatArray]:
    """Склеенный атом встаёт в правую точку группы: ядра не теряют покрытых наблюдений."""
    tol = COALESCE_RTOL * support[-1]
    out_support: list[float] = []
    out_weights: list[float] = []
    group_start = support[0]
    group_end = support[0]
    group_weight = 0.0
    for a, w in zip(support, weights):
        if group_weight > 0.0 and a - group_start > tol:
            out_support.append(group_end)
            out_weights.append(group_weight)
            group_start, group_weight = a, 0.0
        group_end = a
        group_weight += w
    out_support.append(group_end)
    out_weights.append(group_weight)
    return np.array(out_support), np.array(out_weights)


@dataclass(frozen=True, slots=True, eq=False)
class KMonotoneMixture:
    """k-монотонная плотность g(x) = sum w_i * k (a_i - x)_+^(k-1) / a_i^k."""

    k: int
    mixing: MixingMeasure

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise InvalidArgument(f"Order k must be an integer >= 1, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))

    @classmethod
    def from_atoms(cls, k: int, support: Sequence[float], weights: Sequence[float]) -> "KMonotoneMixture":
        return cls(k, MixingMeasure.from_atoms(support, weights))

    @property
    def support(self) -> FloatArray:
        return self.mixing.support

    @property
    def weights(self) -> FloatArray:
        return self.mixing.weights

    @property
    def mass(self) -> float:
        return self.mixing.mass

    @property
    def m(self) -> int:
        return self.mixing.m

    @property
    def knot_max(self) -> float:
        """Правый конец носителя a_m."""
        return float(self.support[-1])

    @property
    def measure_atoms(self) -> FloatArray:
        """Веса меры mu{a_i} = k w_i / a_i^k в параметризации через (a - x)_+^(k-1)."""
        return self.k * self.weights / self.support**self.k

    def normalized(self) -> "KMonotoneMixture":
        """g / mass."""
        return KMonotoneMixture(self.k, self.mixing.normalized())

    def scaled(self, c: float) -> "KMonotoneMixture":
        """Плотность для данных c * X: g_c(x) = g(x / c) / c."""
        if c <= 0:
            raise InvalidArgument(f"Scale must be positive, got {c!r}")
        return KMonotoneMixture(self.k, self.mixing.scaled(c))


@dataclass(frozen=True, slots=True, eq=False)
class GridFunction:
    """Значения функции на возрастающей сетке."""

    abscissae: FloatArray
    ordinates: FloatArray

    def __post_init__(self):
        x = _frozen_array(self.abscissae)
        y = _frozen_array(self.ordinates)
        if x.size != y.size:
            raise InvalidArgument(f"Grid has {x.size} abscissae but {y.size} ordinates")
        if x.size > 1 and np.any(np.diff(x) <= 0.0):
            raise InvalidArgument("Grid abscissae must be strictly increasing")
        object.__setattr__(self, "abscissae", x)
        object.__setattr__(self, "ordinates", y)

    def __len__(self) -> int:
        return int(self.abscissae.size)

    def argmax(self) -> tuple[float, float]:
        i = int(np.argmax(self.ordinates))
        return float(self.abscissae[i]), float(self.ordinates[i])

    def argmin(self) -> tuple[float, float]:
        i = int(np.argmin(self.ordinates))
        return float(self.abscissae[i]), float(self.ordinates[i])


@dataclass(frozen=True, slots=True)
class DerivativeValue:
    """Значение производной; at_knot - взят левый предел в точке скачка g^(k-1)."""

    value: float
    at_knot: bool = False

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True, slots=True)
class LikelihoodValue:
    """Логарифм правдоподобия со структурным тегом ошибки."""

    value: float
    error_code: Optional[str] = None

    @property
    def support_deficient(self) -> bool:
        return self.error_code == "SUPPORT_DEFICIENT"

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True, slots=True)
class FitOptions:
    """Параметры солверов MLE и LSE."""

    tol: float = DEFAULT_TOL
    max_outer_iter: int = DEFAULT_MAX_OUTER_ITER
    max_inner_iter: int = DEFAULT_MAX_INNER_ITER
    prune_weight: float = DEFAULT_PRUNE_WEIGHT
    grid_density: int = DEFAULT_GRID_DENSITY
    # None означает 2k
    search_upper_factor: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.tol < 1.0:
            raise InvalidArgument(f"tol must lie in (0, 1), got {self.tol!r}")
        for name in ("max_outer_iter", "max_inner_iter", "grid_density"):
            if getattr(self, name) < 1:
                raise InvalidArgument(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.prune_weight <= 0.0:
            raise InvalidArgument(f"prune_weight must be positive, got {self.prune_weight!r}")
        if self.search_upper_factor is not None and self.search_upper_factor <= 1.0:
            raise InvalidArgument(f"search_upper_factor must exceed 1, got {self.search_upper_factor!r}")

    def ceiling_factor(self, k: int) -> float:
        """Множитель потолка поиска для порядка k."""
        if self.search_upper_factor is not None:
            return self.search_upper_factor
        return max(DEFAULT_SEARCH_FACTOR_PER_K * k, 2.0)


@dataclass(frozen=True, slots=True)
class FitResult:
    """Результат солвера: смесь плюс диагностика."""

    mixture: KMonotoneMixture
    objective: float
    max_gradient: float
    iterations: int
    converged: bool
    method: FitMethod
    diagnostics: dict[str, Any] = field(default_factory=dict)
    trace: tuple[float, ...] = ()

    @property
    def k(self) -> int:
        return self.mixture.k

    def diagnostics_record(self) -> dict[str, Any]:
        """Диагностика для fit-файла."""
        record: dict[str, Any] = {
            "objective": self.objective,
            "max_gradient": self.max_gradient,
            "iterations": self.iterations,
            "converged": self.converged,
        }
        record.update(self.diagnostics)
        return record


@dataclass(frozen=True, slots=True)
class MleVerification:
    """Отчёт о проверке характеризации MLE."""

    gradient: GridFunction
    max_violation: float
    atom_residuals: tuple[float, ...]
    moment_residual: float
    tail_value: float
    mass: float

    @property
    def max_atom_residual(self) -> float:
        return max(self.atom_residuals, default=0.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": FitMethod.MLE.value,
            "grid_size": len(self.gradient),
            "max_violation": self.max_violation,
            "max_atom_residual": self.max_atom_residual,
            "atom_residuals": list(self.atom_residuals),
            "moment_residual": self.moment_residual,
            "tail_value": self.tail_value,
            "mass": self.mass,
        }


@dataclass(frozen=True, slots=True)
class LseVerification:
    """Отчёт о проверке условий Фенхеля для LSE."""

    gap: GridFunction
    min_gap: float
    knot_residuals: tuple[float, ...]
    stationarity_residual: float
    scale: float
    mass: float

    @property
    def max_knot_residual(self) -> float:
        return max(self.knot_residuals, default=0.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": FitMethod.LSE.value,
            "grid_size": len(self.gap),
            "min_fenchel_gap": self.min_gap,
            "max_violation": max(0.0, -self.min_gap),
            "max_knot_residual": self.max_knot_residual,
            "knot_residuals": list(self.knot_residuals),
            "stationarity_residual": self.stationarity_residual,
            "scale": self.scale,
            "mass": self.mass,
        }


@dataclass(frozen=True, slots=True)
class MinimaxConstants:
    """Константы нижней минимаксной оценки для пары (k, j)."""

    k: int
    j: int
    C_kj: Fraction
    C_kk: Fraction
    lambda1_kj: Fraction
    lambda2_k: Fraction
    d_kj: float


@dataclass(frozen=True, slots=True)
class ExperimentPlan:
    """План симуляционного исследования."""

    distribution: str = "exp1"
    ks: tuple[int, ...] = (3,)
    ns: tuple[int, ...] = (100,)
    replications: int = 1
    seed: int = 17
    grid_lower: float = DEFAULT_ERROR_GRID[0]
    grid_upper: float = DEFAULT_ERROR_GRID[1]
    grid_points: int = DEFAULT_ERROR_GRID_POINTS
    output_dir: Optional[str] = None
    jobs: int = 1
    options: FitOptions = field(default_factory=FitOptions)

    def __post_init__(self):
        if not self.ks or any(k < 1 for k in self.ks):
            raise InvalidArgument(f"Every k must be >= 1, got {self.ks!r}")
        if not self.ns or any(n < 1 for n in self.ns):
            raise InvalidArgument(f"Every n must be >= 1, got {self.ns!r}")
        if self.replications < 1:
            raise InvalidArgument(f"replications must be >= 1, got {self.replications!r}")
        if self.grid_lower <= 0.0 or self.grid_upper <= self.grid_lower:
            raise InvalidArgument(f"Error grid needs 0 < c < x_max, got [{self.grid_lower!r}, {self.grid_upper!r}]")
        if self.grid_points < 2:
            raise InvalidArgument(f"Error grid needs at least 2 points, got {self.grid_points!r}")
        if self.jobs < 1:
            raise InvalidArgument(f"jobs must be >= 1, got {self.jobs!r}")

    def grid(self) -> FloatArray:
        """Сетка [c, x_max] для ошибок."""
        return np.linspace(self.grid_lower, self.grid_upper, self.grid_points)


@dataclass(frozen=True, slots=True)
class DensityJet:
    """G(t) и производные g(t), g'(t), ..., g^(k-1)(t) в одной точке t."""

    cdf: float
    derivatives: tuple[float, ...]

    @property
    def order(self) -> int:
        """Сколько производных (включая нулевую) известно."""
        return len(self.derivatives)
