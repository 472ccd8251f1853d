"""
Поиск нового атома для алгоритмов сокращения носителя.

Целевые функции обоих солверов кусочно-полиномиальны: между точками излома
(точки выборки и атомы) они совпадают с многочленом известной степени.
Каждый кусок интерполируется точно в узлах Чебышёва, экстремумы берутся
из корней производной. Сетка кандидатов остаётся для проверки на плотной сетке.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev as C

from src.core.types import FloatArray
from src.domain import Sample

logger = logging.getLogger(__name__)

# Точек хвостовой сетки на единицу grid_density
_TAIL_POINTS_PER_DENSITY = 32

# Мнимая часть корня, при которой он ещё считается вещественным
_REAL_ROOT_ATOL = 1e-9

# Старшие коэффициенты ниже этой доли от максимального отбрасываются
_TRIM_RTOL = 1e-13

Objective = Callable[[FloatArray], FloatArray]
Transform = Callable[[FloatArray, int], FloatArray]


def candidate_grid(sample: Sample, k: int, ceiling: float, grid_density: int) -> FloatArray:
    """
    Сетка кандидатов на (X_(1), ceiling]; для k = 1 левый конец X_(1) включён.

    Точки выборки, k * X_i, grid_density точек в каждом промежутке и хвост до потолка.
    Результат отсортирован и без повторов.
    """
    x = np.unique(sample.values)
    pieces = [x, k * x]

    if x.size > 1:
        fractions = np.arange(1, grid_density + 1) / (grid_density + 1)
        ratio = np.log(x[1:] / x[:-1])
        pieces.append((x[:-1, None] * np.exp(ratio[:, None] * fractions[None, :])).ravel())

    tail = np.geomspace(x[-1], ceiling, grid_density * _TAIL_POINTS_PER_DENSITY + 1)
    pieces.append(tail[1:])
    pieces.append([ceiling])

    grid = np.unique(np.concatenate(pieces))
    lower = sample.min
    keep = (grid >= lower) if k == 1 else (grid > lower)
    return grid[keep & (grid <= ceiling)]


@lru_cache(maxsize=32)
def _chebyshev_basis(degree: int) -> tuple[FloatArray, FloatArray]:
    """Узлы Чебышёва первого рода и обратная матрица Вандермонда."""
    count = degree + 1
    nodes = np.cos(np.pi * (np.arange(count) + 0.5) / count)
    return nodes, np.linalg.inv(C.chebvander(nodes, degree))


@dataclass(frozen=True, slots=True, eq=False)
class Pieces:
    """Кусочный многочлен: коэффициенты Чебышёва на [-1, 1] каждого куска [lo, hi]."""

    lo: FloatArray
    hi: FloatArray
    coeffs: FloatArray

    @property
    def mid(self) -> FloatArray:
        return (self.lo + self.hi) / 2.0

    @property
    def half(self) -> FloatArray:
        return (self.hi - self.lo) / 2.0

    def roots(self, transform: Optional[Transform] = None) -> FloatArray:
        """
        Вещественные корни внутри кусков.

        По умолчанию ищутся корни производной; transform(c, i) заменяет
        многочлен куска i другим многочленом в той же переменной.
        """
        found: list[FloatArray] = []
        for i in range(self.lo.size):
            c = self.coeffs[:, i]
            poly = C.chebder(c) if transform is None else transform(c, i)
            scale = float(np.max(np.abs(poly))) if poly.size else 0.0
            if scale == 0.0:
                continue
            poly = C.chebtrim(poly, _TRIM_RTOL * scale)
            if poly.size < 2:
                continue
            r = C.chebroots(poly)
            u = r.real[np.abs(r.imag) <= _REAL_ROOT_ATOL * (1.0 + np.abs(r.real))]
            u = u[(u > -1.0) & (u < 1.0)]
            if u.size:
                found.append(self.mid[i] + self.half[i] * u)
        if not found:
            return np.empty(0)
        return np.unique(np.concatenate(found))


def interpolate_pieces(f: Objective, edges: FloatArray, degree: int) -> Pieces:
    """
    Интерполирует f многочленом степени degree на каждом куске [edges[i], edges[i+1]].

    Точно, если f на куске - многочлен не выше этой степени. Узлы лежат строго
    внутри кусков, значения на изломах не используются.
    """
    edges = np.asarray(edges, dtype=np.float64)
    lo, hi = edges[:-1], edges[1:]
    nodes, inverse = _chebyshev_basis(degree)
    points = (lo + hi)[None, :] / 2.0 + (hi - lo)[None, :] / 2.0 * nodes[:, None]
    values = np.asarray(f(points.ravel()), dtype=np.float64).reshape(points.shape)
    return Pieces(lo=lo, hi=hi, coeffs=inverse @ values)


def best_index(values: FloatArray, tol: float, maximize: bool = True) -> int:
    """Индекс экстремума; из значений в пределах tol от него берётся первый (наименьшее t)."""
    oriented = values if maximize else -values
    best = float(np.max(oriented))
    return int(np.flatnonzero(oriented >= best - tol)[0])


def is_new_atom(t: float, support: FloatArray, scale: float, rtol: float) -> bool:
    """True, если t дальше rtol * scale от всех атомов."""
    return bool(support.size == 0 or np.min(np.abs(support - t)) > rtol * scale)


def nearest_atom(t: float, support: FloatArray) -> int:
    return int(np.argmin(np.abs(support - t)))
