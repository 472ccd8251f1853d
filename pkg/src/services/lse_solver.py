"""
Оценка наименьших квадратов на конусе k-монотонных функций.

Параметризация мерой: g(x) = sum c_i (a_i - x)_+^(k-1), c_i = k w_i / a_i^k.
Критерий Phi(c) = 1/2 c'Rc - c's, где R_ij = r_k(a_i, a_j), s_i = s_nk(a_i).
Оптимальность (условия Фенхеля): H~(t) >= Y(t) везде, равенство в узлах.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy.linalg import LinAlgError, cholesky

from src.core.constants import (
    CEILING_DOUBLINGS,
    CEILING_HUG_RTOL,
    COLLINEAR_RTOL,
    EVAL_CHUNK,
    MAX_NEW_ATOMS,
    MERGE_RTOL,
)
from src.core.types import FloatArray
from src.domain import (
    FitMethod,
    FitOptions,
    FitResult,
    GridFunction,
    InvalidArgument,
    KMonotoneMixture,
    LseVerification,
    Sample,
)

from .kernels import eval_mixture, kernel_matrix, positive_power
from .support_search import best_index, candidate_grid, interpolate_pieces, is_new_atom, nearest_atom
from .weights import independence, quadratic_line_search, solve_quadratic_nnls

logger = logging.getLogger(__name__)


@lru_cache(maxsize=64)
def _legendre(k: int) -> tuple[FloatArray, FloatArray]:
    nodes, weights = np.polynomial.legendre.leggauss(k)
    return nodes, weights


def rk_matrix(k: int, s: npt.ArrayLike, t: npt.ArrayLike) -> FloatArray:
    """
    r_k(s_i, t_j) = int_0^{min(s, t)} (s - x)^(k-1) (t - x)^(k-1) dx для всех пар.

    Квадратура Гаусса-Лежандра с k узлами точна для подынтегрального многочлена степени 2k - 2.
    """
    ss = np.asarray(s, dtype=np.float64).ravel()[:, None, None]
    ts = np.asarray(t, dtype=np.float64).ravel()[None, :, None]
    upper = np.minimum(ss, ts)
    nodes, weights = _legendre(k)
    x = upper * (nodes[None, None, :] + 1.0) / 2.0
    integrand = positive_power(ss - x, k - 1) * positive_power(ts - x, k - 1)
    return (upper[..., 0] / 2.0) * (integrand @ weights)


def rk_moment(k: int, s: float, t: float) -> float:
    """r_k(s, t); при k = 1 равно min(s, t)."""
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise InvalidArgument(f"Order k must be an integer >= 1, got {k!r}")
    if not (s > 0.0 and t > 0.0):
        raise InvalidArgument(f"rk_moment needs positive arguments, got ({s!r}, {t!r})")
    return float(rk_matrix(k, [s], [t])[0, 0])


def snk_values(sample: Sample, k: int, t: npt.ArrayLike) -> FloatArray:
    """s_nk на массиве точек."""
    ts = np.asarray(t, dtype=np.float64).ravel()
    out = np.empty(ts.size)
    for start in range(0, ts.size, EVAL_CHUNK):
        chunk = ts[start : start + EVAL_CHUNK]
        out[start : start + chunk.size] = positive_power(chunk[:, None] - sample.values[None, :], k - 1).mean(axis=1)
    return out


def snk(sample: Sample, k: int, t: float) -> float:
    """s_nk(t) = (1/n) sum (t - X_i)_+^(k-1); при k = 1 это G_n(t)."""
    return float(snk_values(sample, k, [t])[0])


def Y_nk(sample: Sample, k: int, t: float) -> float:
    """Y(t) = s_nk(t) / (k-1)!."""
    if t < 0.0:
        raise InvalidArgument(f"Y_nk needs t >= 0, got {t!r}")
    return snk(sample, k, t) / math.factorial(k - 1)


def H_tilde_values(g: KMonotoneMixture, t: npt.ArrayLike) -> FloatArray:
    """H~ на массиве точек; H~(0) = 0."""
    ts = np.asarray(t, dtype=np.float64).ravel()
    out = np.zeros(ts.size)
    pos = ts > 0.0
    if np.any(pos):
        out[pos] = rk_matrix(g.k, ts[pos], g.support) @ g.measure_atoms / math.factorial(g.k - 1)
    return out


def H_tilde(g: KMonotoneMixture, t: float) -> float:
    """H~(t) = int_0^t (t - x)^(k-1) / (k-1)! g(x) dx."""
    if t < 0.0:
        raise InvalidArgument(f"H_tilde needs t >= 0, got {t!r}")
    return float(H_tilde_values(g, [t])[0])


def gram_matrix(k: int, support: npt.ArrayLike) -> FloatArray:
    """Матрица Грама R_ij = r_k(a_i, a_j); симметризуется от округления."""
    a = np.asarray(support, dtype=np.float64).ravel()
    R = rk_matrix(k, a, a)
    return (R + R.T) / 2.0


def phi_objective(measure_atoms: npt.ArrayLike, support: npt.ArrayLike, sample: Sample, k: int) -> float:
    """Phi_n(mu) = 1/2 c'Rc - c's для меры с атомами c_i в точках a_i."""
    c = np.asarray(measure_atoms, dtype=np.float64).ravel()
    if c.size == 0:
        return 0.0
    R = gram_matrix(k, support)
    s = snk_values(sample, k, support)
    return float(0.5 * c @ R @ c - c @ s)


def lse_objective(g: Optional[KMonotoneMixture], sample: Sample) -> float:
    """Q_n(g) = 1/2 int g^2 - (1/n) sum g(X_i); пустая мера даёт 0."""
    if g is None:
        return 0.0
    return phi_objective(g.measure_atoms, g.support, sample, g.k)


def fenchel_directional_derivative(g: KMonotoneMixture, sample: Sample, t: float) -> float:
    """d/de Phi(mu + e delta_t) при e = 0, вычисленная по форме Грама."""
    if not t > 0.0:
        raise InvalidArgument(f"Direction point must be positive, got {t!r}")
    return float(rk_matrix(g.k, [t], g.support)[0] @ g.measure_atoms - snk(sample, g.k, t))


def fenchel_gap_values(g: KMonotoneMixture, sample: Sample, t: npt.ArrayLike) -> FloatArray:
    """H~(t) - Y(t) на массиве точек."""
    ts = np.asarray(t, dtype=np.float64).ravel()
    return H_tilde_values(g, ts) - snk_values(sample, g.k, ts) / math.factorial(g.k - 1)


def fenchel_minima(
    k: int, sample: Sample, support: FloatArray, atoms: FloatArray, ceiling: float
) -> tuple[FloatArray, FloatArray]:
    """
    Точки, среди которых лежат все локальные минимумы H~ - Y на (X_(1), ceiling], и значения в них.

    Между наблюдениями и атомами разность - многочлен степени не выше 2k - 1:
    минимумы лежат в изломах или в корнях производной. Для k = 1 левый конец X_(1) включён.
    """
    factorial = math.factorial(k - 1)

    def gap(t: FloatArray) -> FloatArray:
        return (rk_matrix(k, t, support) @ atoms - snk_values(sample, k, t)) / factorial

    x = np.unique(sample.values)
    inside = support[(support > x[0]) & (support < ceiling)]
    edges = np.unique(np.concatenate([x[x < ceiling], inside, [ceiling]]))
    points = edges
    if edges.size > 1:
        points = np.unique(np.concatenate([edges, interpolate_pieces(gap, edges, 2 * k - 1).roots()]))
    if k > 1:
        points = points[points > x[0]]
    return points, gap(points)


@dataclass(slots=True)
class LseWorkspace:
    """Матрица Грама и линейный член на текущем носителе."""

    k: int
    sample: Sample
    support: FloatArray
    gram: FloatArray
    linear: FloatArray

    @classmethod
    def build(cls, k: int, sample: Sample, support: Sequence[float]) -> "LseWorkspace":
        a = np.sort(np.asarray(support, dtype=np.float64).ravel())
        return cls(k=k, sample=sample, support=a, gram=gram_matrix(k, a), linear=snk_values(sample, k, a))

    def copy(self) -> "LseWorkspace":
        return LseWorkspace(
            k=self.k,
            sample=self.sample,
            support=self.support.copy(),
            gram=self.gram.copy(),
            linear=self.linear.copy(),
        )

    def independence(self, t: float) -> float:
        """Доля нормы столбца нового атома t, не объяснённая текущим носителем."""
        row = rk_matrix(self.k, [t], self.support)[0]
        return independence(self.gram, row, float(rk_matrix(self.k, [t], [t])[0, 0]))

    def add_atom(self, t: float) -> int:
        """Добавляет атом, достраивая строку Грама без пересчёта всей матрицы; возвращает его индекс."""
        i = int(np.searchsorted(self.support, t))
        row = rk_matrix(self.k, [t], self.support)[0]
        diag = rk_matrix(self.k, [t], [t])[0, 0]
        gram = np.insert(np.insert(self.gram, i, row, axis=0), i, np.insert(row, i, diag), axis=1)
        self.support = np.insert(self.support, i, t)
        self.gram = gram
        self.linear = np.insert(self.linear, i, snk(self.sample, self.k, t))
        return i

    def move_atom(self, i: int, t: float) -> None:
        """Переносит атом i в точку t; порядок носителя сохраняется, если t ближе к нему, чем к соседям."""
        self.support[i] = t
        row = rk_matrix(self.k, [t], self.support)[0]
        self.gram[i, :] = row
        self.gram[:, i] = row
        self.linear[i] = snk(self.sample, self.k, t)

    def restrict(self, keep: FloatArray) -> None:
        self.support = self.support[keep]
        self.gram = self.gram[np.ix_(keep, keep)]
        self.linear = self.linear[keep]

    def is_positive_definite(self) -> bool:
        """Разложение Холецкого проходит без регуляризации."""
        try:
            cholesky(self.gram, lower=True)
        except LinAlgError:
            return False
        return True

    def solve(self) -> FloatArray:
        """Оптимальные c >= 0 на текущем носителе."""
        return solve_quadratic_nnls(self.gram, self.linear)

    def objective(self, c: FloatArray) -> float:
        return float(0.5 * c @ self.gram @ c - c @ self.linear)


def _mixture_from_measure(k: int, support: FloatArray, c: FloatArray) -> KMonotoneMixture:
    return KMonotoneMixture.from_atoms(k, support, c * support**k / k)


class LseSolver:
    """Солвер LSE сокращением носителя."""

    def __init__(self, options: Optional[FitOptions] = None):
        self.options = options or FitOptions()

    @staticmethod
    def gap_scale(sample: Sample, k: int) -> float:
        """Масштаб допуска max(1, Y(X_(n)))."""
        return max(1.0, Y_nk(sample, k, sample.max))

    def fit(self, sample: Sample, k: int, initial_support: Optional[Sequence[float]] = None) -> FitResult:
        """
        Подгоняет LSE; масса результата не нормируется.

        Args:
            initial_support: стартовый носитель (по умолчанию {k * median} и при необходимости k * X_(n))
        """
        if isinstance(k, bool) or int(k) != k or k < 1:
            raise InvalidArgument(f"Order k must be an integer >= 1, got {k!r}")
        opts = self.options
        ceiling = opts.ceiling_factor(k) * sample.max
        scale = self.gap_scale(sample, k)
        threshold = opts.tol * scale

        if initial_support is None:
            initial_support = [k * sample.median]
            if kernel_matrix(k, initial_support, [sample.max])[0, 0] <= 0.0:
                initial_support.append(k * sample.max)
        start = np.unique(np.asarray(initial_support, dtype=np.float64))
        if start.size == 0 or np.any(start <= 0.0):
            raise InvalidArgument("Initial support must contain positive points")

        ws = LseWorkspace.build(k, sample, start)
        c = self._solve_and_prune(ws, None)
        trace = [ws.objective(c)]
        converged = False
        min_gap = -np.inf
        iterations = 0

        for iterations in range(1, opts.max_outer_iter + 1):
            points, gaps, ceiling = self._minima(ws, c, ceiling, threshold)
            min_gap = float(np.min(gaps))
            knot_gap = float(np.max(np.abs(ws.gram @ c - ws.linear))) / math.factorial(k - 1)

            if min_gap >= -threshold and knot_gap <= threshold:
                converged = True
                break

            candidates = self._violators(points, gaps, threshold)
            snapshot = ws.copy()
            start_c, moved = self._augment(ws, c, candidates, allow_move=True)
            new_c = self._solve_and_prune(ws, start_c)
            if moved and ws.objective(new_c) > trace[-1]:
                # сдвиг атома не помог: только добавления
                ws = snapshot.copy()
                start_c, _ = self._augment(ws, c, candidates, allow_move=False)
                new_c = self._solve_and_prune(ws, start_c)

            if (
                ws.support.size == snapshot.support.size
                and np.array_equal(ws.support, snapshot.support)
                and np.allclose(new_c, c, rtol=1e-14, atol=0.0)
            ):
                logger.debug(f"No progress at iteration {iterations} (min gap {min_gap:.3e}, knots {knot_gap:.3e})")
                break

            c = new_c
            trace.append(ws.objective(c))
            logger.debug(
                f"🔄 LSE iteration {iterations}: gap={min_gap:.3e}, m={ws.support.size}, Phi={trace[-1]:.12g}"
            )

        mixture = _mixture_from_measure(k, ws.support, c)
        if converged:
            logger.info(f"✅ LSE k={k} n={sample.n}: {mixture.m} atoms, mass {mixture.mass:.6f}")
        else:
            logger.warning(
                f"⚠️ LSE k={k} n={sample.n} did not converge after {iterations} iterations "
                f"(Fenchel gap {min_gap:.3e})"
            )

        fitted = eval_mixture(mixture, sample.values)
        l2 = mixture.measure_atoms @ gram_matrix(k, mixture.support) @ mixture.measure_atoms
        return FitResult(
            mixture=mixture,
            objective=lse_objective(mixture, sample),
            max_gradient=max(0.0, -min_gap),
            iterations=iterations,
            converged=converged,
            method=FitMethod.LSE,
            diagnostics={
                "min_fenchel_gap": float(min_gap),
                "stationarity_residual": float(np.mean(fitted) - l2),
                "mass": mixture.mass,
            },
            trace=tuple(trace),
        )

    def _minima(
        self, ws: LseWorkspace, c: FloatArray, ceiling: float, threshold: float
    ) -> tuple[FloatArray, FloatArray, float]:
        """Минимумы H~ - Y; потолок удваивается, пока нарушение прижато к нему."""
        for doubling in range(CEILING_DOUBLINGS + 1):
            points, gaps = fenchel_minima(ws.k, ws.sample, ws.support, c, ceiling)
            worst = best_index(gaps, threshold, maximize=False)
            hugging = points[worst] >= ceiling * (1.0 - CEILING_HUG_RTOL) and gaps[worst] < -threshold
            if not hugging or doubling == CEILING_DOUBLINGS:
                break
            ceiling *= 2.0
            logger.debug(f"Fenchel minimum at the ceiling, extending search to {ceiling:.6g}")
        return points, gaps, ceiling

    @staticmethod
    def _violators(points: FloatArray, gaps: FloatArray, threshold: float) -> FloatArray:
        """Точки с H~ - Y < -threshold: сначала минимум (из равных - наименьшее t), дальше по возрастанию."""
        first = best_index(gaps, threshold, maximize=False)
        if gaps[first] >= -threshold:
            return np.empty(0)
        order = np.lexsort((points, gaps))
        rest = [i for i in order if gaps[i] < -threshold and i != first]
        return points[[first, *rest][:MAX_NEW_ATOMS]]

    def _augment(
        self, ws: LseWorkspace, c: FloatArray, candidates: FloatArray, allow_move: bool
    ) -> tuple[FloatArray, bool]:
        """
        Добавляет кандидатов в рабочее пространство с нулевым весом.

        Кандидат ближе MERGE_RTOL * X_(n) к атому пропускается. Почти линейно
        зависимый кандидат вместо добавления сдвигает ближайший атом (не больше одного).
        Возвращает стартовую точку для пересчёта весов на новом носителе.
        """
        c = c.copy()
        moved = False
        for t in candidates:
            t = float(t)
            if not is_new_atom(t, ws.support, ws.sample.max, MERGE_RTOL):
                continue
            if ws.independence(t) >= COLLINEAR_RTOL:
                c = np.insert(c, ws.add_atom(t), 0.0)
            elif allow_move and not moved:
                i = nearest_atom(t, ws.support)
                logger.debug(f"Candidate {t:.10g} is collinear with atom {ws.support[i]:.10g}, moving it")
                ws.move_atom(i, t)
                moved = True
        return c, moved

    def _solve_and_prune(self, ws: LseWorkspace, start: Optional[FloatArray]) -> FloatArray:
        """
        NNLS на текущем носителе, затем отсечение атомов с весом меньше prune_weight.

        Если решение NNLS хуже стартовой точки, берётся лучшая точка отрезка между ними.
        """
        c = ws.solve()
        if start is not None and ws.objective(c) > ws.objective(start):
            logger.debug("NNLS solution is worse than the start, line search on the segment")
            c = quadratic_line_search(ws.gram, ws.linear, start, c)
        w = c * ws.support**ws.k / ws.k
        keep = w >= self.options.prune_weight
        if not np.any(keep):
            # вырожденный случай: мера нулевая, оставляем самый правый атом
            keep = np.zeros(ws.support.size, dtype=bool)
            keep[-1] = True
        ws.restrict(keep)
        return c[keep]

    def verify(self, fit: FitResult, sample: Sample, grid_size: int) -> LseVerification:
        """
        Проверяет условия Фенхеля на сетке, дополненной точными минимумами H~ - Y
        на каждом куске между наблюдениями и атомами.
        """
        if grid_size < 2:
            raise InvalidArgument(f"grid_size must be >= 2, got {grid_size!r}")
        g = fit.mixture
        k = g.k
        ceiling = max(self.options.ceiling_factor(k) * sample.max, g.knot_max)

        def objective(t: FloatArray) -> FloatArray:
            return fenchel_gap_values(g, sample, t)

        grid = np.unique(
            np.concatenate(
                [
                    np.geomspace(sample.min / 4.0, ceiling, grid_size),
                    candidate_grid(sample, k, ceiling, self.options.grid_density),
                    g.support,
                    fenchel_minima(k, sample, g.support, g.measure_atoms, ceiling)[0],
                ]
            )
        )
        values = objective(grid)

        fitted = eval_mixture(g, sample.values)
        l2 = float(g.measure_atoms @ gram_matrix(k, g.support) @ g.measure_atoms)
        report = LseVerification(
            gap=GridFunction(grid, values),
            min_gap=float(np.min(values)),
            knot_residuals=tuple(float(abs(v)) for v in objective(g.support)),
            stationarity_residual=float(np.mean(fitted)) - l2,
            scale=self.gap_scale(sample, k),
            mass=g.mass,
        )
        logger.debug(
            f"LSE verification: min gap {report.min_gap:.3e}, "
            f"stationarity residual {report.stationarity_residual:.3e}"
        )
        return report


def fit_lse(
    sample: Sample,
    k: int,
    options: Optional[FitOptions] = None,
    initial_support: Optional[Sequence[float]] = None,
) -> FitResult:
    """Подгонка LSE с заданными опциями."""
    return LseSolver(options).fit(sample, k, initial_support)


def verify_lse(
    fit: FitResult, sample: Sample, grid_size: int, options: Optional[FitOptions] = None
) -> LseVerification:
    return LseSolver(options).verify(fit, sample, grid_size)
