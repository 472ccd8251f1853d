"""
Оценка максимального правдоподобия k-монотонной плотности.

Сокращение носителя: атомы добавляются в точках максимума градиентной функции
H(t) = (1/n) sum k (t - X_i)_+^(k-1) / t^k / g(X_i), затем веса пересчитываются
на фиксированном носителе. Оптимальность: H <= 1 везде и H = 1 на носителе.
"""

import logging
from typing import Optional

import numpy as np
from numpy.polynomial import chebyshev as C

from src.core.constants import COLLINEAR_RTOL, EM_RTOL, EVAL_CHUNK, MAX_NEW_ATOMS, MERGE_RTOL
from src.core.types import FloatArray
from src.domain import (
    FitMethod,
    FitOptions,
    FitResult,
    GridFunction,
    InvalidArgument,
    KMonotoneMixture,
    LikelihoodValue,
    MleVerification,
    Sample,
    SupportDeficient,
)

from .kernels import eval_mixture, kernel_matrix
from .support_search import best_index, candidate_grid, interpolate_pieces, is_new_atom, nearest_atom
from .weights import em_weights, independence, mean_loglik, newton_weights

logger = logging.getLogger(__name__)


def log_likelihood(g: KMonotoneMixture, sample: Sample) -> LikelihoodValue:
    """(1/n) sum log g(X_i); -inf с тегом SUPPORT_DEFICIENT, если g(X_i) = 0."""
    values = eval_mixture(g, sample.values)
    if np.any(values <= 0.0):
        return LikelihoodValue(value=-np.inf, error_code="SUPPORT_DEFICIENT")
    return LikelihoodValue(value=float(np.mean(np.log(values))))


def adjusted_likelihood(g: KMonotoneMixture, sample: Sample) -> LikelihoodValue:
    """psi_n(g) = l_n(g) - масса; g может быть не нормирована."""
    ll = log_likelihood(g, sample)
    if ll.support_deficient:
        return ll
    return LikelihoodValue(value=ll.value - g.mass)


def _density_at_data(g: KMonotoneMixture, sample: Sample) -> FloatArray:
    values = eval_mixture(g, sample.values)
    bad = np.flatnonzero(values <= 0.0)
    if bad.size:
        raise SupportDeficient(float(sample.values[bad[0]]), g.knot_max)
    return values


def _gradient(k: int, data: FloatArray, inv_density: FloatArray, t: FloatArray) -> FloatArray:
    ts = np.asarray(t, dtype=np.float64).ravel()
    out = np.empty(ts.size)
    for start in range(0, ts.size, EVAL_CHUNK):
        chunk = ts[start : start + EVAL_CHUNK]
        out[start : start + chunk.size] = inv_density @ kernel_matrix(k, chunk, data) / data.size
    return out


def _stationarity(c: FloatArray, ratio: float, k: int) -> FloatArray:
    """t P'(t) - k P(t) в переменной куска u, где t = mid + half * u и ratio = mid / half."""
    dc = C.chebder(c)
    return C.chebsub(C.chebadd(ratio * dc, C.chebmulx(dc)), k * c)


def gradient_peaks(k: int, data: FloatArray, inv_density: FloatArray) -> tuple[FloatArray, FloatArray]:
    """
    Точки, среди которых лежат все локальные максимумы H, и значения H в них.

    При k = 1 функция H убывает между наблюдениями, кандидаты - сами наблюдения.
    При k >= 2 на каждом промежутке t^k H(t) - многочлен степени k - 1, стационарные
    точки H - корни t P' - k P. Правее k X_(n) функция H убывает.
    """
    x = np.unique(data)

    def objective(t: FloatArray) -> FloatArray:
        return _gradient(k, data, inv_density, t)

    if k == 1:
        return x, objective(x)

    edges = np.append(x, k * x[-1])
    pieces = interpolate_pieces(lambda t: t**k * objective(t), edges, k - 1)
    ratios = pieces.mid / pieces.half
    roots = pieces.roots(lambda c, i: _stationarity(c, float(ratios[i]), k))
    points = np.unique(np.concatenate([edges[1:], roots]))
    return points, objective(points)


def mle_gradient(g: KMonotoneMixture, sample: Sample, t: float) -> float:
    """
    Градиентная функция H(t).

    Raises:
        InvalidArgument: t <= 0
        SupportDeficient: g обращается в ноль в точке выборки
    """
    if not t > 0.0:
        raise InvalidArgument(f"Gradient point must be positive, got {t!r}")
    inv_density = 1.0 / _density_at_data(g, sample)
    return float(_gradient(g.k, sample.values, inv_density, np.array([t]))[0])


def mle_gradient_values(g: KMonotoneMixture, sample: Sample, t: FloatArray) -> FloatArray:
    """H на массиве точек."""
    inv_density = 1.0 / _density_at_data(g, sample)
    return _gradient(g.k, sample.values, inv_density, np.asarray(t, dtype=np.float64))


class MleSolver:
    """Солвер MLE сокращением носителя."""

    def __init__(self, options: Optional[FitOptions] = None):
        self.options = options or FitOptions()

    def initial_support(self, sample: Sample, k: int) -> FloatArray:
        """{k * median}; если ядро не покрывает X_(n), добавляется k * X_(n)."""
        support = [k * sample.median]
        if kernel_matrix(k, support, [sample.max])[0, 0] <= 0.0:
            support.append(k * sample.max)
        return np.unique(np.array(support))

    def _solve_weights(self, K: FloatArray, support: FloatArray, w: FloatArray) -> tuple[FloatArray, FloatArray]:
        """Ньютон, отсечение мелких весов, EM; возвращает новый носитель и веса."""
        w = newton_weights(K, w).weights

        keep = w >= self.options.prune_weight
        if not np.any(keep) or np.any(K[:, keep] @ w[keep] <= 0.0):
            keep = w > 0.0
        support, K, w = support[keep], K[:, keep], w[keep]

        w = em_weights(K, w / w.sum(), self.options.max_inner_iter, EM_RTOL).weights
        return support, w / w.sum()

    def _violators(self, points: FloatArray, values: FloatArray) -> FloatArray:
        """Точки с H > 1 + tol: сначала максимум (из равных - наименьшее t), дальше по убыванию H."""
        threshold = 1.0 + self.options.tol
        first = best_index(values, self.options.tol)
        if values[first] <= threshold:
            return np.empty(0)
        order = np.lexsort((points, -values))
        rest = [i for i in order if values[i] > threshold and i != first]
        return points[[first, *rest][:MAX_NEW_ATOMS]]

    def _augment(
        self,
        sample: Sample,
        k: int,
        inv_density: FloatArray,
        support: FloatArray,
        w: FloatArray,
        candidates: FloatArray,
        allow_move: bool,
    ) -> tuple[FloatArray, FloatArray, bool]:
        """
        Добавляет кандидатов с нулевым весом.

        Кандидат ближе MERGE_RTOL * X_(n) к атому сливается с ним. Почти линейно
        зависимый кандидат вместо добавления сдвигает ближайший атом (не больше одного).
        """
        data = sample.values
        n = data.size
        A = kernel_matrix(k, support, data) * inv_density[:, None]
        support, w = support.copy(), w.copy()
        moved = False

        for t in candidates:
            if not is_new_atom(float(t), support, sample.max, MERGE_RTOL):
                continue
            column = kernel_matrix(k, [t], data)[:, 0] * inv_density
            rho = independence(A.T @ A / n, A.T @ column / n, float(column @ column) / n)
            if rho >= COLLINEAR_RTOL:
                support = np.append(support, t)
                w = np.append(w, 0.0)
                A = np.column_stack([A, column])
                continue
            if not allow_move or moved:
                continue
            i = nearest_atom(float(t), support)
            shifted = support.copy()
            shifted[i] = t
            if np.all(kernel_matrix(k, shifted, data) @ w > 0.0):
                logger.debug(f"Candidate {t:.10g} is collinear with atom {support[i]:.10g}, moving it")
                support = shifted
                A[:, i] = column
                moved = True

        order = np.argsort(support, kind="stable")
        return support[order], w[order], moved

    def fit(self, sample: Sample, k: int) -> FitResult:
        """
        Подгоняет MLE.

        Returns:
            FitResult с converged = False, если за max_outer_iter итераций
            характеризация не выполнена.
        """
        if isinstance(k, bool) or int(k) != k or k < 1:
            raise InvalidArgument(f"Order k must be an integer >= 1, got {k!r}")
        opts = self.options
        data = sample.values

        support = self.initial_support(sample, k)
        K = kernel_matrix(k, support, data)
        support, w = self._solve_weights(K, support, np.full(support.size, 1.0 / support.size))

        trace = [mean_loglik(kernel_matrix(k, support, data), w)]
        converged = False
        max_gradient = np.inf
        iterations = 0

        for iterations in range(1, opts.max_outer_iter + 1):
            K = kernel_matrix(k, support, data)
            inv_density = 1.0 / (K @ w)
            points, values = gradient_peaks(k, data, inv_density)
            at_atoms = K.T @ inv_density / data.size
            max_gradient = max(float(np.max(values)), float(np.max(at_atoms)))

            if max_gradient <= 1.0 + opts.tol and float(np.min(at_atoms)) >= 1.0 - opts.tol:
                converged = True
                break

            candidates = self._violators(points, values)
            new_support, new_w, moved = self._augment(sample, k, inv_density, support, w, candidates, True)
            new_support, new_w = self._solve_weights(kernel_matrix(k, new_support, data), new_support, new_w)
            loglik = mean_loglik(kernel_matrix(k, new_support, data), new_w)

            if moved and loglik < trace[-1]:
                # сдвиг атома не помог: только добавления
                new_support, new_w, _ = self._augment(sample, k, inv_density, support, w, candidates, False)
                new_support, new_w = self._solve_weights(kernel_matrix(k, new_support, data), new_support, new_w)
                loglik = mean_loglik(kernel_matrix(k, new_support, data), new_w)

            if (
                new_support.size == support.size
                and np.array_equal(new_support, support)
                and np.allclose(new_w, w, rtol=1e-14, atol=0.0)
            ):
                logger.debug(f"No progress at iteration {iterations} (max H={max_gradient:.12g})")
                break

            support, w = new_support, new_w
            trace.append(loglik)
            logger.debug(
                f"🔄 MLE iteration {iterations}: max H={max_gradient:.10f}, "
                f"m={support.size}, loglik={loglik:.12f}"
            )

        mixture = KMonotoneMixture.from_atoms(k, support, w)
        objective = log_likelihood(mixture, sample)
        if objective.support_deficient:
            logger.error(f"❌ MLE k={k} n={sample.n}: fitted density vanishes at an observation")
            converged = False

        if converged:
            logger.info(f"✅ MLE k={k} n={sample.n}: {mixture.m} atoms in {iterations} iterations")
        else:
            logger.warning(
                f"⚠️ MLE k={k} n={sample.n} did not converge after {iterations} iterations "
                f"(max gradient {max_gradient:.10g})"
            )

        return FitResult(
            mixture=mixture,
            objective=objective.value,
            max_gradient=float(max_gradient),
            iterations=iterations,
            converged=converged,
            method=FitMethod.MLE,
            trace=tuple(trace),
        )

    def verify(self, fit: FitResult, sample: Sample, grid_size: int) -> MleVerification:
        """
        Проверяет характеризацию MLE на уточнённой сетке.

        Сетка: grid_size точек, кандидаты поиска, атомы и стационарные точки H
        в каждом промежутке между наблюдениями.
        """
        if grid_size < 2:
            raise InvalidArgument(f"grid_size must be >= 2, got {grid_size!r}")
        g = fit.mixture
        k = g.k
        inv_density = 1.0 / _density_at_data(g, sample)
        ceiling = max(self.options.ceiling_factor(k) * sample.max, g.knot_max)

        def objective(t: FloatArray) -> FloatArray:
            return _gradient(k, sample.values, inv_density, t)

        lower = sample.min if k == 1 else sample.min * (1.0 + 1e-12)
        peaks, _ = gradient_peaks(k, sample.values, inv_density)
        grid = np.unique(
            np.concatenate(
                [
                    np.geomspace(lower, ceiling, grid_size),
                    candidate_grid(sample, k, ceiling, self.options.grid_density),
                    g.support,
                    peaks,
                ]
            )
        )
        values = objective(grid)

        at_atoms = objective(g.support)
        atom_residuals = tuple(float(abs(v - 1.0)) for v in at_atoms)
        report = MleVerification(
            gradient=GridFunction(grid, values),
            max_violation=float(np.max(values)) - 1.0,
            atom_residuals=atom_residuals,
            moment_residual=float(abs(np.dot(g.weights, at_atoms) - 1.0)),
            tail_value=float(objective(np.array([ceiling]))[0]),
            mass=g.mass,
        )
        logger.debug(
            f"MLE verification: max violation {report.max_violation:.3e}, "
            f"max atom residual {report.max_atom_residual:.3e}"
        )
        return report


def fit_mle(sample: Sample, k: int, options: Optional[FitOptions] = None) -> FitResult:
    """Подгонка MLE с заданными опциями."""
    return MleSolver(options).fit(sample, k)


def verify_mle(
    fit: FitResult, sample: Sample, grid_size: int, options: Optional[FitOptions] = None
) -> MleVerification:
    return MleSolver(options).verify(fit, sample, grid_size)
