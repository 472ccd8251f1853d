"""
Решатели весов на фиксированном носителе.

- solve_quadratic_nnls: min 1/2 w'Qw - b'w при w >= 0 (активное множество Лоусона-Хансона через scipy)
- newton_weights: ньютоновские шаги для скорректированного правдоподобия MLE
- em_weights: EM-итерации для весов смеси
- independence: проверка нового столбца на почти линейную зависимость
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular
from scipy.optimize import nnls

from src.core.constants import LINE_SEARCH_MAX_HALVINGS, NEWTON_MAX_STEPS, NEWTON_RTOL
from src.core.types import FloatArray

logger = logging.getLogger(__name__)

_JITTERS = (0.0, 1e-14, 1e-12, 1e-10)


def solve_quadratic_nnls(Q: FloatArray, b: FloatArray) -> FloatArray:
    """
    Минимизирует 1/2 w'Qw - b'w при w >= 0 для симметричной неотрицательно определённой Q.

    Сводится к NNLS: при Q = LL' задача равна min ||L'w - L^{-1}b||^2 / 2.
    Диагональ предварительно нормируется к единице.
    """
    m = b.size
    w = np.zeros(m)
    diag = np.diag(Q).copy()
    live = diag > 0.0
    if not np.any(live):
        return w

    scale = 1.0 / np.sqrt(diag[live])
    Qs = Q[np.ix_(live, live)] * scale[:, None] * scale[None, :]
    bs = b[live] * scale

    for jitter in _JITTERS:
        try:
            L = cholesky(Qs + jitter * np.eye(Qs.shape[0]), lower=True)
            break
        except LinAlgError:
            logger.debug(f"Cholesky failed with jitter {jitter}, retrying")
    else:
        raise LinAlgError("Gram matrix is not positive definite even with jitter")

    rhs = solve_triangular(L, bs, lower=True)
    v, _ = nnls(L.T, rhs, maxiter=max(50, 10 * Qs.shape[0]))
    w[live] = v * scale
    return w


def independence(G: FloatArray, column: FloatArray, diag: float) -> float:
    """
    Доля нормы нового столбца, не объяснённая текущими: 1 - q'G^{-1}q в нормированных координатах.

    Ноль для линейно зависимого столбца, единица для ортогонального.
    """
    if G.size == 0:
        return 1.0
    d = np.sqrt(np.diag(G))
    if diag <= 0.0 or np.any(d <= 0.0):
        return 0.0
    try:
        L = cholesky(G / d[:, None] / d[None, :], lower=True)
    except LinAlgError:
        return 0.0
    y = solve_triangular(L, column / d / np.sqrt(diag), lower=True)
    return float(1.0 - y @ y)


def quadratic_line_search(G: FloatArray, b: FloatArray, start: FloatArray, target: FloatArray) -> FloatArray:
    """
    Точка отрезка [start, target], минимизирующая 1/2 w'Gw - b'w.

    Оба конца неотрицательны, значит и результат.
    """
    d = target - start
    curvature = float(d @ G @ d)
    if curvature <= 0.0:
        return target
    step = float(np.clip(-(d @ (G @ start - b)) / curvature, 0.0, 1.0))
    return start + step * d


def adjusted_loglik(K: FloatArray, w: FloatArray) -> float:
    """psi(w) = mean log(K w) - sum w; -inf, если плотность обнуляется в точке выборки."""
    g = K @ w
    if np.any(g <= 0.0):
        return -np.inf
    return float(np.mean(np.log(g)) - np.sum(w))


def mean_loglik(K: FloatArray, w: FloatArray) -> float:
    g = K @ w
    if np.any(g <= 0.0):
        return -np.inf
    return float(np.mean(np.log(g)))


@dataclass(frozen=True, slots=True)
class WeightSolve:
    """Итог решателя весов."""

    weights: FloatArray
    objective: float
    steps: int


def newton_weights(K: FloatArray, w: FloatArray, max_steps: int = NEWTON_MAX_STEPS) -> WeightSolve:
    """
    Максимизирует psi(w) = mean log(Kw) - sum w на фиксированном носителе.

    На каждом шаге квадратичная модель psi в текущей точке решается через
    solve_quadratic_nnls, затем шаг дробится до роста psi. Монотонно по psi.
    """
    n = K.shape[0]
    current = adjusted_loglik(K, w)
    steps = 0
    for steps in range(1, max_steps + 1):
        g = K @ w
        A = K / g[:, None]
        Q = A.T @ A / n
        b = 2.0 * A.sum(axis=0) / n - 1.0
        direction = solve_quadratic_nnls(Q, b) - w

        accepted = False
        step = 1.0
        for _ in range(LINE_SEARCH_MAX_HALVINGS):
            candidate = w + step * direction
            value = adjusted_loglik(K, candidate)
            if value > current:
                accepted = True
                break
            step *= 0.5

        if not accepted:
            break
        gain = value - current
        w, current = np.maximum(candidate, 0.0), value
        if gain <= NEWTON_RTOL * max(1.0, abs(current)):
            break

    return WeightSolve(weights=w, objective=current, steps=steps)


def em_weights(K: FloatArray, w: FloatArray, max_iter: int, rtol: float) -> WeightSolve:
    """
    EM для весов: w_i <- w_i * mean_j K_ji / g(X_j).

    Один шаг переводит массу в 1 (sum w_i H(a_i) = 1), дальше правдоподобие не убывает.
    Останов при относительном приросте меньше rtol.
    """
    current = mean_loglik(K, w)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        g = K @ w
        updated = w * (K.T @ (1.0 / g)) / K.shape[0]
        value = mean_loglik(K, updated)
        gain = value - current
        w = updated
        previous, current = current, value
        if np.isfinite(previous) and gain <= rtol * max(1.0, abs(previous)):
            break
    return WeightSolve(weights=w, objective=current, steps=iterations)
