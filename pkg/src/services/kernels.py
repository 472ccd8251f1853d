"""
Ядра Beta(1, k) и вычисления над k-монотонными смесями.

Соглашение о нулевой степени: (u)_+^0 = 1{u >= 0}. Поэтому ядро порядка 1
равно 1{x <= a} / a (непрерывно слева в атоме), а для k >= 2 ядро в x = a равно нулю.
"""

import logging
import math
from typing import Union, overload

import numpy as np
import numpy.typing as npt

from src.core.constants import MASS_ATOL
from src.core.types import FloatArray
from src.domain import DensityJet, DerivativeValue, InvalidArgument, KMonotoneMixture, MixingMeasure, Sample

logger = logging.getLogger(__name__)

ArrayLike = Union[float, npt.ArrayLike]


def positive_power(u: npt.ArrayLike, p: int) -> FloatArray:
    """(u)_+^p с обрезкой отрицательного остатка округления до нуля."""
    u = np.asarray(u, dtype=np.float64)
    if p == 0:
        return (u >= 0.0).astype(np.float64)
    return np.maximum(u, 0.0) ** p


def kernel_matrix(k: int, support: npt.ArrayLike, x: npt.ArrayLike) -> FloatArray:
    """Матрица k (a_j - x_i)_+^(k-1) / a_j^k размера len(x) x len(support)."""
    a = np.asarray(support, dtype=np.float64)[None, :]
    xs = np.asarray(x, dtype=np.float64)[:, None]
    return k * positive_power(a - xs, k - 1) / a**k


def _validate_order(k: int) -> None:
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise InvalidArgument(f"Order k must be an integer >= 1, got {k!r}")


def eval_kernel(k: int, a: float, x: float) -> float:
    """Плотность k (a - x)_+^(k-1) / a^k; интеграл по [0, a] равен 1."""
    _validate_order(k)
    if not a > 0.0:
        raise InvalidArgument(f"Kernel scale must be positive, got {a!r}")
    if x < 0.0:
        raise InvalidArgument(f"Kernel argument must be nonnegative, got {x!r}")
    return float(k * positive_power(a - x, k - 1) / a**k)


@overload
def eval_mixture(g: KMonotoneMixture, x: float) -> float: ...


@overload
def eval_mixture(g: KMonotoneMixture, x: npt.ArrayLike) -> FloatArray: ...


def eval_mixture(g, x):
    """g(x) = sum w_i * kernel(k, a_i, x); скаляр на скаляр, массив на массив."""
    xs = np.asarray(x, dtype=np.float64)
    values = kernel_matrix(g.k, g.support, xs.ravel()) @ g.weights
    if xs.ndim == 0:
        return float(values[0])
    return values.reshape(xs.shape)


def _falling_factorial(n: int, j: int) -> int:
    """n! / (n - j)!."""
    return math.perm(n, j)


def derivative_values(g: KMonotoneMixture, j: int, x: npt.ArrayLike) -> FloatArray:
    """Векторная g^(j) на массиве точек; в узлах при j = k - 1 берётся левый предел."""
    k = g.k
    if not 0 <= j <= k - 1:
        raise InvalidArgument(f"Derivative order must lie in [0, {k - 1}], got {j!r}")
    xs = np.asarray(x, dtype=np.float64).ravel()
    a = g.support[None, :]
    coeff = k * (-1) ** j * _falling_factorial(k - 1, j)
    powers = positive_power(a - xs[:, None], k - 1 - j)
    return coeff * (powers / a**k) @ g.weights


def eval_derivative(g: KMonotoneMixture, j: int, x: float) -> DerivativeValue:
    """
    g^(j)(x) для 0 <= j <= k - 1.

    g^(k-1) - ступенчатая функция со скачками в атомах; в атоме возвращается
    левый предел и выставляется флаг at_knot.
    """
    if not x > 0.0:
        raise InvalidArgument(f"Derivative point must be positive, got {x!r}")
    value = float(derivative_values(g, j, [x])[0])
    at_knot = j == g.k - 1 and bool(np.any(g.support == x))
    return DerivativeValue(value=value, at_knot=at_knot)


@overload
def mixture_cdf(g: KMonotoneMixture, t: float) -> float: ...


@overload
def mixture_cdf(g: KMonotoneMixture, t: npt.ArrayLike) -> FloatArray: ...


def mixture_cdf(g, t):
    """G(t) = sum w_i [1 - (1 - min(t, a_i) / a_i)^k]."""
    ts = np.asarray(t, dtype=np.float64)
    flat = np.maximum(ts.ravel(), 0.0)[:, None]
    a = g.support[None, :]
    tail = (1.0 - np.minimum(flat, a) / a) ** g.k
    values = (1.0 - tail) @ g.weights
    if ts.ndim == 0:
        return float(values[0])
    return values.reshape(ts.shape)


def mixture_jet(g: KMonotoneMixture, t: float) -> DensityJet:
    """Собирает G(t), g(t), ..., g^(k-1)(t) для формулы обращения."""
    derivatives = tuple(float(derivative_values(g, j, [t])[0]) for j in range(g.k))
    return DensityJet(cdf=float(mixture_cdf(g, t)), derivatives=derivatives)


def invert_to_mixing(jet: DensityJet, k: int, t: float) -> float:
    """
    Формула обращения: F(t) = G(t) + sum_{j=1..k} (-1)^j / j! * t^j * g^(j-1)(t).

    Для честной k-монотонной плотности результат лежит в [0, 1] с точностью до округления.
    """
    _validate_order(k)
    if jet.order < k:
        raise InvalidArgument(f"Inversion of order {k} needs {k} derivatives, got {jet.order}")
    values = (jet.cdf,) + jet.derivatives[:k]
    if any(math.isnan(v) for v in values) or math.isnan(t):
        raise InvalidArgument("NaN passed to the inversion formula")

    total = jet.cdf
    power = 1.0
    for j in range(1, k + 1):
        power *= t / j
        total += (-1) ** j * power * jet.derivatives[j - 1]
    return total


def density_bound(k: int, x: float) -> float:
    """Огибающая (1/x)(1 - 1/k)^(k-1) для любой k-монотонной плотности, k >= 2."""
    _validate_order(k)
    if k < 2:
        raise InvalidArgument(f"Density envelope needs k >= 2, got {k!r}")
    if not x > 0.0:
        raise InvalidArgument(f"Envelope point must be positive, got {x!r}")
    return (1.0 - 1.0 / k) ** (k - 1) / x


def kernel_quantile(k: int, a: float, v: ArrayLike) -> FloatArray:
    """X = a (1 - V^(1/k)); через expm1, чтобы V около 1 не давало отрицательный ноль."""
    vs = np.asarray(v, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return a * -np.expm1(np.log(vs) / k)


def sample_mixture(g: KMonotoneMixture, n: int, seed: int) -> Sample:
    """n независимых наблюдений из смеси: атом i с вероятностью w_i, затем обратная функция распределения ядра."""
    if n < 1:
        raise InvalidArgument(f"Sample size must be >= 1, got {n!r}")
    if abs(g.mass - 1.0) > MASS_ATOL:
        raise InvalidArgument(f"Sampling needs a density (mass 1), got mass {g.mass!r}")

    rng = np.random.default_rng(seed)
    atoms = rng.choice(g.m, size=n, p=g.weights / g.mass)
    v = rng.random(n)
    draws = kernel_quantile(g.k, 1.0, v) * g.support[atoms]

    # V = 1 - 2^-53 может дать ровно 0
    zero = draws <= 0.0
    while np.any(zero):
        draws[zero] = kernel_quantile(g.k, 1.0, rng.random(int(zero.sum()))) * g.support[atoms[zero]]
        zero = draws <= 0.0

    logger.debug(f"Sampled {n} points from k={g.k} mixture with {g.m} atoms (seed={seed})")
    return Sample(draws)


def mixing_cdf(measure: MixingMeasure, t: float) -> float:
    """F(t) по атомам меры; совпадает с формулой обращения вне точек носителя."""
    return measure.cdf(t)


def inverted_mixing_values(g: KMonotoneMixture, t: npt.ArrayLike) -> FloatArray:
    """Формула обращения, применённая к самой смеси на массиве точек."""
    ts = np.asarray(t, dtype=np.float64).ravel()
    total = np.asarray(mixture_cdf(g, ts), dtype=np.float64).copy()
    power = np.ones_like(ts)
    for j in range(1, g.k + 1):
        power = power * ts / j
        total += (-1) ** j * power * derivative_values(g, j - 1, ts)
    return total
