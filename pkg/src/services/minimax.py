"""
Константы нижней минимаксной оценки для g^(j)(x0) и F(x0).

Точная рациональная арифметика (Fraction) для C_kj, I_n2p, lambda; в float
переходим только в d_kj и в значениях оценок, через логарифмы больших целых.

Возмущение g_mu(x) = g0(x) + s (x0 + mu - x)^(k+1) (x - x0 + mu)^(k+2) на [x0 - mu, x0 + mu],
s = g0^(k)(x0) / (C_kk mu^(k+3)).
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import numpy.typing as npt
import sympy
from numpy.polynomial import Polynomial
from scipy.integrate import quad

from src.core.constants import PERTURBATION_CHECK_POINTS
from src.core.types import FloatArray
from src.domain import InvalidArgument, InvalidPerturbation, MinimaxConstants

from .protocols import AnalyticDensity

logger = logging.getLogger(__name__)

_x = sympy.Symbol("x")


def _check_order(k: int, minimum: int = 2) -> None:
    if isinstance(k, bool) or int(k) != k or k < minimum:
        raise InvalidArgument(f"Order k must be an integer >= {minimum}, got {k!r}")


def _check_index(k: int, j: int, upper: int) -> None:
    if isinstance(j, bool) or int(j) != j or not 0 <= j <= upper:
        raise InvalidArgument(f"Derivative index j must lie in [0, {upper}] for k={k}, got {j!r}")


def _log_fraction(q: Fraction) -> float:
    """log |q| без перевода q в float (числитель и знаменатель могут не влезать в double)."""
    return math.log(abs(q.numerator)) - math.log(q.denominator)


# ═══════════════════════════════════════════════════════════
# C_kj = r^(j)(0), r(x) = (1 - x^2)^(k+1) (1 + x)
# ═══════════════════════════════════════════════════════════


@lru_cache(maxsize=128)
def _r_coefficients(k: int) -> tuple[int, ...]:
    poly = sympy.Poly((1 - _x**2) ** (k + 1) * (1 + _x), _x)
    return tuple(int(poly.coeff_monomial(_x**i)) for i in range(poly.degree() + 1))


def c_kj(k: int, j: int) -> Fraction:
    """C_kj = j! * [x^j] r(x), точно."""
    _check_order(k)
    _check_index(k, j, k)
    return Fraction(math.factorial(j) * _r_coefficients(k)[j])


def c_kj_product_form(k: int, j: int) -> Fraction:
    """C_kj по произведениям, раздельно для чётного и нечётного j."""
    _check_order(k)
    _check_index(k, j, k)
    if j % 2 == 0:
        half = j // 2
        value = (-2) ** half * math.prod(k + 1 - i for i in range(half)) * math.prod(j - 2 * i - 1 for i in range(half))
    else:
        half = (j - 1) // 2
        value = (
            (-2) ** half * math.prod(k + 1 - i for i in range(half)) * math.prod(j - 2 * i for i in range(half + 1))
        )
    return Fraction(value)


def c_kk_closed_form(k: int) -> Fraction:
    """Компактная форма C_kk."""
    _check_order(k)
    if k % 2 == 0:
        value = 2 * (-1) ** (k // 2) * (k + 1) * math.factorial(k - 1) * math.comb(k, k // 2 - 1)
    else:
        value = (-1) ** ((k - 1) // 2) * math.factorial(k) * math.comb(k + 1, (k - 1) // 2)
    return Fraction(value)


def lambda1(k: int, j: int) -> Fraction:
    """lambda^(j)_k1 = |C_kj / C_kk|, 0 <= j <= k - 1."""
    _check_order(k)
    _check_index(k, j, k - 1)
    return abs(c_kj(k, j) / c_kj(k, k))


# ═══════════════════════════════════════════════════════════
# lambda_k2
# ═══════════════════════════════════════════════════════════


def i_n2p(n: int, p: int) -> Fraction:
    """
    I = int_0^1 (1 - x^2)^n x^(2p) dx в замкнутой форме.

    При p = 0 оба биномиальных множителя полагаются равными 1.
    """
    if n < 0 or p < 0:
        raise InvalidArgument(f"i_n2p needs n, p >= 0, got ({n!r}, {p!r})")
    base = Fraction(2 ** (2 * n + 1) * math.factorial(n) * math.factorial(n + 1), math.factorial(2 * n + 2))
    if p == 0:
        return base
    return base * Fraction(math.comb(n + p, n + 1), math.comb(2 * (n + p) + 1, 2 * (n + 1)))


def perturbation_integral(k: int) -> Fraction:
    """int_{-1}^{1} (1 - z^2)^(2(k+1)) (1 + z)^2 dz = 2 (I(2k+2, 1) + I(2k+2, 0))."""
    _check_order(k, minimum=1)
    n = 2 * (k + 1)
    return 2 * (i_n2p(n, 1) + i_n2p(n, 0))


def lambda2_from_integral(k: int) -> Fraction:
    """lambda_k2 = int (1 - z^2)^(2(k+1)) (1 + z)^2 dz / C_kk^2."""
    _check_order(k)
    return perturbation_integral(k) / c_kj(k, k) ** 2


def lambda2(k: int) -> Fraction:
    """
    lambda_k2 в замкнутой форме, раздельно по чётности k.

    Для чётного k множитель 2^(4k+6): только он согласован с интегралом и C_kk.
    """
    _check_order(k)
    core = Fraction(
        (2 * k + 3) * (k + 2) * math.factorial(2 * (k + 1)) ** 2,
        math.factorial(4 * k + 7),
    )
    if k % 2 == 0:
        denominator = (k + 1) ** 2 * math.factorial(k - 1) ** 2 * math.comb(k, k // 2 - 1) ** 2
        return 2 ** (4 * k + 6) * core / denominator
    denominator = math.factorial(k) ** 2 * math.comb(k + 1, (k - 1) // 2) ** 2
    return 2 ** (4 * (k + 2)) * core / denominator


# ═══════════════════════════════════════════════════════════
# Оценки
# ═══════════════════════════════════════════════════════════


def _rate(k: int, j: int) -> float:
    return (k - j) / (2 * k + 1)


def d_kj(k: int, j: int) -> float:
    """d_kj = 1/4 (4 r / e)^r lambda1 / lambda2^r, r = (k - j) / (2k + 1)."""
    _check_order(k)
    _check_index(k, j, k - 1)
    r = _rate(k, j)
    log_d = -math.log(4.0) + r * (math.log(4.0 * r) - 1.0) + _log_fraction(lambda1(k, j)) - r * _log_fraction(lambda2(k))
    return math.exp(log_d)


def minimax_constants(k: int, j: int) -> MinimaxConstants:
    return MinimaxConstants(
        k=k,
        j=j,
        C_kj=c_kj(k, j),
        C_kk=c_kj(k, k),
        lambda1_kj=lambda1(k, j),
        lambda2_k=lambda2(k),
        d_kj=d_kj(k, j),
    )


def _check_point_values(k: int, g0_x0: float, gk_x0: float) -> None:
    if not g0_x0 > 0.0:
        raise InvalidArgument(f"g0(x0) must be positive, got {g0_x0!r}")
    if gk_x0 == 0.0 or not math.isfinite(gk_x0):
        raise InvalidArgument(f"g0^(k)(x0) must be a nonzero finite number, got {gk_x0!r}")
    if (-1) ** k * gk_x0 < 0.0:
        logger.warning(f"⚠️ Sign of g0^({k})(x0)={gk_x0!r} is not (-1)^{k}; a k-monotone density has the opposite sign")


def minimax_bound(k: int, j: int, g0_x0: float, gk_x0: float) -> float:
    """
    Коэффициент при n^(-(k-j)/(2k+1)) в нижней оценке локального минимаксного риска для g^(j)(x0).

    {|g^(k)(x0)|^(2j+1) g(x0)^(k-j)}^(1/(2k+1)) * d_kj
    """
    _check_order(k)
    _check_index(k, j, k - 1)
    _check_point_values(k, g0_x0, gk_x0)
    log_bound = ((2 * j + 1) * math.log(abs(gk_x0)) + (k - j) * math.log(g0_x0)) / (2 * k + 1)
    return math.exp(log_bound) * d_kj(k, j)


def mixing_bound(k: int, x0: float, g0_x0: float, gk_x0: float) -> float:
    """Нижняя оценка для F(x0): minimax_bound(k, k-1, ...) * x0^k / k!."""
    if not x0 > 0.0:
        raise InvalidArgument(f"x0 must be positive, got {x0!r}")
    return minimax_bound(k, k - 1, g0_x0, gk_x0) * x0**k / math.factorial(k)


def basic_lemma_bound(c: float, r: float) -> float:
    """1/4 (c r / (2e))^r: минимаксная оценка при модуле непрерывности (c eps)^r."""
    if not (c > 0.0 and r > 0.0):
        raise InvalidArgument(f"basic_lemma_bound needs c, r > 0, got ({c!r}, {r!r})")
    return 0.25 * (c * r / (2.0 * math.e)) ** r


def bound_via_modulus(k: int, j: int, g0_x0: float, gk_x0: float) -> float:
    """
    Та же оценка через модуль непрерывности m_j(eps) >= (r_kj eps)^r.

    r_kj = (lambda1 |g^(k)|)^(1/r) / b_k, b_k = lambda2 (g^(k))^2 / g0.
    """
    _check_order(k)
    _check_index(k, j, k - 1)
    _check_point_values(k, g0_x0, gk_x0)
    r = _rate(k, j)
    b_k = float(lambda2(k)) * gk_x0**2 / g0_x0
    r_kj = (float(lambda1(k, j)) * abs(gk_x0)) ** (1.0 / r) / b_k
    return basic_lemma_bound(8.0 * r_kj, r)


# ═══════════════════════════════════════════════════════════
# Возмущение
# ═══════════════════════════════════════════════════════════


@dataclass(frozen=True, slots=True)
class Perturbation:
    """g_mu = g0 + s * P(x - x0) на [x0 - mu, x0 + mu], g0 вне отрезка."""

    g0: AnalyticDensity
    x0: float
    k: int
    mu: float
    scale: float
    bump: Polynomial

    def _inside(self, xs: FloatArray) -> FloatArray:
        return np.abs(xs - self.x0) <= self.mu

    def derivative(self, j: int, x: npt.ArrayLike) -> FloatArray:
        """g_mu^(j)(x)."""
        xs = np.asarray(x, dtype=np.float64)
        poly = self.bump.deriv(j) if j > 0 else self.bump
        extra = np.where(self._inside(xs), self.scale * poly(xs - self.x0), 0.0)
        return self.g0.derivative(j, xs) + extra

    def value(self, x: npt.ArrayLike) -> FloatArray:
        return self.derivative(0, x)

    def displacement(self, j: int) -> float:
        """g_mu^(j)(x0) - g0^(j)(x0)."""
        poly = self.bump.deriv(j) if j > 0 else self.bump
        return float(self.scale * poly(0.0))

    def chi_square_mass(self) -> float:
        """int (g_mu - g0)^2 / g0 по [x0 - mu, x0 + mu] адаптивной квадратурой."""
        return chi_square_mass(self)

    def leading_term(self) -> float:
        """lambda_k2 (g0^(k)(x0))^2 / g0(x0) * mu^(2k+1)."""
        g0_x0 = float(self.g0.derivative(0, self.x0))
        gk_x0 = float(self.g0.derivative(self.k, self.x0))
        return float(lambda2(self.k)) * gk_x0**2 / g0_x0 * self.mu ** (2 * self.k + 1)


def chi_square_mass(perturbation: Perturbation) -> float:
    p = perturbation

    def integrand(x: float) -> float:
        diff = p.scale * p.bump(x - p.x0)
        return float(diff * diff / p.g0.derivative(0, x))

    value, error = quad(integrand, p.x0 - p.mu, p.x0 + p.mu, epsabs=0.0, epsrel=1e-12, limit=200)
    logger.debug(f"Chi-square mass mu={p.mu:.4g}: {value:.12e} (quadrature error {error:.1e})")
    return float(value)


def build_perturbation(g0: AnalyticDensity, x0: float, k: int, mu: float) -> Perturbation:
    """
    Строит возмущение g0 в x0 масштаба mu.

    Проверяет (-1)^j g_mu^(j) >= 0 для j = 0..k-1 на сетке отрезка. Знак k-й
    производной от mu не зависит, поэтому его нарушение только логируется.

    Raises:
        InvalidPerturbation: нарушен знак производной порядка j < k
    """
    _check_order(k)
    if not x0 > 0.0:
        raise InvalidArgument(f"x0 must be positive, got {x0!r}")
    if not 0.0 < mu < x0:
        raise InvalidArgument(f"mu must lie in (0, x0), got {mu!r}")

    gk_x0 = float(g0.derivative(k, x0))
    if not (-1) ** k * gk_x0 > 0.0:
        raise InvalidArgument(f"Perturbation needs (-1)^k g0^(k)(x0) > 0, got g0^({k})(x0)={gk_x0!r}")

    scale = gk_x0 / (float(c_kj(k, k)) * mu ** (k + 3))
    bump = Polynomial([mu, -1.0]) ** (k + 1) * Polynomial([mu, 1.0]) ** (k + 2)
    perturbation = Perturbation(g0=g0, x0=x0, k=k, mu=mu, scale=scale, bump=bump)

    grid = np.linspace(x0 - mu, x0 + mu, PERTURBATION_CHECK_POINTS)
    for j in range(k):
        signed = (-1) ** j * perturbation.derivative(j, grid)
        bad = np.flatnonzero(signed < 0.0)
        if bad.size:
            i = int(bad[0])
            raise InvalidPerturbation(float(grid[i]), j, float(signed[i]))

    top = (-1) ** k * perturbation.derivative(k, grid)
    if np.any(top < 0.0):
        i = int(np.flatnonzero(top < 0.0)[0])
        logger.warning(f"⚠️ Perturbation changes the sign of derivative {k} at x={grid[i]:.6g}")

    logger.debug(f"Built perturbation at x0={x0} k={k} mu={mu} (scale {scale:.6e})")
    return perturbation
