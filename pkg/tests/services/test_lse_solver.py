"""
Тесты оценки наименьших квадратов.
"""
import math

import numpy as np
import pytest
from scipy.integrate import quad
from sklearn.isotonic import isotonic_regression

from src.domain import FitOptions, FitResult, InvalidArgument, KMonotoneMixture, Sample
from src.services.densities import Exponential
from src.services.kernels import eval_mixture
from src.services.lse_solver import (
    H_tilde,
    LseSolver,
    LseWorkspace,
    Y_nk,
    fenchel_directional_derivative,
    fenchel_gap_values,
    fenchel_minima,
    fit_lse,
    gram_matrix,
    lse_objective,
    phi_objective,
    rk_moment,
    snk,
    snk_values,
    verify_lse,
)


def inflate(fit: FitResult, factor: float) -> FitResult:
    mixture = KMonotoneMixture.from_atoms(fit.k, fit.mixture.support, fit.mixture.weights * factor)
    return FitResult(
        mixture=mixture,
        objective=fit.objective,
        max_gradient=fit.max_gradient,
        iterations=fit.iterations,
        converged=fit.converged,
        method=fit.method,
    )


class TestMoments:
    """Тесты rk_moment(), snk(), Y_nk()."""

    def test_order_one_is_minimum(self):
        assert rk_moment(1, 1.5, 2.5) == pytest.approx(1.5)

    def test_order_two_closed_form(self):
        """int_0^1 (1 - x)(2 - x) dx = 2 - 3/2 + 1/3."""
        assert rk_moment(2, 1.0, 2.0) == pytest.approx(2.0 - 1.5 + 1.0 / 3.0, rel=1e-12)

    @pytest.mark.parametrize("k", [3, 5])
    def test_matches_quadrature(self, k):
        s, t = 1.3, 2.1
        expected, _ = quad(lambda x: (s - x) ** (k - 1) * (t - x) ** (k - 1), 0.0, s)
        assert rk_moment(k, s, t) == pytest.approx(expected, rel=1e-10)

    def test_symmetric(self):
        assert rk_moment(4, 0.7, 3.2) == pytest.approx(rk_moment(4, 3.2, 0.7), rel=1e-12)

    @pytest.mark.parametrize("k", [1, 2, 4, 7])
    def test_lower_bound_away_from_origin(self, k):
        """r_k(s, t) >= (1 - e^-1.59) t0 / (2k) * (st)^(k-1) при s, t >= t0."""
        t0 = 0.5
        rng = np.random.default_rng(k)
        for s, t in rng.uniform(t0, 10.0, size=(20, 2)):
            bound = (1.0 - math.exp(-1.59)) * t0 / (2 * k) * (s * t) ** (k - 1)
            assert rk_moment(k, s, t) >= bound

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidArgument):
            rk_moment(2, 0.0, 1.0)

    def test_snk_order_one_is_ecdf(self, small_exp_sample):
        for t in (0.1, 0.5, small_exp_sample.median, 3.0):
            assert snk(small_exp_sample, 1, t) == pytest.approx(small_exp_sample.ecdf(t))

    def test_y_nk_divides_by_factorial(self):
        sample = Sample([1.0, 2.0])
        assert Y_nk(sample, 3, 3.0) == pytest.approx((4.0 + 1.0) / 2.0 / 2.0)

    def test_y_nk_rejects_negative(self):
        with pytest.raises(InvalidArgument):
            Y_nk(Sample([1.0]), 2, -1.0)


class TestHTilde:
    """Тесты H_tilde()."""

    def test_zero_at_origin(self, two_atom_mixture):
        assert H_tilde(two_atom_mixture, 0.0) == 0.0

    @pytest.mark.parametrize("t", [0.5, 2.0, 4.0])
    def test_matches_quadrature(self, two_atom_mixture, t):
        k = two_atom_mixture.k

        def integrand(x):
            return (t - x) ** (k - 1) / math.factorial(k - 1) * eval_mixture(two_atom_mixture, x)

        breaks = [p for p in (1.0, 3.0) if p < t]
        expected, _ = quad(integrand, 0.0, t, points=breaks or None)
        assert H_tilde(two_atom_mixture, t) == pytest.approx(expected, rel=1e-9)


class TestObjective:
    """Тесты phi_objective(), lse_objective() и производной Фенхеля."""

    def test_empty_measure(self):
        assert lse_objective(None, Sample([1.0])) == 0.0
        assert phi_objective([], [], Sample([1.0]), 2) == 0.0

    def test_matches_integral_form(self, two_atom_mixture):
        """1/2 int g^2 - mean g(X)."""
        sample = Sample([0.2, 0.7, 1.9, 2.6])
        l2, _ = quad(lambda x: eval_mixture(two_atom_mixture, x) ** 2, 0.0, 3.0, points=[1.0])
        expected = 0.5 * l2 - float(np.mean(eval_mixture(two_atom_mixture, sample.values)))
        assert lse_objective(two_atom_mixture, sample) == pytest.approx(expected, rel=1e-9)

    def test_directional_derivative(self, two_atom_mixture):
        sample = Sample([0.2, 0.7, 1.9, 2.6])
        g = two_atom_mixture
        t, eps = 2.2, 1e-6
        support = np.append(g.support, t)
        upper = phi_objective(np.append(g.measure_atoms, eps), support, sample, g.k)
        lower = phi_objective(np.append(g.measure_atoms, -eps), support, sample, g.k)
        numeric = (upper - lower) / (2 * eps)
        assert fenchel_directional_derivative(g, sample, t) == pytest.approx(numeric, rel=1e-5, abs=1e-8)


class TestWorkspace:
    """Тесты LseWorkspace."""

    def test_add_atom_matches_full_gram(self, exp_sample):
        ws = LseWorkspace.build(3, exp_sample, [1.0, 4.0])
        assert ws.add_atom(2.5) == 1
        assert np.allclose(ws.support, [1.0, 2.5, 4.0])
        assert np.allclose(ws.gram, gram_matrix(3, ws.support), rtol=1e-12)
        assert ws.is_positive_definite()

    def test_move_atom_matches_full_gram(self, exp_sample):
        ws = LseWorkspace.build(2, exp_sample, [1.0, 2.0, 4.0])
        ws.move_atom(1, 2.3)
        assert np.allclose(ws.support, [1.0, 2.3, 4.0])
        assert np.allclose(ws.gram, gram_matrix(2, ws.support), rtol=1e-12)
        assert np.allclose(ws.linear, snk_values(exp_sample, 2, ws.support), rtol=1e-12)

    def test_copy_is_independent(self, exp_sample):
        ws = LseWorkspace.build(2, exp_sample, [1.0, 4.0])
        clone = ws.copy()
        ws.add_atom(2.0)
        assert clone.support.size == 2
        assert clone.gram.shape == (2, 2)

    def test_restrict(self, exp_sample):
        ws = LseWorkspace.build(2, exp_sample, [1.0, 2.0, 4.0])
        ws.restrict(np.array([True, False, True]))
        assert ws.gram.shape == (2, 2)
        assert np.allclose(ws.support, [1.0, 4.0])

    def test_independence_of_existing_atom_vanishes(self, exp_sample):
        ws = LseWorkspace.build(3, exp_sample, [1.0, 2.0, 4.0])
        assert abs(ws.independence(2.0)) <= 1e-10
        assert ws.independence(8.0) > 1e-6

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_random_gram_positive_definite(self, exp_sample, k, seed):
        """Различные атомы дают положительно определённую матрицу Грама."""
        rng = np.random.default_rng(seed)
        support = np.sort(rng.choice(np.linspace(0.5, 5.0, 10), size=4, replace=False))
        ws = LseWorkspace.build(k, exp_sample, support)
        assert ws.is_positive_definite()
        assert np.all(np.linalg.eigvalsh(ws.gram) > 0.0)


class TestFenchelMinima:
    """Тесты fenchel_minima()."""

    def test_points_bounded_and_values_exact(self, exp_sample, two_atom_mixture):
        g = two_atom_mixture
        ceiling = 6.0 * exp_sample.max
        points, gaps = fenchel_minima(3, exp_sample, g.support, g.measure_atoms, ceiling)
        assert np.all(points > exp_sample.min)
        assert points[-1] == ceiling
        assert np.allclose(gaps, fenchel_gap_values(g, exp_sample, points), rtol=1e-10, atol=1e-12)

    def test_no_grid_point_below_minimum(self, exp_sample, two_atom_mixture):
        """Минимум по кандидатам не хуже минимума по плотной сетке."""
        g = two_atom_mixture
        ceiling = 6.0 * exp_sample.max
        _, gaps = fenchel_minima(3, exp_sample, g.support, g.measure_atoms, ceiling)
        grid = np.linspace(exp_sample.min, ceiling, 20001)[1:]
        assert np.min(gaps) <= np.min(fenchel_gap_values(g, exp_sample, grid)) + 1e-10

    def test_order_one_uses_observations(self, small_exp_sample):
        g = KMonotoneMixture.from_atoms(1, [small_exp_sample.max], [1.0])
        points, _ = fenchel_minima(1, small_exp_sample, g.support, g.measure_atoms, 2.0 * small_exp_sample.max)
        assert points[0] == small_exp_sample.min
        assert np.all(np.isin(small_exp_sample.values, points))


class TestFitMonotone:
    """k = 1: LSE совпадает с оценкой Гренандера."""

    def test_matches_grenander(self, small_exp_sample):
        x = small_exp_sample.values
        widths = np.diff(np.concatenate([[0.0], x]))
        expected = isotonic_regression(1.0 / (x.size * widths), sample_weight=widths, increasing=False)
        fit = fit_lse(small_exp_sample, 1, FitOptions(tol=1e-10))
        assert fit.converged
        assert np.allclose(eval_mixture(fit.mixture, x - widths / 2.0), expected, rtol=1e-8, atol=0.0)
        assert fit.mixture.mass == pytest.approx(1.0, abs=1e-10)


class TestFitKMonotone:
    """Тесты LseSolver.fit()."""

    @pytest.mark.parametrize("k", [2, 3])
    def test_converges(self, exp_sample, k):
        fit = fit_lse(exp_sample, k)
        assert fit.converged
        assert fit.objective < 0.0
        assert fit.max_gradient <= 1e-7 * LseSolver.gap_scale(exp_sample, k)
        assert abs(fit.diagnostics["stationarity_residual"]) <= 1e-6

    def test_trace_non_increasing(self, exp_sample):
        fit = fit_lse(exp_sample, 3)
        assert np.all(np.diff(fit.trace) <= 1e-12)

    def test_mass_close_to_one(self, exp_sample):
        fit = fit_lse(exp_sample, 2)
        assert fit.diagnostics["mass"] == pytest.approx(fit.mixture.mass)
        assert 0.5 < fit.mixture.mass < 1.5

    @pytest.mark.parametrize("k", [2, 3])
    def test_same_fit_from_different_starts(self, exp_sample, k):
        """Оценка единственна: старт с другого носителя даёт те же g(X_i)."""
        options = FitOptions(tol=1e-10)
        default = fit_lse(exp_sample, k, options)
        custom = fit_lse(exp_sample, k, options, initial_support=[0.5 * exp_sample.max, 5.0 * exp_sample.max])
        assert default.converged and custom.converged
        assert custom.objective == pytest.approx(default.objective, abs=1e-9)
        assert np.allclose(
            eval_mixture(custom.mixture, exp_sample.values),
            eval_mixture(default.mixture, exp_sample.values),
            rtol=0.0,
            atol=1e-6,
        )

    def test_rejects_bad_initial_support(self, exp_sample):
        with pytest.raises(InvalidArgument):
            fit_lse(exp_sample, 2, initial_support=[-1.0])


class TestFitExponentialSamples:
    """n = 100 из Exp(1): условия Фенхеля на плотной сетке."""

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("k", [2, 3, 6])
    def test_fenchel_conditions_hold(self, k, seed):
        sample = Exponential().sample(100, seed=seed)
        fit = fit_lse(sample, k, FitOptions(tol=5e-9))
        assert fit.converged

        report = verify_lse(fit, sample, 2048)
        assert report.min_gap >= -1e-8 * report.scale
        assert report.max_knot_residual <= 1e-8 * report.scale
        assert abs(report.stationarity_residual) <= 1e-8
        assert np.all(fit.mixture.support > sample.min)

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("k", [2, 3, 6])
    def test_beats_true_density(self, k, seed):
        """Q_n(Exp(1)) = 1/4 - mean exp(-X_i); Exp(1) k-монотонна при любом k."""
        sample = Exponential().sample(100, seed=seed)
        fit = fit_lse(sample, k, FitOptions(tol=5e-9))
        assert fit.objective <= 0.25 - float(np.mean(np.exp(-sample.values)))


class TestVerify:
    """Тесты LseSolver.verify()."""

    def test_converged_fit_passes(self, exp_sample):
        fit = fit_lse(exp_sample, 3)
        report = verify_lse(fit, exp_sample, 512)
        assert report.min_gap >= -1e-6 * report.scale
        assert report.max_knot_residual <= 1e-6 * report.scale
        assert abs(report.stationarity_residual) <= 1e-6

    def test_inflated_weights_give_negative_residual(self, exp_sample):
        """10% лишней массы: int g^2 растёт быстрее mean g(X)."""
        fit = inflate(fit_lse(exp_sample, 3), 1.1)
        report = verify_lse(fit, exp_sample, 512)
        assert report.stationarity_residual < 0.0

    def test_deflated_weights_break_fenchel_inequality(self, exp_sample):
        fit = inflate(fit_lse(exp_sample, 2), 0.8)
        report = verify_lse(fit, exp_sample, 512)
        assert report.min_gap < 0.0
