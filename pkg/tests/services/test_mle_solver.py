"""
Тесты оценки максимального правдоподобия.
"""
import math

import numpy as np
import pytest
from sklearn.isotonic import isotonic_regression

from src.domain import FitMethod, FitOptions, FitResult, InvalidArgument, KMonotoneMixture, Sample, SupportDeficient
from src.services.densities import Exponential
from src.services.kernels import eval_mixture
from src.services.mle_solver import (
    MleSolver,
    adjusted_likelihood,
    fit_mle,
    log_likelihood,
    mle_gradient,
    mle_gradient_values,
    verify_mle,
)


def grenander(sample: Sample) -> tuple[np.ndarray, np.ndarray]:
    """Наклоны наименьшей вогнутой мажоранты ECDF в серединах промежутков."""
    x = sample.values
    widths = np.diff(np.concatenate([[0.0], x]))
    heights = isotonic_regression(1.0 / (sample.n * widths), sample_weight=widths, increasing=False)
    return x - widths / 2.0, np.asarray(heights)


def with_weights(fit: FitResult, factor: float) -> FitResult:
    mixture = KMonotoneMixture.from_atoms(fit.k, fit.mixture.support, fit.mixture.weights * factor)
    return FitResult(
        mixture=mixture,
        objective=fit.objective,
        max_gradient=fit.max_gradient,
        iterations=fit.iterations,
        converged=fit.converged,
        method=fit.method,
    )


class TestLikelihood:
    """Тесты log_likelihood() и adjusted_likelihood()."""

    def test_support_deficient_tag(self):
        g = KMonotoneMixture.from_atoms(2, [1.0], [1.0])
        value = log_likelihood(g, Sample([0.5, 2.0]))
        assert value.support_deficient
        assert value.value == -math.inf

    def test_adjusted_subtracts_mass(self, two_atom_mixture):
        sample = Sample([0.3, 0.9, 2.0])
        ll = log_likelihood(two_atom_mixture, sample).value
        doubled = KMonotoneMixture.from_atoms(3, two_atom_mixture.support, 2.0 * two_atom_mixture.weights)
        assert adjusted_likelihood(doubled, sample).value == pytest.approx(ll + math.log(2.0) - 2.0)


class TestGradient:
    """Тесты mle_gradient()."""

    def test_rejects_nonpositive_point(self, two_atom_mixture):
        with pytest.raises(InvalidArgument):
            mle_gradient(two_atom_mixture, Sample([0.5]), 0.0)

    def test_raises_when_density_vanishes(self):
        g = KMonotoneMixture.from_atoms(2, [1.0], [1.0])
        with pytest.raises(SupportDeficient):
            mle_gradient(g, Sample([0.5, 2.0]), 1.5)

    def test_scalar_matches_vector(self, two_atom_mixture):
        sample = Sample([0.3, 0.9, 2.0])
        ts = np.array([0.5, 1.5, 2.5])
        scalar = [mle_gradient(two_atom_mixture, sample, t) for t in ts]
        assert np.allclose(mle_gradient_values(two_atom_mixture, sample, ts), scalar)


class TestFitSingleObservation:
    """Одно наблюдение X: MLE - одно ядро с атомом в kX."""

    @pytest.mark.parametrize("k", range(1, 9))
    def test_single_kernel(self, k):
        fit = fit_mle(Sample([2.0]), k)
        assert fit.converged
        assert fit.mixture.m == 1
        assert fit.mixture.support[0] == pytest.approx(2.0 * k, rel=1e-9)
        assert fit.mixture.weights[0] == pytest.approx(1.0, abs=1e-12)


class TestFitMonotone:
    """k = 1: MLE совпадает с оценкой Гренандера."""

    def test_matches_grenander(self, small_exp_sample):
        fit = fit_mle(small_exp_sample, 1, FitOptions(tol=1e-10))
        midpoints, expected = grenander(small_exp_sample)
        assert fit.converged
        assert np.allclose(eval_mixture(fit.mixture, midpoints), expected, rtol=1e-8, atol=0.0)

    def test_atoms_at_observations(self, small_exp_sample):
        fit = fit_mle(small_exp_sample, 1)
        for a in fit.mixture.support:
            assert a in small_exp_sample.values

    def test_density_positive_at_every_observation(self):
        """Выборка, на которой склейка атомов раньше уводила атом левее X_(n)."""
        sample = Exponential().sample(12, seed=112)
        fit = fit_mle(sample, 1)
        midpoints, expected = grenander(sample)
        assert fit.converged
        assert math.isfinite(fit.objective)
        assert np.all(eval_mixture(fit.mixture, sample.values) > 0.0)
        assert np.allclose(eval_mixture(fit.mixture, midpoints), expected, rtol=1e-6, atol=0.0)


class TestFitKMonotone:
    """Тесты MleSolver.fit() для k >= 2."""

    @pytest.mark.parametrize("k", [2, 3])
    def test_converges_to_density(self, exp_sample, k):
        fit = fit_mle(exp_sample, k)
        assert fit.converged
        assert fit.max_gradient <= 1.0 + 1e-7
        assert fit.mixture.mass == pytest.approx(1.0, abs=1e-12)
        assert fit.objective == pytest.approx(log_likelihood(fit.mixture, exp_sample).value)

    def test_trace_is_monotone(self, exp_sample):
        fit = fit_mle(exp_sample, 3)
        assert len(fit.trace) >= 2
        assert np.all(np.diff(fit.trace) >= -1e-9)

    def test_beats_initial_kernel(self, exp_sample):
        fit = fit_mle(exp_sample, 3)
        support = MleSolver().initial_support(exp_sample, 3)
        start = KMonotoneMixture.from_atoms(3, support, np.full(support.size, 1.0 / support.size))
        assert fit.objective >= log_likelihood(start, exp_sample).value

    def test_scale_equivariance(self, exp_sample):
        """Данные cX: носитель c * a, те же веса, правдоподобие сдвигается на -log c."""
        fit = fit_mle(exp_sample, 3)
        scaled = fit_mle(exp_sample.scaled(2.0), 3)
        assert scaled.mixture.m == fit.mixture.m
        assert np.allclose(scaled.mixture.support, 2.0 * fit.mixture.support, rtol=1e-10, atol=0.0)
        assert np.allclose(scaled.mixture.weights, fit.mixture.weights, rtol=1e-10, atol=1e-14)
        assert scaled.objective == pytest.approx(fit.objective - math.log(2.0), abs=1e-10)

    def test_iteration_cap(self, exp_sample):
        fit = fit_mle(exp_sample, 3, FitOptions(max_outer_iter=1))
        assert fit.iterations == 1

    def test_invalid_order(self, exp_sample):
        with pytest.raises(InvalidArgument):
            fit_mle(exp_sample, 0)


class TestFitExponentialSamples:
    """n = 100 из Exp(1): сходимость и характеризация на плотной сетке."""

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("k", [2, 3, 6])
    def test_characterization_holds(self, k, seed):
        sample = Exponential().sample(100, seed=seed)
        fit = fit_mle(sample, k)
        assert fit.converged

        report = verify_mle(fit, sample, 2048)
        assert report.max_violation <= 1e-6
        assert report.max_atom_residual <= 1e-6
        assert abs(fit.mixture.mass - 1.0) <= 1e-10
        assert fit.mixture.m >= 1

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("k", [2, 3, 6])
    def test_beats_true_density(self, k, seed):
        """Exp(1) k-монотонна при любом k, значит её правдоподобие не больше максимального."""
        sample = Exponential().sample(100, seed=seed)
        fit = fit_mle(sample, k)
        assert fit.objective >= -float(np.mean(sample.values))


class TestInitialSupport:
    """Тесты MleSolver.initial_support()."""

    def test_median_only_when_it_covers_sample(self):
        support = MleSolver().initial_support(Sample([1.0, 2.0, 3.0]), 2)
        assert np.allclose(support, [4.0])

    def test_adds_right_atom(self):
        support = MleSolver().initial_support(Sample([1.0, 1.1, 1.2, 10.0]), 2)
        assert np.allclose(support, [2.3, 20.0])


class TestVerify:
    """Тесты MleSolver.verify()."""

    def test_converged_fit_passes(self, exp_sample):
        fit = fit_mle(exp_sample, 2)
        report = verify_mle(fit, exp_sample, 512)
        assert report.max_violation <= 1e-6
        assert report.max_atom_residual <= 1e-6
        assert report.moment_residual <= 1e-6
        assert report.tail_value <= 1.0 + 1e-7

    def test_inflated_weights_fail(self, exp_sample):
        fit = with_weights(fit_mle(exp_sample, 2), 1.1)
        report = verify_mle(fit, exp_sample, 512)
        assert report.mass == pytest.approx(1.1)
        assert report.max_atom_residual > 0.05

    def test_includes_fit_atoms_in_grid(self, exp_sample):
        fit = fit_mle(exp_sample, 2)
        report = verify_mle(fit, exp_sample, 64)
        for a in fit.mixture.support:
            assert a in report.gradient.abscissae

    def test_truth_is_not_optimal(self):
        """Истинная плотность проигрывает MLE: градиент где-то больше 1."""
        sample = Exponential().sample(40, seed=2)
        truth = KMonotoneMixture.from_atoms(2, [0.5, 1.5, 3.0, 20.0], [0.25, 0.25, 0.25, 0.25])
        fit = FitResult(
            mixture=truth, objective=0.0, max_gradient=0.0, iterations=0, converged=False, method=FitMethod.MLE
        )
        report = verify_mle(fit, sample, 256)
        assert report.max_violation > 0.0

    def test_rejects_tiny_grid(self, exp_sample):
        fit = fit_mle(exp_sample, 2)
        with pytest.raises(InvalidArgument):
            verify_mle(fit, exp_sample, 1)
