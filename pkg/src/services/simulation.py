"""
Симуляционные исследования состоятельности MLE и LSE.

Для каждой тройки (k, n, rep) одна выборка из истинной плотности, обе оценки,
sup-ошибки прямой и обратной задачи на сетке [c, x_max]. Репликации - независимые
задачи в пуле процессов; результаты собираются в порядке задач, поэтому
таблицы не зависят от числа воркеров.
"""

import asyncio
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np
import pandas as pd

from src.core.types import FloatArray
from src.domain import (
    DomainException,
    ExperimentPlan,
    FitMethod,
    FitOptions,
    FitResult,
    InvalidArgument,
    KMonotoneMixture,
)

from .densities import Exponential, MixtureDensity, gamma_mixing_cdf
from .kernels import derivative_values, eval_mixture, inverted_mixing_values
from .lse_solver import fit_lse
from .mle_solver import fit_mle
from .protocols import AnalyticDensity

logger = logging.getLogger(__name__)

__all__ = [
    "ReplicationTask",
    "StudyResult",
    "SimulationService",
    "emit_fit_curves",
    "gamma_mixing_cdf",
    "replication_seed",
    "run_replication",
    "summarize",
]

ROW_COLUMNS = [
    "method",
    "k",
    "n",
    "rep",
    "seed",
    "status",
    "converged",
    "iterations",
    "atoms",
    "mass",
    "objective",
    "max_gradient",
    "sup_density_error",
    "sup_derivative_error",
    "sup_mixing_error",
]

METHODS = (FitMethod.MLE, FitMethod.LSE)


def replication_seed(seed: int, rep: int, n: int, k: int) -> int:
    """Сид выборки для (rep, n, k), выведенный из мастер-сида."""
    state = np.random.SeedSequence([seed, rep, n, k]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def truth_density(distribution: str, mixture: Optional[KMonotoneMixture] = None) -> AnalyticDensity:
    """exp1 или смесь из fit-файла."""
    if distribution == "exp1":
        return Exponential()
    if mixture is None:
        raise InvalidArgument(f"Unknown distribution {distribution!r}")
    return MixtureDensity(mixture.normalized(), name=distribution)


@dataclass
class ReplicationTask:
    """Одна репликация; только примитивные поля, чтобы задача пересекала границу процесса."""

    k: int
    n: int
    rep: int
    seed: int
    distribution: str
    grid: tuple[float, float, int]
    options: dict[str, Any]
    truth_atoms: Optional[tuple[int, tuple[float, ...], tuple[float, ...]]] = None

    def truth(self) -> AnalyticDensity:
        mixture = None
        if self.truth_atoms is not None:
            order, support, weights = self.truth_atoms
            mixture = KMonotoneMixture.from_atoms(order, support, weights)
        return truth_density(self.distribution, mixture)


@dataclass
class ReplicationOutcome:
    rows: list[dict[str, Any]]
    timings: list[dict[str, Any]]
    fits: list[tuple[str, FitResult]] = field(default_factory=list)


def _sup_errors(fit: FitResult, truth: AnalyticDensity, grid: FloatArray) -> dict[str, float]:
    g = fit.mixture
    density = float(np.max(np.abs(eval_mixture(g, grid) - truth.derivative(0, grid))))
    derivative = np.nan
    if g.k >= 3:
        derivative = float(np.max(np.abs(derivative_values(g, 1, grid) - truth.derivative(1, grid))))
    mixing = float(np.max(np.abs(inverted_mixing_values(g, grid) - truth.mixing_cdf(g.k, grid))))
    return {"sup_density_error": density, "sup_derivative_error": derivative, "sup_mixing_error": mixing}


def run_replication(task: ReplicationTask) -> ReplicationOutcome:
    """
    Выборка, обе оценки и их ошибки для одной репликации.

    Падение одной оценки или подсчёта её ошибок записывается в строку со статусом
    failed:<code>, исследование продолжается.
    """
    truth = task.truth()
    sample_seed = replication_seed(task.seed, task.rep, task.n, task.k)
    sample = truth.sample(task.n, sample_seed)
    grid = np.linspace(*task.grid)
    options = FitOptions(**task.options)

    outcome = ReplicationOutcome(rows=[], timings=[])
    for method in METHODS:
        row: dict[str, Any] = {
            "method": method.value,
            "k": task.k,
            "n": task.n,
            "rep": task.rep,
            "seed": sample_seed,
        }
        started = time.perf_counter()
        try:
            fit = fit_mle(sample, task.k, options) if method is FitMethod.MLE else fit_lse(sample, task.k, options)
            errors = _sup_errors(fit, truth, grid)
        except DomainException as e:
            logger.error(f"❌ {method.value} k={task.k} n={task.n} rep={task.rep} failed: {e.message}")
            row.update({"status": f"failed:{e.code}", "converged": False})
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as e:
            logger.error(f"❌ {method.value} k={task.k} n={task.n} rep={task.rep} failed: {e}")
            row.update({"status": "failed:NUMERICAL_FAILURE", "converged": False})
        else:
            row.update(
                {
                    "status": "ok" if fit.converged else "not_converged",
                    "converged": fit.converged,
                    "iterations": fit.iterations,
                    "atoms": fit.mixture.m,
                    "mass": fit.mixture.mass,
                    "objective": fit.objective,
                    "max_gradient": fit.max_gradient,
                }
            )
            row.update(errors)
            outcome.fits.append((f"{method.value}_k{task.k}_n{task.n}_rep{task.rep}", fit))
        outcome.timings.append(
            {
                "method": method.value,
                "k": task.k,
                "n": task.n,
                "rep": task.rep,
                "runtime_seconds": time.perf_counter() - started,
            }
        )
        outcome.rows.append(row)
    return outcome


def _slope(group: pd.DataFrame) -> float:
    """Наклон log(median sup-ошибки) по log n; диагностика скорости."""
    valid = group.dropna(subset=["median_sup_density_error"])
    valid = valid[valid["median_sup_density_error"] > 0.0]
    if valid["n"].nunique() < 2:
        return np.nan
    slope, _ = np.polyfit(np.log(valid["n"].to_numpy(float)), np.log(valid["median_sup_density_error"]), 1)
    return float(slope)


def summarize(rows: pd.DataFrame) -> pd.DataFrame:
    """Медианы по (method, k, n) и наклон ошибки по n."""
    keys = ["method", "k", "n"]
    summary = (
        rows.groupby(keys, sort=True)
        .agg(
            replications=("rep", "count"),
            converged_fraction=("converged", "mean"),
            median_atoms=("atoms", "median"),
            median_mass=("mass", "median"),
            median_iterations=("iterations", "median"),
            median_sup_density_error=("sup_density_error", "median"),
            median_sup_derivative_error=("sup_derivative_error", "median"),
            median_sup_mixing_error=("sup_mixing_error", "median"),
        )
        .reset_index()
    )
    slopes = {key: _slope(group) for key, group in summary.groupby(["method", "k"], sort=True)}
    summary["density_error_slope"] = [slopes[(m, k)] for m, k in zip(summary["method"], summary["k"])]
    return summary


@dataclass
class StudyResult:
    rows: pd.DataFrame
    summary: pd.DataFrame
    timings: pd.DataFrame
    fits: list[tuple[str, FitResult]]
    truth: str


class SimulationService:
    """Запуск исследования состоятельности."""

    def __init__(self, truth_mixture: Optional[KMonotoneMixture] = None):
        self.truth_mixture = truth_mixture

    def tasks(self, plan: ExperimentPlan) -> list[ReplicationTask]:
        """Задачи в детерминированном порядке k, n, rep."""
        truth_atoms = None
        if self.truth_mixture is not None:
            g = self.truth_mixture
            mismatched = [k for k in plan.ks if k != g.k]
            if mismatched:
                raise InvalidArgument(f"Mixture truth has order {g.k}, plan asks for k={mismatched}")
            truth_atoms = (g.k, tuple(map(float, g.support)), tuple(map(float, g.weights)))
        elif plan.distribution != "exp1":
            raise InvalidArgument(f"Distribution {plan.distribution!r} needs a mixture fit-file")
        return [
            ReplicationTask(
                k=k,
                n=n,
                rep=rep,
                seed=plan.seed,
                distribution=plan.distribution,
                grid=(plan.grid_lower, plan.grid_upper, plan.grid_points),
                options=asdict(plan.options),
                truth_atoms=truth_atoms,
            )
            for k in plan.ks
            for n in plan.ns
            for rep in range(plan.replications)
        ]

    async def run(self, plan: ExperimentPlan) -> StudyResult:
        """Выполняет все репликации; jobs == 1 считает в текущем процессе."""
        tasks = self.tasks(plan)
        logger.info(f"🔄 Running {len(tasks)} replications with {plan.jobs} worker(s)")

        if plan.jobs == 1:
            outcomes = [run_replication(task) for task in tasks]
        else:
            loop = asyncio.get_running_loop()
            with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
                outcomes = list(await asyncio.gather(*(loop.run_in_executor(pool, run_replication, t) for t in tasks)))

        rows = pd.DataFrame([row for o in outcomes for row in o.rows]).reindex(columns=ROW_COLUMNS)
        rows["converged"] = rows["converged"].astype(bool)
        timings = pd.DataFrame([t for o in outcomes for t in o.timings])
        fits = [fit for o in outcomes for fit in o.fits]

        failed = int((~rows["status"].isin(["ok", "not_converged"])).sum())
        if failed:
            logger.warning(f"⚠️ {failed} fit(s) failed during the study")
        logger.info(f"✅ Study finished: {len(rows)} rows")
        return StudyResult(
            rows=rows, summary=summarize(rows), timings=timings, fits=fits, truth=plan.distribution
        )


def emit_fit_curves(fit: FitResult, truth: Optional[AnalyticDensity], grid: FloatArray) -> pd.DataFrame:
    """
    Таблица t, g_fit, g0, F_fit, F0 на сетке для внешних графиков.

    F_fit получена формулой обращения; без истинной плотности колонки g0 и F0 пустые.
    """
    ts = np.asarray(grid, dtype=np.float64).ravel()
    g = fit.mixture
    frame = pd.DataFrame(
        {
            "t": ts,
            "g_fit": eval_mixture(g, ts),
            "g0": truth.derivative(0, ts) if truth is not None else np.nan,
            "F_fit": inverted_mixing_values(g, ts),
            "F0": truth.mixing_cdf(g.k, ts) if truth is not None else np.nan,
        }
    )
    return frame
