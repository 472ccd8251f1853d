"""
Конфигурация проекта.
Все настройки в одном месте для удобного управления.
"""

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv

from .constants import (
    DEFAULT_ERROR_GRID,
    DEFAULT_ERROR_GRID_POINTS,
    DEFAULT_GRID_DENSITY,
    DEFAULT_MAX_INNER_ITER,
    DEFAULT_MAX_OUTER_ITER,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_PRUNE_WEIGHT,
    DEFAULT_REPLICATIONS,
    DEFAULT_SEED,
    DEFAULT_TOL,
)

load_dotenv()


@dataclass(frozen=True, slots=True)
class SolverDefaults:
    """Значения по умолчанию для FitOptions."""

    tol: float = DEFAULT_TOL
    max_outer_iter: int = DEFAULT_MAX_OUTER_ITER
    max_inner_iter: int = DEFAULT_MAX_INNER_ITER
    prune_weight: float = DEFAULT_PRUNE_WEIGHT
    grid_density: int = DEFAULT_GRID_DENSITY


@dataclass(frozen=True, slots=True)
class SimulationDefaults:
    """Параметры симуляций по умолчанию."""

    error_grid: tuple = DEFAULT_ERROR_GRID
    error_grid_points: int = DEFAULT_ERROR_GRID_POINTS
    replications: int = DEFAULT_REPLICATIONS


@dataclass(frozen=True, slots=True)
class Files:
    """Пути к файлам."""

    output_dir: str = DEFAULT_OUTPUT_DIR


def _int_from_env(name: str) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


class Config:
    """Главный конфиг."""

    __slots__ = ("seed", "jobs", "log_level", "solver", "simulation", "files")

    def __init__(self):
        # KMONO_SEED - запасной сид, если --seed не передан
        env_seed = _int_from_env("KMONO_SEED")
        self.seed = env_seed if env_seed is not None else DEFAULT_SEED

        env_jobs = _int_from_env("KMONO_JOBS")
        self.jobs = env_jobs if env_jobs is not None else (os.cpu_count() or 1)

        self.log_level = os.getenv("KMONO_LOG_LEVEL", "INFO").upper()

        self.solver = SolverDefaults()
        self.simulation = SimulationDefaults()
        self.files = Files()


@lru_cache(maxsize=1)
def get_config() -> Config:
    """Singleton конфиг с кэшированием."""
    return Config()
