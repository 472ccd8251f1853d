"""
Общие фикстуры для тестов.
"""
import sys
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

# Добавляем корень проекта в путь
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.domain import FitOptions, KMonotoneMixture, Sample
from src.services.densities import Exponential


# ═══════════════════════════════════════════════════════════════════════════════
# ВЫБОРКИ
# ═══════════════════════════════════════════════════════════════════════════════

@pytest.fixture
def exp_sample() -> Sample:
    """50 наблюдений Exp(1) с фиксированным сидом."""
    return Exponential().sample(50, seed=20240917)


@pytest.fixture
def small_exp_sample() -> Sample:
    """30 наблюдений Exp(1) для быстрых тестов k = 1."""
    return Exponential().sample(30, seed=7)


# ═══════════════════════════════════════════════════════════════════════════════
# СМЕСИ
# ═══════════════════════════════════════════════════════════════════════════════

@pytest.fixture
def two_atom_mixture() -> KMonotoneMixture:
    """3-монотонная плотность с атомами 1 и 3."""
    return KMonotoneMixture.from_atoms(3, [1.0, 3.0], [0.4, 0.6])


@pytest.fixture
def make_mixture() -> Callable[..., KMonotoneMixture]:
    """Фабрика случайных нормированных смесей."""

    def factory(k: int, m: int = 4, seed: int = 0) -> KMonotoneMixture:
        rng = np.random.default_rng(seed)
        support = np.sort(rng.uniform(0.5, 5.0, size=m))
        weights = rng.dirichlet(np.ones(m))
        return KMonotoneMixture.from_atoms(k, support, weights)

    return factory


# ═══════════════════════════════════════════════════════════════════════════════
# ОПЦИИ И ФАЙЛЫ
# ═══════════════════════════════════════════════════════════════════════════════

@pytest.fixture
def options() -> FitOptions:
    """Опции солверов по умолчанию."""
    return FitOptions()


@pytest.fixture
def write_sample(tmp_path: Path) -> Callable[[str, str], Path]:
    """Пишет CSV выборки во временный каталог."""

    def writer(text: str, name: str = "sample.csv") -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return writer
