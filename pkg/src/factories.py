"""
Фабрики для создания солверов и обработчиков с зависимостями.

Фабрики инкапсулируют сборку объектов из конфигурации и флагов командной строки,
делая код более тестируемым.
"""

import logging
from argparse import Namespace
from dataclasses import dataclass
from typing import Optional

from src.core.config import Config, get_config
from src.domain import FitOptions
from src.handlers import BoundsHandlers, EstimationHandlers, InversionHandlers, SimulationHandlers
from src.services.lse_solver import LseSolver
from src.services.mle_solver import MleSolver

logger = logging.getLogger(__name__)


class OptionsFactory:
    """Опции солверов: флаги перекрывают конфигурацию."""

    @staticmethod
    def from_args(args: Namespace, config: Optional[Config] = None) -> FitOptions:
        defaults = (config or get_config()).solver

        def pick(name: str, fallback):
            value = getattr(args, name, None)
            return fallback if value is None else value

        return FitOptions(
            tol=pick("tol", defaults.tol),
            max_outer_iter=pick("max_iter", defaults.max_outer_iter),
            max_inner_iter=pick("max_inner_iter", defaults.max_inner_iter),
            prune_weight=pick("prune_weight", defaults.prune_weight),
            grid_density=pick("grid_density", defaults.grid_density),
            search_upper_factor=getattr(args, "search_factor", None),
        )


class ServiceFactory:
    """Фабрика солверов."""

    @staticmethod
    def create_mle_solver(options: FitOptions) -> MleSolver:
        return MleSolver(options)

    @staticmethod
    def create_lse_solver(options: FitOptions) -> LseSolver:
        return LseSolver(options)


@dataclass
class HandlerSet:
    """Все обработчики команд."""

    estimation: EstimationHandlers
    inversion: InversionHandlers
    bounds: BoundsHandlers
    simulation: SimulationHandlers


class HandlerFactory:
    """Фабрика обработчиков."""

    @staticmethod
    def create_all(options: FitOptions) -> HandlerSet:
        handlers = HandlerSet(
            estimation=EstimationHandlers(
                ServiceFactory.create_mle_solver(options), ServiceFactory.create_lse_solver(options)
            ),
            inversion=InversionHandlers(),
            bounds=BoundsHandlers(),
            simulation=SimulationHandlers(),
        )
        logger.debug(f"Handlers created with {options}")
        return handlers
