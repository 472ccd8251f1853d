"""
Ядро приложения - конфигурация и общие типы.

Содержит:
- Конфигурацию приложения
- Константы
- Type aliases
"""

from .config import Config, Files, SimulationDefaults, SolverDefaults, get_config
from .constants import DEFAULT_SEED, DEFAULT_TOL, LOG_DATE_FORMAT, LOG_FORMAT
from .types import FloatArray

__all__ = [
    # Config
    "Config",
    "SolverDefaults",
    "SimulationDefaults",
    "Files",
    "get_config",
    # Constants
    "DEFAULT_SEED",
    "DEFAULT_TOL",
    "LOG_FORMAT",
    "LOG_DATE_FORMAT",
    # Types
    "FloatArray",
]
