from .densities import Exponential, MixtureDensity, gamma_mixing_cdf
from .lse_solver import LseSolver, fit_lse, verify_lse
from .mle_solver import MleSolver, fit_mle, verify_mle
from .protocols import AnalyticDensity
from .simulation import SimulationService

__all__ = [
    "MleSolver",
    "LseSolver",
    "SimulationService",
    "AnalyticDensity",
    "Exponential",
    "MixtureDensity",
    "gamma_mixing_cdf",
    "fit_mle",
    "verify_mle",
    "fit_lse",
    "verify_lse",
]
