from .bounds import BoundsHandlers
from .estimation import EstimationHandlers
from .inversion import InversionHandlers
from .simulation import SimulationHandlers

__all__ = ["EstimationHandlers", "InversionHandlers", "BoundsHandlers", "SimulationHandlers"]
