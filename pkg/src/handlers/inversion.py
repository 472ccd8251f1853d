"""
Обработчик команды invert: смешивающая функция распределения по fit-файлу.
"""

import logging
from argparse import Namespace
from typing import Optional

import numpy as np

from src.domain import UsageError
from src.services.densities import MixtureDensity
from src.services.kernels import invert_to_mixing, mixing_cdf, mixture_jet
from src.services.protocols import AnalyticDensity
from src.services.simulation import emit_fit_curves, truth_density
from src.storage import FitFileRepository, write_curves
from src.ui import Messages

logger = logging.getLogger(__name__)


def resolve_truth(tag: Optional[str]) -> Optional[AnalyticDensity]:
    """exp1 или путь к fit-файлу истинной смеси."""
    if tag is None:
        return None
    if tag == "exp1":
        return truth_density(tag)
    return MixtureDensity(FitFileRepository(tag).load().mixture.normalized(), name=tag)


class InversionHandlers:
    """invert."""

    def invert_command(self, args: Namespace) -> str:
        """
        invert --fit fit.json [--t 0.5,1,2] [--curves out.csv --truth exp1]

        Для каждой точки печатает F(t) по формуле обращения и по атомам.
        """
        if not args.t and not args.curves:
            raise UsageError("invert needs --t or --curves")
        fit = FitFileRepository(args.fit).load()
        g = fit.mixture

        lines = []
        for t in args.t or ():
            via_formula = invert_to_mixing(mixture_jet(g, t), g.k, t)
            lines.append(Messages.inversion_line(t, via_formula, mixing_cdf(g.mixing, t)))

        if args.curves:
            grid = np.linspace(args.grid_lower, args.grid_upper, args.grid_points)
            write_curves(emit_fit_curves(fit, resolve_truth(args.truth), grid), args.curves)
            lines.append(f"curves written to {args.curves}")
        return "\n".join(lines)
