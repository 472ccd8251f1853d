"""
Обработчик команды simulate.
"""

import logging
from argparse import Namespace

from src.domain import ExperimentPlan, FitOptions, NumericalFailure
from src.services.simulation import SimulationService
from src.storage import FitFileRepository, StudyRepository, fit_to_record
from src.ui import Messages

logger = logging.getLogger(__name__)


class SimulationHandlers:
    """simulate."""

    async def simulate_command(self, args: Namespace, options: FitOptions) -> str:
        """
        simulate --dist exp1 --k 3,6 --n 100,1000 --reps 20 --seed 17 --out dir/

        --dist может быть путём к fit-файлу: тогда истинной плотностью служит эта смесь.
        """
        truth_mixture = None
        if args.dist != "exp1":
            truth_mixture = FitFileRepository(args.dist).load().mixture.normalized()

        plan = ExperimentPlan(
            distribution=args.dist,
            ks=tuple(args.k),
            ns=tuple(args.n),
            replications=args.reps,
            seed=args.seed,
            grid_lower=args.grid_lower,
            grid_upper=args.grid_upper,
            grid_points=args.grid_points,
            output_dir=args.out,
            jobs=args.jobs,
            options=options,
        )
        result = await SimulationService(truth_mixture).run(plan)
        records = [(name, fit_to_record(fit, truth=result.truth)) for name, fit in result.fits]
        StudyRepository(args.out).save(result.rows, result.summary, result.timings, records)

        failed = int((result.rows["status"] != "ok").sum())
        if args.strict and failed:
            raise NumericalFailure(f"{failed} fit(s) failed or did not converge")
        return Messages.study_summary(len(result.rows), failed, args.out)
