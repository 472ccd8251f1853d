"""
Обработчики команд fit и verify.
"""

import logging
from argparse import Namespace

from src.domain import FitMethod, FitResult, InvalidArgument, NumericalFailure, Sample
from src.services.lse_solver import LseSolver
from src.services.mle_solver import MleSolver
from src.storage import FitFileRepository, SampleRepository, write_report
from src.ui import Messages

logger = logging.getLogger(__name__)


class EstimationHandlers:
    """fit / verify."""

    def __init__(self, mle: MleSolver, lse: LseSolver):
        self.mle = mle
        self.lse = lse

    def _fit(self, method: FitMethod, sample: Sample, k: int) -> FitResult:
        if method is FitMethod.MLE:
            return self.mle.fit(sample, k)
        if method is FitMethod.LSE:
            return self.lse.fit(sample, k)
        raise InvalidArgument(f"Method {method.value!r} cannot fit data")

    def fit_command(self, args: Namespace) -> str:
        """
        fit --method mle|lse --k K --input data.csv --out fit.json

        При --strict несошедшийся солвер даёт NumericalFailure (fit-файл всё равно пишется).
        """
        sample = SampleRepository(args.input).load()
        method = FitMethod(args.method)
        fit = self._fit(method, sample, args.k)
        FitFileRepository(args.out).save(fit)
        logger.info(f"✅ {method.display_name} fit written to {args.out}")

        if args.strict and not fit.converged:
            raise NumericalFailure(
                f"{method.value} fit did not converge in {fit.iterations} iterations "
                f"(max gradient {fit.max_gradient!r})"
            )
        return Messages.fit_summary(fit)

    def verify_command(self, args: Namespace) -> str:
        """
        verify --fit fit.json --input data.csv --grid 2048 [--out report.json]

        Метод проверки берётся из fit-файла; ручная смесь проверяется по условиям MLE.
        """
        fit = FitFileRepository(args.fit).load()
        sample = SampleRepository(args.input).load()
        tol = self.mle.options.tol

        if fit.method is FitMethod.LSE:
            lse_report = self.lse.verify(fit, sample, args.grid)
            report = lse_report.to_dict()
            summary = Messages.lse_report(lse_report)
            violated = max(-lse_report.min_gap, lse_report.max_knot_residual) > tol * lse_report.scale
        else:
            mle_report = self.mle.verify(fit, sample, args.grid)
            report = mle_report.to_dict()
            summary = Messages.mle_report(mle_report)
            violated = max(mle_report.max_violation, mle_report.max_atom_residual) > tol

        report["converged"] = fit.converged
        report["k"] = fit.k
        if args.out:
            write_report(report, args.out)
            logger.info(f"✅ Verification report written to {args.out}")

        if violated:
            logger.warning(f"⚠️ Characterization violated beyond tolerance {tol!r}")
            if args.strict:
                raise NumericalFailure(f"Verification failed: {summary}")
        return summary
