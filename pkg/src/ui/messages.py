"""
Шаблоны сообщений для стандартного вывода.
"""

from typing import Any

from src.domain import FitResult, LseVerification, MleVerification


def _num(value: float) -> str:
    """Короткая запись для человека; машинные файлы пишутся через repr."""
    return f"{value:.6g}"


class Messages:
    """Генератор итоговых строк команд."""

    # ═══════════════════════════════════════════════════════════
    # 📈 ОЦЕНКИ
    # ═══════════════════════════════════════════════════════════

    @staticmethod
    def fit_summary(fit: FitResult) -> str:
        status = "converged" if fit.converged else "not converged"
        line = (
            f"{status} max_gradient={_num(fit.max_gradient)} method={fit.method.value} k={fit.k} "
            f"atoms={fit.mixture.m} mass={_num(fit.mixture.mass)} objective={_num(fit.objective)} "
            f"iterations={fit.iterations}"
        )
        if "min_fenchel_gap" in fit.diagnostics:
            line += f" min_fenchel_gap={_num(fit.diagnostics['min_fenchel_gap'])}"
        return line

    @staticmethod
    def mle_report(report: MleVerification) -> str:
        return (
            f"mle verification: max_violation={_num(report.max_violation)} "
            f"max_atom_residual={_num(report.max_atom_residual)} "
            f"moment_residual={_num(report.moment_residual)} tail={_num(report.tail_value)} "
            f"mass={_num(report.mass)} grid={len(report.gradient)}"
        )

    @staticmethod
    def lse_report(report: LseVerification) -> str:
        return (
            f"lse verification: min_fenchel_gap={_num(report.min_gap)} "
            f"max_knot_residual={_num(report.max_knot_residual)} "
            f"stationarity_residual={_num(report.stationarity_residual)} scale={_num(report.scale)} "
            f"mass={_num(report.mass)} grid={len(report.gap)}"
        )

    # ═══════════════════════════════════════════════════════════
    # 🔁 ОБРАЩЕНИЕ
    # ═══════════════════════════════════════════════════════════

    @staticmethod
    def inversion_line(t: float, via_formula: float, via_atoms: float) -> str:
        return f"t={_num(t)} F_inversion={_num(via_formula)} F_atoms={_num(via_atoms)}"

    # ═══════════════════════════════════════════════════════════
    # 🧪 СИМУЛЯЦИИ
    # ═══════════════════════════════════════════════════════════

    @staticmethod
    def study_summary(rows: int, failed: int, output_dir: Any) -> str:
        text = f"study finished: {rows} rows written to {output_dir}"
        if failed:
            text += f" ({failed} failed fits)"
        return text
