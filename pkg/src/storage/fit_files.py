"""
Fit-файлы: JSON {"k", "method", "support", "weights", "mass", "diagnostics"}.

Числа пишутся через repr, то есть в кратчайшем представлении, которое читается обратно без потерь.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Optional, Union

from src.domain import FitMethod, FitResult, InvalidArgument, KMonotoneMixture, MalformedInput

logger = logging.getLogger(__name__)

_REQUIRED = ("k", "method", "support", "weights")


def fit_to_record(fit: FitResult, truth: Optional[str] = None) -> dict[str, Any]:
    """Словарь fit-файла для результата солвера."""
    diagnostics = fit.diagnostics_record()
    if truth is not None:
        diagnostics["truth"] = truth
    return mixture_to_record(fit.mixture, fit.method, diagnostics)


def mixture_to_record(
    mixture: KMonotoneMixture, method: FitMethod = FitMethod.MANUAL, diagnostics: Optional[dict[str, Any]] = None
) -> dict[str, Any]:
    return {
        "k": mixture.k,
        "method": method.value,
        "support": [float(a) for a in mixture.support],
        "weights": [float(w) for w in mixture.weights],
        "mass": mixture.mass,
        "diagnostics": dict(diagnostics or {}),
    }


def _finite_or_none(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


class FitFileRepository:
    """Один fit-файл на диске."""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def save_record(self, record: dict[str, Any]) -> None:
        """Пишет готовый словарь; бесконечности и NaN в диагностике заменяются на null."""
        record = dict(record)
        record["diagnostics"] = {key: _finite_or_none(v) for key, v in record.get("diagnostics", {}).items()}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(record, indent=2, allow_nan=False) + "\n", encoding="utf-8")
        logger.debug(f"Fit-file written to {self.path}")

    def save(self, fit: FitResult, truth: Optional[str] = None) -> None:
        self.save_record(fit_to_record(fit, truth))

    def load_record(self) -> dict[str, Any]:
        """Читает и проверяет словарь fit-файла."""
        path = str(self.path)
        try:
            record = json.loads(self.path.read_text(encoding="utf-8"))
        except OSError as e:
            raise MalformedInput(path, None, path, reason=f"cannot read file ({e.strerror})")
        except json.JSONDecodeError as e:
            raise MalformedInput(path, e.lineno, e.msg, reason="invalid JSON")

        if not isinstance(record, dict):
            raise MalformedInput(path, None, type(record).__name__, reason="fit-file must be a JSON object")
        for key in _REQUIRED:
            if key not in record:
                raise MalformedInput(path, None, key, reason="missing field")
        try:
            FitMethod(record["method"])
        except ValueError:
            raise MalformedInput(path, None, str(record["method"]), reason="unknown method")
        return record

    def load(self) -> FitResult:
        """
        Восстанавливает результат из fit-файла.

        Raises:
            MalformedInput: файл не читается или поля не образуют корректную смесь
        """
        record = self.load_record()
        try:
            mixture = KMonotoneMixture.from_atoms(record["k"], record["support"], record["weights"])
        except (InvalidArgument, TypeError, ValueError) as e:
            raise MalformedInput(str(self.path), None, "support/weights", reason=str(e))

        diagnostics = dict(record.get("diagnostics") or {})

        def number(key: str, default: float) -> float:
            value = diagnostics.pop(key, None)
            return float(value) if value is not None else default

        objective = number("objective", math.nan)
        max_gradient = number("max_gradient", math.nan)
        iterations = int(diagnostics.pop("iterations", 0) or 0)
        converged = bool(diagnostics.pop("converged", False))
        return FitResult(
            mixture=mixture,
            objective=objective,
            max_gradient=max_gradient,
            iterations=iterations,
            converged=converged,
            method=FitMethod(record["method"]),
            diagnostics=diagnostics,
        )
