"""
Доменный слой - типы данных оценивания.

Содержит:
- Доменные модели (value objects)
- Перечисления (enums)
- Доменные исключения (exceptions)

Правила:
- НЕ зависит от других слоев
- Никакого I/O и никаких солверов
- Immutable модели где возможно
"""

from .enums import FitMethod, OutputFormat
from .exceptions import (
    DomainException,
    InvalidArgument,
    InvalidPerturbation,
    MalformedInput,
    NumericalFailure,
    SupportDeficient,
    UsageError,
)
from .models import (
    DensityJet,
    DerivativeValue,
    ExperimentPlan,
    FitOptions,
    FitResult,
    GridFunction,
    KMonotoneMixture,
    LikelihoodValue,
    LseVerification,
    MinimaxConstants,
    MixingMeasure,
    MleVerification,
    Sample,
)

__all__ = [
    # Models
    "Sample",
    "MixingMeasure",
    "KMonotoneMixture",
    "GridFunction",
    "DensityJet",
    "DerivativeValue",
    "LikelihoodValue",
    "FitOptions",
    "FitResult",
    "MleVerification",
    "LseVerification",
    "MinimaxConstants",
    "ExperimentPlan",
    # Enums
    "FitMethod",
    "OutputFormat",
    # Exceptions
    "DomainException",
    "InvalidArgument",
    "SupportDeficient",
    "InvalidPerturbation",
    "MalformedInput",
    "UsageError",
    "NumericalFailure",
]
