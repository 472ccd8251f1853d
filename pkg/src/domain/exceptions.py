"""
Доменные исключения.

Все исключения бизнес-логики должны наследоваться от DomainException.
"""

from typing import Optional


class DomainException(Exception):
    """Базовое исключение доменного слоя."""

    def __init__(self, message: str, code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.code = code or self.__class__.__name__


class InvalidArgument(DomainException):
    """Нарушено предусловие операции."""

    def __init__(self, message: str):
        super().__init__(message, code="INVALID_ARGUMENT")


class SupportDeficient(DomainException):
    """Плотность обращается в ноль в точке выборки."""

    def __init__(self, x: float, support_max: float):
        super().__init__(
            f"Density vanishes at observation {x!r} (largest atom {support_max!r})", code="SUPPORT_DEFICIENT"
        )
        self.x = x
        self.support_max = support_max


class InvalidPerturbation(DomainException):
    """Возмущённая плотность не k-монотонна на проверочной сетке."""

    def __init__(self, x: float, order: int, value: float):
        super().__init__(
            f"Perturbed density fails sign check of derivative {order} at x={x!r} (value {value!r})",
            code="INVALID_PERTURBATION",
        )
        self.x = x
        self.order = order
        self.value = value


class MalformedInput(DomainException):
    """Некорректный входной файл."""

    def __init__(self, path: str, line: Optional[int], token: str, reason: str = "cannot parse"):
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {reason}: {token!r}", code="MALFORMED_INPUT")
        self.path = path
        self.line = line
        self.token = token


class UsageError(DomainException):
    """Ошибка в аргументах командной строки."""

    def __init__(self, message: str):
        super().__init__(message, code="USAGE_ERROR")


class NumericalFailure(DomainException):
    """Солвер не сошёлся, а запрошен строгий режим."""

    def __init__(self, message: str):
        super().__init__(message, code="NUMERICAL_FAILURE")
