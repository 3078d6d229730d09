"""Иерархия исключений ffbias.

Три семейства соответствуют кодам выхода CLI:

* :class:`UsageError` – ошибка пользователя или конфигурации (код 2);
* :class:`ResourceError` – не хватило бюджета вычислений (код 1);
* :class:`VerificationError` – проверка тождества или оценки не прошла (код 1).
"""

from __future__ import annotations

from typing import Any, Optional


class FFBiasError(Exception):
    """Базовый класс всех ошибок проекта."""

    exit_code: int = 1


class UsageError(FFBiasError):
    exit_code = 2


class ResourceError(FFBiasError):
    exit_code = 1


class VerificationError(FFBiasError):
    exit_code = 1


# --- finite_field ----------------------------------------------------------


class NotPrimeError(UsageError):
    def __init__(self, p: int) -> None:
        super().__init__(f"{p} is not prime")
        self.p = p


class SizeOverflowError(UsageError):
    def __init__(self, size: int, limit: int) -> None:
        super().__init__(f"field of size {size} exceeds the element budget {limit}")
        self.size = size
        self.limit = limit


class DivisionByZeroError(UsageError, ZeroDivisionError):
    pass


class MixedFieldsError(UsageError, TypeError):
    pass


class FieldSpecError(UsageError):
    pass


# --- polynomial ------------------------------------------------------------


class PolynomialSyntaxError(UsageError):
    """Синтаксическая ошибка разбора; ``position`` – смещение в строке."""

    def __init__(self, message: str, text: str, position: int) -> None:
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class UnknownVariableError(PolynomialSyntaxError):
    pass


class CoefficientNotInFieldError(PolynomialSyntaxError):
    pass


class DimensionMismatchError(UsageError):
    pass


class ZeroPolynomialError(UsageError):
    pass


class NotHomogeneousError(UsageError):
    pass


# --- fiber_census ----------------------------------------------------------


class BudgetExceededError(ResourceError):
    def __init__(self, required: int, budget: int) -> None:
        super().__init__(f"sweep needs {required} evaluations, budget is {budget}")
        self.required = required
        self.budget = budget


class NoCompletedLevelsError(ResourceError):
    pass


class DivisibilityViolationError(VerificationError):
    pass


class IdentityViolationError(VerificationError):
    def __init__(self, message: str, affine: int, projective: int) -> None:
        super().__init__(f"{message}: affine {affine} != projective {projective}")
        self.affine = affine
        self.projective = projective


# --- rank_strength ---------------------------------------------------------


class DegreeTooLowError(UsageError):
    pass


class NotQuadraticError(UsageError):
    pass


class CharacteristicTwoError(UsageError):
    pass


class MismatchedVarietyError(UsageError):
    pass


class SandwichViolationError(VerificationError):
    pass


class WitnessError(VerificationError):
    """Разложение не раскрывается обратно в целевой многочлен."""


# --- singular_locus --------------------------------------------------------


class InsufficientLevelsError(UsageError):
    pass


class ConePartialsMismatchError(VerificationError):
    pass


# --- experiments -----------------------------------------------------------


class ConfigError(UsageError):
    pass


class NotCGoodError(VerificationError):
    def __init__(self, message: str, report: Optional[Any] = None) -> None:
        super().__init__(message)
        self.report = report


class BoundViolationError(VerificationError):
    def __init__(self, message: str, report: Optional[Any] = None) -> None:
        super().__init__(message)
        self.report = report


class LemmaViolationError(VerificationError):
    def __init__(self, message: str, rows: Optional[Any] = None) -> None:
        super().__init__(message)
        self.rows = rows
