"""Иерархия исключений пакета."""

from typing import Any, Optional


class LagSimError(Exception):
    """Базовое исключение симулятора."""


class InvalidMeasure(LagSimError):
    """Параметры меры мутаций не удовлетворяют условию интегрируемости."""


class InfiniteRate(LagSimError):
    """Суммарная интенсивность бесконечна (нужна отсечка eps > 0)."""


class QuadratureError(LagSimError):
    """Ошибка численного интегрирования."""


class NonConvergent(QuadratureError):
    """Адаптивная квадратура не сошлась за отведенное число разбиений."""


class Divergent(QuadratureError):
    """Подынтегральное выражение неинтегрируемо относительно меры."""


class SimulationError(LagSimError):
    """Ошибка построения траектории."""


class BudgetExceeded(SimulationError):
    """Превышен лимит событий; частичная траектория доступна в `trajectory`."""

    def __init__(self, message: str, trajectory: Any = None):
        super().__init__(message)
        self.trajectory = trajectory


class EnvelopeViolation(SimulationError):
    """Зафиксирован скачок вне допустимой области g(x, alpha) > 0."""


class WindowViolation(LagSimError):
    """Траектория пересекает 0 внутри проверяемого окна."""


class NoCrossings(LagSimError):
    """В ансамбле нет ни одного пересечения уровня."""


class ConfigError(LagSimError):
    """Некорректный файл конфигурации сценария."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class MixedScenarioError(LagSimError):
    """Попытка объединить результаты разных сценариев."""
