"""Вспомогательные функции и настройка логирования."""

import math
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from loguru import logger

from .config import settings


def setup_logging(log_file: Optional[str] = None, level: Optional[str] = None) -> None:
    """
    Настройка логирования.

    Args:
        log_file: Имя файла для логов (опционально)
        level: Уровень консольного вывода (по умолчанию из настроек)
    """
    # Убираем стандартный обработчик
    logger.remove()

    # Консольный вывод
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
        level=level or settings.log_level,
        colorize=True,
    )

    # Файловый вывод
    logs_path = Path(settings.logs_dir) / (log_file or "lagsim.log")
    logs_path.parent.mkdir(parents=True, exist_ok=True)

    logger.add(
        str(logs_path),
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
        level="DEBUG",
        rotation="10 MB",
        retention="1 month",
        compression="zip",
    )

    logger.debug(f"Логирование настроено. Файл: {logs_path}")


def format_number(value: float, digits: int = 3) -> str:
    """Форматирует число, включая бесконечность и NaN."""
    if value is None:
        return "-"
    if math.isinf(value):
        return "+inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return f"{value:.{digits}f}"


def format_report(report) -> str:
    """
    Форматирует RegimeReport для вывода в консоль.

    Args:
        report: Результат analysis.classify

    Returns:
        Отформатированная строка
    """
    lines = []
    verdict = report.verdict.value
    if report.speed is not None:
        lines.append(f"{verdict}, speed {format_number(report.speed)}")
    else:
        lines.append(verdict)

    lines.append(f"  m    = {format_number(report.m, 6)}")
    lines.append(f"  V    = {format_number(report.V, 6)}")
    lines.append(f"  vbar = {format_number(report.vbar, 6)}")

    for evidence in report.condition_evidence:
        lines.append("")
        lines.append(format_condition_table(evidence))

    for note in report.notes:
        lines.append(f"  note: {note}")

    return "\n".join(lines)


def format_condition_table(verdict, limit: int = 5) -> str:
    """
    Форматирует таблицу значений условия на последних точках сетки.

    Args:
        verdict: ConditionVerdict
        limit: Сколько последних точек показать
    """
    header = f"[{verdict.id.value}] satisfied={verdict.satisfied.value} trend={verdict.trend}"
    rows = [header, f"  {'x':>14}  {'value':>14}"]
    for x, value in list(zip(verdict.grid, verdict.values))[-limit:]:
        rows.append(f"  {x:>14.6g}  {format_number(value, 6):>14}")
    rows.append(
        f"  limit≈{format_number(verdict.limit_estimate, 6)}  margin={format_number(verdict.margin, 6)}"
    )
    return "\n".join(rows)


def format_table(headers: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Простая текстовая таблица для сводок ансамбля."""
    rows = [[format_number(c) if isinstance(c, float) else str(c) for c in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]

    line = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
    body = ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in rows]
    return "\n".join([line, *body])


def json_safe(value: Any) -> Any:
    """
    Приводит значение к JSON-совместимому виду.

    Бесконечности и NaN записываются строками "inf", "-inf", "nan";
    numpy-типы и перечисления: встроенными типами.
    """
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [json_safe(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def json_float(value: Any) -> float:
    """Обратное преобразование для чисел, записанных json_safe."""
    return float(value)
