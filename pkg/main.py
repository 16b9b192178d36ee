#!/usr/bin/env python3
"""
Главный файл для запуска симулятора отставания.

Пример: python main.py classify --config scenarios/transient_exponential.yaml
"""

import sys
from pathlib import Path

# Добавляем src в путь для импорта
sys.path.append(str(Path(__file__).parent))

from loguru import logger
from src.cli import main as cli_main


if __name__ == "__main__":
    try:
        sys.exit(cli_main())
    except KeyboardInterrupt:
        logger.info("Остановлено пользователем")
        sys.exit(130)
