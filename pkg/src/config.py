"""Конфигурация приложения."""

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Настройки приложения (переменные окружения с префиксом LAGSIM_)."""

    model_config = SettingsConfigDict(
        env_prefix="LAGSIM_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application settings
    log_level: str = Field("INFO")

    # Paths
    output_dir: str = Field("./runs")
    logs_dir: str = Field("./logs")

    # Results store (пустая строка отключает запись в БД)
    results_db_url: Optional[str] = Field(None)

    # Simulation defaults
    default_workers: int = Field(1, ge=1)
    event_cap: int = Field(10**8, ge=1)


# Глобальная конфигурация
settings = Settings()
