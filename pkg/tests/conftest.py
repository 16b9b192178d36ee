"""Конфигурация pytest и фикстуры для тестирования."""

import tempfile
from pathlib import Path
from typing import Any, Dict

import pytest
import yaml

from src.config import Settings, settings
from src.database import ResultsStore
from src.fixation import KimuraExp, MomentFunctionals, StepLimit
from src.measures import DiscreteAtoms, ExponentialDensity, SmallJumpPowerLaw, TruncationPolicy
from src.simulator import Scenario
from src.speed import Constant


@pytest.fixture
def temp_dir():
    """Создает временную директорию для тестов."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Логи и результаты тестов пишутся во временный каталог; БД результатов отключена."""
    monkeypatch.setattr(settings, "logs_dir", str(tmp_path / "logs"))
    monkeypatch.setattr(settings, "output_dir", str(tmp_path / "runs"))
    monkeypatch.setattr(settings, "results_db_url", None)
    monkeypatch.setattr(settings, "default_workers", 1)
    yield settings


@pytest.fixture
def test_settings(temp_dir):
    """Настройки для тестирования."""
    return Settings(
        log_level="DEBUG",
        output_dir=str(temp_dir / "runs"),
        logs_dir=str(temp_dir / "logs"),
        results_db_url=f"sqlite:///{temp_dir}/results.db",
    )


@pytest.fixture
def test_store(test_settings):
    """Тестовая база результатов."""
    store = ResultsStore(test_settings.results_db_url)
    store.create_tables()
    return store


@pytest.fixture
def exponential():
    """Экспоненциальная мера с m = 1, V = 2."""
    return ExponentialDensity(rate_scale=1.0, mean_effect=1.0)


@pytest.fixture
def small_jump_measure():
    """Малые скачки alpha^(-1.5) на (0, 1) и хвост alpha^(-5.5) на (1, inf)."""
    return SmallJumpPowerLaw(delta=0.5, rate_scale=1.0, tail_coefficient=1.0, tail_exponent=5.5)


@pytest.fixture
def exp_funcs(exponential):
    return MomentFunctionals(exponential, KimuraExp(sigma=1.0))


def make_scenario(
    measure=None,
    model=None,
    speed=None,
    x0: float = 0.0,
    horizon: float = 100.0,
    grid_step: float = 1.0,
    epsilon: float = 0.0,
    event_cap: int = 10**6,
) -> Scenario:
    """Сценарий с разумными значениями по умолчанию."""
    measure = measure or ExponentialDensity(1.0, 1.0)
    return Scenario(
        measure=measure,
        trunc=TruncationPolicy.for_measure(measure, epsilon),
        model=model or KimuraExp(1.0),
        speed=speed or Constant(2.0),
        x0=x0,
        horizon=horizon,
        output_grid_step=grid_step,
        event_cap=event_cap,
    )


@pytest.fixture
def atoms_step_scenario():
    """Двусторонние атомы с пределом сильного отбора."""
    return make_scenario(
        measure=DiscreteAtoms([(1.0, 0.7), (-0.5, 0.2)]),
        model=StepLimit(1.0),
        speed=Constant(0.7),
        x0=-10.0,
        horizon=200.0,
    )


@pytest.fixture
def base_config() -> Dict[str, Any]:
    """Минимальный файл сценария (как словарь)."""
    return {
        "scenario": {
            "measure": {"family": "exponential", "rate_scale": 1.0, "mean_effect": 1.0},
            "fixation": {"kind": "kimura_exp", "sigma": 1.0},
            "speed": {"kind": "constant", "v": 2.0},
            "x0": 0.0,
            "horizon": 20.0,
            "grid_step": 1.0,
        },
        "run": {"seeds": 1, "master_seed": 12345},
        "outputs": {"formats": ["csv", "jsonl", "json-report"]},
    }


# Функции-помощники для тестов
def write_config(directory: Path, data: Dict[str, Any], name: str = "scenario.yaml") -> Path:
    """Записывает словарь сценария в YAML-файл."""
    path = Path(directory) / name
    path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
    return path
