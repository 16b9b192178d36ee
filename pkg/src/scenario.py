"""
Файлы сценариев: YAML -> pydantic-модели -> Scenario.

Все секции проверяются с extra="forbid": опечатка в ключе: ошибка, а не
молча проигнорированный параметр.
"""

from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import yaml
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, field_validator

from .config import settings
from .ensemble import derive_seeds
from .exceptions import ConfigError, InfiniteRate, InvalidMeasure
from .fixation import FIXATION_KINDS, MomentFunctionals
from .measures import (
    DiscreteAtoms,
    ExponentialDensity,
    HalfGaussianDensity,
    MutationMeasure,
    PowerLawTail,
    SmallJumpPowerLaw,
    TruncationPolicy,
    auto_truncation,
)
from .simulator import Scenario
from .speed import Constant, PiecewiseConstantRate, SinusoidalRate, SpeedModel, WithBrownianNoise

OUTPUT_FORMATS = ("csv", "jsonl", "json-report")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


# --- мера мутаций ---


class DiscreteAtomsConfig(_Section):
    family: Literal["discrete_atoms"]
    # пустой список: нулевая мера, чистый дрейф
    atoms: List[Tuple[float, float]]

    def build(self) -> MutationMeasure:
        return DiscreteAtoms(self.atoms)


class ExponentialConfig(_Section):
    family: Literal["exponential"]
    rate_scale: PositiveFloat
    mean_effect: PositiveFloat
    two_sided: bool = False

    def build(self) -> MutationMeasure:
        return ExponentialDensity(self.rate_scale, self.mean_effect, self.two_sided)


class HalfGaussianConfig(_Section):
    family: Literal["half_gaussian"]
    rate_scale: PositiveFloat
    scale: PositiveFloat
    two_sided: bool = False

    def build(self) -> MutationMeasure:
        return HalfGaussianDensity(self.rate_scale, self.scale, self.two_sided)


class PowerLawTailConfig(_Section):
    family: Literal["power_law_tail"]
    delta: float
    lower_cut: PositiveFloat = 1.0
    rate_scale: PositiveFloat = 1.0
    two_sided: bool = False

    def build(self) -> MutationMeasure:
        return PowerLawTail(self.delta, self.lower_cut, self.rate_scale, self.two_sided)


class SmallJumpPowerLawConfig(_Section):
    family: Literal["small_jump_power_law"]
    delta: float
    rate_scale: PositiveFloat = 1.0
    tail_coefficient: float = Field(0.0, ge=0.0)
    tail_exponent: float = 5.5
    two_sided: bool = False

    def build(self) -> MutationMeasure:
        return SmallJumpPowerLaw(
            self.delta, self.rate_scale, self.tail_coefficient, self.tail_exponent, self.two_sided
        )


MeasureConfig = Annotated[
    Union[DiscreteAtomsConfig, ExponentialConfig, HalfGaussianConfig, PowerLawTailConfig, SmallJumpPowerLawConfig],
    Field(discriminator="family"),
]


class FixationConfig(_Section):
    kind: Literal["kimura_exp", "haldane_linear", "step_limit"] = "kimura_exp"
    sigma: PositiveFloat = 1.0

    def build(self):
        return FIXATION_KINDS[self.kind](self.sigma)


# --- скорость оптимума ---


class ConstantSpeedConfig(_Section):
    kind: Literal["constant"]
    v: float = Field(ge=0.0)

    def build(self) -> SpeedModel:
        return Constant(self.v)


class PiecewiseConstantConfig(_Section):
    kind: Literal["piecewise_constant"]
    levels: List[float] = Field(min_length=1)
    durations: List[PositiveFloat] = Field(min_length=1)

    def build(self) -> SpeedModel:
        return PiecewiseConstantRate(self.levels, self.durations)


class SinusoidalConfig(_Section):
    kind: Literal["sinusoidal"]
    mean: float
    amplitude: float
    period: PositiveFloat
    phase: float = 0.0
    knot_step: Optional[PositiveFloat] = None

    def build(self) -> SpeedModel:
        return SinusoidalRate(self.mean, self.amplitude, self.period, self.phase, self.knot_step)


DeterministicSpeedConfig = Annotated[
    Union[ConstantSpeedConfig, PiecewiseConstantConfig, SinusoidalConfig],
    Field(discriminator="kind"),
]


class BrownianNoiseConfig(_Section):
    kind: Literal["brownian_noise"]
    base: DeterministicSpeedConfig
    noise_scale: float = Field(ge=0.0)
    step: PositiveFloat = 1.0

    def build(self) -> SpeedModel:
        return WithBrownianNoise(self.base.build(), self.noise_scale, self.step)


SpeedConfig = Annotated[
    Union[ConstantSpeedConfig, PiecewiseConstantConfig, SinusoidalConfig, BrownianNoiseConfig],
    Field(discriminator="kind"),
]

_TAGS = {
    "discrete_atoms",
    "exponential",
    "half_gaussian",
    "power_law_tail",
    "small_jump_power_law",
    "constant",
    "piecewise_constant",
    "sinusoidal",
    "brownian_noise",
}


# --- секции файла ---


class ScenarioConfig(_Section):
    measure: MeasureConfig
    fixation: FixationConfig = Field(default_factory=FixationConfig)
    speed: SpeedConfig
    x0: float = 0.0
    horizon: PositiveFloat
    grid_step: PositiveFloat = 1.0
    truncation: Union[Annotated[float, Field(ge=0.0)], Literal["auto"]] = 0.0
    event_cap: Optional[int] = Field(None, ge=1)


class RunSection(_Section):
    seeds: Union[Annotated[int, Field(ge=1)], List[int]] = 1
    master_seed: int = Field(0, ge=0)
    workers: Optional[int] = Field(None, ge=1)
    sweep_speeds: Optional[List[Annotated[float, Field(ge=0.0)]]] = None
    return_level: float = 0.0
    confidence: float = Field(0.95, gt=0.0, lt=1.0)

    @field_validator("seeds")
    @classmethod
    def _explicit_seeds(cls, value):
        if isinstance(value, list):
            if not value:
                raise ValueError("список seeds не может быть пустым")
            if any(s < 0 for s in value):
                raise ValueError("seed должен быть >= 0")
        return value


class OutputsSection(_Section):
    directory: Optional[str] = None
    formats: List[Literal["csv", "jsonl", "json-report"]] = Field(default_factory=lambda: list(OUTPUT_FORMATS))
    emit_plot_script: bool = False


class RunConfig(_Section):
    """Файл сценария целиком."""

    scenario: ScenarioConfig
    run: RunSection = Field(default_factory=RunSection)
    outputs: OutputsSection = Field(default_factory=OutputsSection)

    @property
    def output_dir(self) -> Path:
        return Path(self.outputs.directory or settings.output_dir)

    @property
    def workers(self) -> int:
        return self.run.workers or settings.default_workers

    def seed_list(self, count: Optional[int] = None) -> List[int]:
        """Явный список seed или `count` seed, выведенных из master_seed."""
        if count is not None:
            return derive_seeds(self.run.master_seed, count)
        if isinstance(self.run.seeds, list):
            return list(self.run.seeds)
        return derive_seeds(self.run.master_seed, self.run.seeds)

    def with_speed(self, v: float) -> "RunConfig":
        """Копия с постоянной скоростью v (для sweep)."""
        scenario = self.scenario.model_copy(update={"speed": ConstantSpeedConfig(kind="constant", v=v)})
        return self.model_copy(update={"scenario": scenario})

    def build_scenario(self) -> Scenario:
        """
        Собирает Scenario.

        Raises:
            ConfigError: Параметры прошли схему, но нарушают ограничения модели
        """
        spec = self.scenario
        try:
            measure = spec.measure.build()
        except InvalidMeasure as e:
            raise ConfigError(str(e), key="scenario.measure") from e
        try:
            model = spec.fixation.build()
        except ValueError as e:
            raise ConfigError(str(e), key="scenario.fixation") from e
        try:
            speed = spec.speed.build()
        except ValueError as e:
            raise ConfigError(str(e), key="scenario.speed") from e

        if spec.truncation == "auto":
            m, _ = MomentFunctionals(measure, model).limits()
            trunc = auto_truncation(measure, m, speed.mean_rate)
        else:
            trunc = TruncationPolicy.for_measure(measure, spec.truncation)

        try:
            return Scenario(
                measure=measure,
                trunc=trunc,
                model=model,
                speed=speed,
                x0=spec.x0,
                horizon=spec.horizon,
                output_grid_step=spec.grid_step,
                event_cap=spec.event_cap or settings.event_cap,
            )
        except InfiniteRate as e:
            raise ConfigError(str(e), key="scenario.truncation") from e
        except ValueError as e:
            raise ConfigError(str(e), key="scenario") from e

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False, allow_unicode=True)


def _key_path(loc: Tuple) -> str:
    return ".".join(str(part) for part in loc if part not in _TAGS)


def parse_config(data: object) -> RunConfig:
    """Проверяет уже разобранный YAML-документ."""
    if not isinstance(data, dict):
        raise ConfigError("корень файла должен быть словарем")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first["msg"], key=_key_path(first["loc"]) or None) from e


def load_config(path: Union[str, Path]) -> RunConfig:
    """
    Читает и проверяет файл сценария.

    Raises:
        ConfigError: Файл не найден, не является YAML или не проходит проверку
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"файл не найден: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"некорректный YAML в {path}: {e}") from e

    config = parse_config(data)
    logger.debug(f"Загружен сценарий {path}")
    return config
