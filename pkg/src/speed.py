"""
Модели скорости сдвига оптимума v(t) = int_0^t v1(s) ds + R_t.

Отставание между событиями уменьшается ровно на приращение v(t).
"""

import math
from abc import ABC, abstractmethod
from typing import Any, ClassVar, Dict, Optional, Sequence

import numpy as np


class SpeedModel(ABC):
    """Базовый класс модели скорости."""

    kind: ClassVar[str]

    is_constant: ClassVar[bool] = False
    has_noise: ClassVar[bool] = False

    @abstractmethod
    def drift(self, t0: float, t1: float) -> float:
        """Детерминированная часть int_{t0}^{t1} v1(s) ds."""

    @property
    @abstractmethod
    def mean_rate(self) -> float:
        """Среднее по Чезаро vbar = lim v(t)/t."""

    @property
    @abstractmethod
    def v_sup(self) -> float:
        """sup_t v1(t)."""

    @property
    @abstractmethod
    def v_inf(self) -> float:
        """inf_t v1(t)."""

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Каноническое описание параметров."""

    def displacement(self, t0: float, t1: float, rng: Optional[np.random.Generator] = None) -> float:
        """Сдвиг оптимума за [t0, t1]; отставание уменьшается на эту величину."""
        return self.drift(t0, t1)

    def knot_times(self, horizon: float) -> np.ndarray:
        """Внутренние узлы (0, horizon), в которых траектория должна фиксироваться."""
        return np.empty(0)

    def optimum(self, t: float) -> float:
        """Детерминированная часть v(t)."""
        return self.drift(0.0, t)

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.describe().items() if k != "kind")
        return f"<{type(self).__name__}({params})>"


class Constant(SpeedModel):
    """v(t) = v * t."""

    kind = "constant"
    is_constant = True

    def __init__(self, v: float):
        if not (v >= 0.0 and math.isfinite(v)):
            raise ValueError(f"Скорость должна быть конечной и >= 0 (получено {v})")
        self.v = float(v)

    def drift(self, t0: float, t1: float) -> float:
        return self.v * (t1 - t0)

    @property
    def mean_rate(self) -> float:
        return self.v

    @property
    def v_sup(self) -> float:
        return self.v

    @property
    def v_inf(self) -> float:
        return self.v

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "v": self.v}


class DeterministicRate(SpeedModel):
    """Ограниченная детерминированная скорость v1(t) с известным средним."""

    def drift(self, t0: float, t1: float) -> float:
        return self.cumulative(t1) - self.cumulative(t0)

    @abstractmethod
    def cumulative(self, t: float) -> float:
        """int_0^t v1(s) ds."""

    @abstractmethod
    def rate(self, t: Any) -> Any:
        """v1(t)."""


class PiecewiseConstantRate(DeterministicRate):
    """
    Периодическая ступенчатая скорость: уровни levels[i] длительностью durations[i].

    Между сменами уровня отставание меняется линейно, поэтому узлы траектории
    ставятся в моменты смены.
    """

    kind = "piecewise_constant"

    def __init__(self, levels: Sequence[float], durations: Sequence[float]):
        if len(levels) == 0 or len(levels) != len(durations):
            raise ValueError("levels и durations должны быть непустыми и одной длины")
        if any(d <= 0.0 for d in durations):
            raise ValueError("Длительности должны быть > 0")
        if any(not math.isfinite(level) for level in levels):
            raise ValueError("Уровни скорости должны быть конечными")

        self.levels = np.asarray(levels, dtype=float)
        self.durations = np.asarray(durations, dtype=float)
        self.period = float(self.durations.sum())
        self._edges = np.concatenate([[0.0], np.cumsum(self.durations)])
        self._edge_integrals = np.concatenate([[0.0], np.cumsum(self.levels * self.durations)])

    def cumulative(self, t: float) -> float:
        cycles, phase = divmod(t, self.period)
        i = min(int(np.searchsorted(self._edges, phase, side="right")) - 1, len(self.levels) - 1)
        partial = self._edge_integrals[i] + self.levels[i] * (phase - self._edges[i])
        return float(cycles * self._edge_integrals[-1] + partial)

    def rate(self, t: Any) -> Any:
        phase = np.mod(t, self.period)
        i = np.minimum(np.searchsorted(self._edges, phase, side="right") - 1, len(self.levels) - 1)
        return self.levels[i]

    def knot_times(self, horizon: float) -> np.ndarray:
        cycles = int(math.ceil(horizon / self.period))
        starts = (np.arange(cycles)[:, None] * self.period + self._edges[None, :-1]).ravel()
        return starts[(starts > 0.0) & (starts < horizon)]

    @property
    def mean_rate(self) -> float:
        return float(self._edge_integrals[-1] / self.period)

    @property
    def v_sup(self) -> float:
        return float(self.levels.max())

    @property
    def v_inf(self) -> float:
        return float(self.levels.min())

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "levels": self.levels.tolist(), "durations": self.durations.tolist()}


class SinusoidalRate(DeterministicRate):
    """v1(t) = mean + amplitude * sin(2 pi t / period + phase)."""

    kind = "sinusoidal"

    def __init__(
        self,
        mean: float,
        amplitude: float,
        period: float,
        phase: float = 0.0,
        knot_step: Optional[float] = None,
    ):
        if period <= 0.0:
            raise ValueError("Период должен быть > 0")
        self.mean = float(mean)
        self.amplitude = float(amplitude)
        self.period = float(period)
        self.phase = float(phase)
        self.knot_step = float(knot_step) if knot_step else self.period / 64.0
        if self.knot_step <= 0.0:
            raise ValueError("knot_step должен быть > 0")

    def cumulative(self, t: float) -> float:
        omega = 2.0 * math.pi / self.period
        oscillation = (math.cos(self.phase) - math.cos(omega * t + self.phase)) / omega
        return self.mean * t + self.amplitude * oscillation

    def rate(self, t: Any) -> Any:
        return self.mean + self.amplitude * np.sin(2.0 * np.pi * np.asarray(t) / self.period + self.phase)

    def knot_times(self, horizon: float) -> np.ndarray:
        knots = np.arange(1, int(math.ceil(horizon / self.knot_step))) * self.knot_step
        return knots[knots < horizon]

    @property
    def mean_rate(self) -> float:
        return self.mean

    @property
    def v_sup(self) -> float:
        return self.mean + abs(self.amplitude)

    @property
    def v_inf(self) -> float:
        return self.mean - abs(self.amplitude)

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "mean": self.mean,
            "amplitude": self.amplitude,
            "period": self.period,
            "phase": self.phase,
            "knot_step": self.knot_step,
        }


class WithBrownianNoise(SpeedModel):
    """
    v(t) = base(t) + noise_scale * W_t.

    Приращения W берутся точно (независимые гауссовы) в моменты событий и
    на сетке шага `step`; R_t / t -> 0 п.н.
    """

    kind = "brownian_noise"
    has_noise = True

    def __init__(self, base: SpeedModel, noise_scale: float, step: float = 1.0):
        if isinstance(base, WithBrownianNoise):
            raise ValueError("Базовая скорость не может сама содержать шум")
        if noise_scale < 0.0:
            raise ValueError("noise_scale должен быть >= 0")
        if step <= 0.0:
            raise ValueError("step должен быть > 0")
        self.base = base
        self.noise_scale = float(noise_scale)
        self.step = float(step)

    def drift(self, t0: float, t1: float) -> float:
        return self.base.drift(t0, t1)

    def displacement(self, t0: float, t1: float, rng: Optional[np.random.Generator] = None) -> float:
        shift = self.base.drift(t0, t1)
        if rng is None or self.noise_scale == 0.0 or t1 <= t0:
            return shift
        return shift + self.noise_scale * math.sqrt(t1 - t0) * rng.standard_normal()

    def knot_times(self, horizon: float) -> np.ndarray:
        grid = np.arange(1, int(math.ceil(horizon / self.step))) * self.step
        merged = np.union1d(grid[grid < horizon], self.base.knot_times(horizon))
        return merged

    @property
    def mean_rate(self) -> float:
        return self.base.mean_rate

    @property
    def v_sup(self) -> float:
        return self.base.v_sup

    @property
    def v_inf(self) -> float:
        return self.base.v_inf

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "base": self.base.describe(),
            "noise_scale": self.noise_scale,
            "step": self.step,
        }


SPEED_KINDS: Dict[str, type] = {
    cls.kind: cls for cls in (Constant, PiecewiseConstantRate, SinusoidalRate, WithBrownianNoise)
}
