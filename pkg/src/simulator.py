"""
Точное событийное моделирование отставания X_t.

Предложения мутаций приходят с интенсивностью lambda_eps = nu({|alpha| >= eps}),
эффект A берется из нормированной меры, метка Xi ~ U[0, 1]; скачок
применяется, если Xi <= g(X_{T-}, A). Между событиями X уменьшается на
приращение v(t).
"""

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .config import settings
from .exceptions import BudgetExceeded, EnvelopeViolation, WindowViolation
from .fixation import FixationModel, MomentFunctionals
from .measures import MutationMeasure, TruncationPolicy, integrate_against, sample_effect, total_rate
from .speed import Constant, SpeedModel


@dataclass
class Scenario:
    """Полный набор параметров одной модели."""

    measure: MutationMeasure
    trunc: TruncationPolicy
    model: FixationModel
    speed: SpeedModel
    x0: float
    horizon: float
    output_grid_step: float
    event_cap: int = field(default_factory=lambda: settings.event_cap)

    def __post_init__(self):
        if not (self.horizon > 0.0 and math.isfinite(self.horizon)):
            raise ValueError(f"horizon должен быть конечным и > 0 (получено {self.horizon})")
        if not self.output_grid_step > 0.0:
            raise ValueError(f"output_grid_step должен быть > 0 (получено {self.output_grid_step})")
        if not math.isfinite(self.x0):
            raise ValueError("x0 должен быть конечным")
        if self.event_cap < 1:
            raise ValueError("event_cap должен быть >= 1")
        # InfiniteRate при eps = 0 для мер бесконечной массы
        total_rate(self.measure, self.trunc)

    @property
    def rate(self) -> float:
        return total_rate(self.measure, self.trunc)

    def functionals(self) -> MomentFunctionals:
        return MomentFunctionals(self.measure, self.model)

    def describe(self) -> Dict[str, Any]:
        return {
            "measure": self.measure.describe(),
            "truncation": {"epsilon": self.trunc.epsilon},
            "fixation": self.model.describe(),
            "speed": self.speed.describe(),
            "x0": self.x0,
            "horizon": self.horizon,
            "output_grid_step": self.output_grid_step,
        }

    def scenario_hash(self) -> str:
        """sha256 канонического JSON-описания сценария."""
        canonical = json.dumps(self.describe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class EventRecord(NamedTuple):
    t: float
    kind: str
    alpha: float
    x_before: float
    x_after: float


FIXED = "fixed"
REJECTED = "proposed-rejected"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Траектория с журналом событий.

    Путь хранится узлами (t_i, X_{t_i-}, X_{t_i}); между соседними узлами
    X линейна. Узлы: 0, фиксации, узлы модели скорости, конец траектории.
    """

    x0: float
    horizon: float
    event_t: np.ndarray
    event_alpha: np.ndarray
    event_x_before: np.ndarray
    event_fixed: np.ndarray
    knot_t: np.ndarray
    knot_x_minus: np.ndarray
    knot_x_plus: np.ndarray
    sample_t: np.ndarray
    sample_x: np.ndarray
    scenario_hash: str = ""
    seed: Optional[int] = None
    complete: bool = True

    # --- события ---

    @property
    def n_events(self) -> int:
        return int(self.event_t.size)

    @property
    def n_fixed(self) -> int:
        return int(np.count_nonzero(self.event_fixed))

    @property
    def events(self) -> List[EventRecord]:
        records = []
        for t, alpha, x_before, fixed in zip(
            self.event_t.tolist(), self.event_alpha.tolist(), self.event_x_before.tolist(), self.event_fixed.tolist()
        ):
            x_after = x_before + alpha if fixed else x_before
            records.append(EventRecord(t, FIXED if fixed else REJECTED, alpha, x_before, x_after))
        return records

    def fixed_jumps(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(t, alpha, X_{t-}) зафиксированных скачков."""
        mask = self.event_fixed
        return self.event_t[mask], self.event_alpha[mask], self.event_x_before[mask]

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.sample_t.tolist(), self.sample_x.tolist()))

    # --- путь ---

    @property
    def end_time(self) -> float:
        return float(self.knot_t[-1])

    @property
    def final_value(self) -> float:
        return float(self.knot_x_plus[-1])

    def value_at(self, t: Any) -> Any:
        """X_t (непрерывна справа)."""
        times = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(self.knot_t, times, side="right") - 1, 0, len(self.knot_t) - 1)
        j = np.minimum(i + 1, len(self.knot_t) - 1)
        span = self.knot_t[j] - self.knot_t[i]
        weight = np.where(span > 0.0, (times - self.knot_t[i]) / np.where(span > 0.0, span, 1.0), 0.0)
        value = self.knot_x_plus[i] + weight * (self.knot_x_minus[j] - self.knot_x_plus[i])
        return float(value) if value.ndim == 0 else value

    def value_before(self, t: Any) -> Any:
        """X_{t-}."""
        times = np.asarray(t, dtype=float)
        j = np.clip(np.searchsorted(self.knot_t, times, side="left"), 1, len(self.knot_t) - 1)
        i = j - 1
        span = self.knot_t[j] - self.knot_t[i]
        weight = np.where(span > 0.0, (times - self.knot_t[i]) / np.where(span > 0.0, span, 1.0), 1.0)
        value = self.knot_x_plus[i] + weight * (self.knot_x_minus[j] - self.knot_x_plus[i])
        value = np.where(times <= 0.0, self.x0, value)
        return float(value) if value.ndim == 0 else value

    def segments(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Линейные участки (t_start, t_end, x_start, x_end) между узлами."""
        return self.knot_t[:-1], self.knot_t[1:], self.knot_x_plus[:-1], self.knot_x_minus[1:]

    def _first_crossing(self, level: float, below: bool) -> Optional[float]:
        inside = (lambda x: x < level) if below else (lambda x: x >= level)
        if inside(self.x0):
            return 0.0

        t_start, t_end, x_start, x_end = self.segments()
        at_knot = inside(self.knot_x_plus)
        reached = inside(x_end)
        for i in np.flatnonzero(at_knot[:-1] | reached):
            if at_knot[i]:
                return float(self.knot_t[i])
            # линейный участок пересекает уровень
            fraction = (x_start[i] - level) / (x_start[i] - x_end[i])
            return float(t_start[i] + fraction * (t_end[i] - t_start[i]))
        if at_knot[-1]:
            return float(self.knot_t[-1])
        return None

    def first_time_below(self, level: float = 0.0) -> Optional[float]:
        """inf{t : X_t < level} или None."""
        return self._first_crossing(level, below=True)

    def first_time_at_or_above(self, level: float = 0.0) -> Optional[float]:
        """inf{t : X_t >= level} или None."""
        return self._first_crossing(level, below=False)

    @classmethod
    def from_path(
        cls,
        x0: float,
        horizon: float,
        jumps: Sequence[Tuple[float, float]] = (),
        speed: Optional[SpeedModel] = None,
        output_grid_step: float = 1.0,
    ) -> "Trajectory":
        """Детерминированная траектория с заданными скачками (t, alpha)."""
        speed = speed or Constant(0.0)
        builder = _PathBuilder(x0)
        knots = [(t, None) for t in speed.knot_times(horizon)] + [(t, alpha) for t, alpha in jumps if 0 < t < horizon]
        t_prev, x = 0.0, x0
        for t, alpha in sorted(knots, key=lambda item: item[0]):
            x_minus = x - speed.drift(t_prev, t)
            if alpha is None:
                builder.knot(t, x_minus)
                x = x_minus
            else:
                builder.event(t, alpha, x_minus, True)
                builder.knot(t, x_minus, alpha)
                x = x_minus + alpha
            t_prev = t
        builder.knot(horizon, x - speed.drift(t_prev, horizon))
        return builder.build(horizon, output_grid_step)


class _PathBuilder:
    """Накопитель событий и узлов пути."""

    def __init__(self, x0: float):
        self.x0 = x0
        self.event_t: List[float] = []
        self.event_alpha: List[float] = []
        self.event_x_before: List[float] = []
        self.event_fixed: List[bool] = []
        self.knot_t: List[float] = [0.0]
        self.knot_x_minus: List[float] = [x0]
        self.knot_x_plus: List[float] = [x0]

    def event(self, t: float, alpha: float, x_before: float, fixed: bool) -> None:
        self.event_t.append(t)
        self.event_alpha.append(alpha)
        self.event_x_before.append(x_before)
        self.event_fixed.append(fixed)

    def knot(self, t: float, x_minus: float, alpha: float = 0.0) -> None:
        self.knot_t.append(t)
        self.knot_x_minus.append(x_minus)
        self.knot_x_plus.append(x_minus + alpha)

    def build(
        self,
        horizon: float,
        output_grid_step: float,
        scenario_hash: str = "",
        seed: Optional[int] = None,
        complete: bool = True,
    ) -> Trajectory:
        n = int(math.floor(horizon / output_grid_step + 1e-9))
        sample_t = np.arange(n + 1) * output_grid_step
        sample_t = sample_t[sample_t <= self.knot_t[-1]]

        trajectory = Trajectory(
            x0=self.x0,
            horizon=horizon,
            event_t=np.asarray(self.event_t, dtype=float),
            event_alpha=np.asarray(self.event_alpha, dtype=float),
            event_x_before=np.asarray(self.event_x_before, dtype=float),
            event_fixed=np.asarray(self.event_fixed, dtype=bool),
            knot_t=np.asarray(self.knot_t, dtype=float),
            knot_x_minus=np.asarray(self.knot_x_minus, dtype=float),
            knot_x_plus=np.asarray(self.knot_x_plus, dtype=float),
            sample_t=sample_t,
            sample_x=np.empty(0),
            scenario_hash=scenario_hash,
            seed=seed,
            complete=complete,
        )
        object.__setattr__(trajectory, "sample_x", np.atleast_1d(trajectory.value_at(sample_t)))
        return trajectory


class Simulator:
    """Генератор траекторий для фиксированного сценария."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.rate = total_rate(scenario.measure, scenario.trunc)
        self.scenario_hash = scenario.scenario_hash()

    def run(self, seed: Optional[int] = None) -> Trajectory:
        """
        Строит траекторию на [0, horizon].

        Raises:
            BudgetExceeded: Число событий превысило event_cap
            EnvelopeViolation: Зафиксирован скачок вне области g > 0
        """
        sc = self.scenario
        rng = np.random.default_rng(seed)
        builder = _PathBuilder(sc.x0)
        knots = sc.speed.knot_times(sc.horizon)
        record_rejected = sc.speed.has_noise

        mean_wait = 1.0 / self.rate if self.rate > 0.0 else math.inf
        next_proposal = rng.exponential(mean_wait) if self.rate > 0.0 else math.inf
        t, x = 0.0, sc.x0
        k, n_events = 0, 0

        while True:
            next_knot = knots[k] if k < len(knots) else sc.horizon
            if next_proposal < next_knot:
                x_minus = x - sc.speed.displacement(t, next_proposal, rng)
                t = next_proposal
                alpha = sample_effect(sc.measure, sc.trunc, rng)
                mark = rng.random()
                g = sc.model.probability(x_minus, alpha)
                fixed = g > 0.0 and mark <= g

                if fixed:
                    if not (x_minus * alpha < 0.0 and abs(alpha) <= 2.0 * abs(x_minus)):
                        raise EnvelopeViolation(f"Скачок alpha={alpha} из x={x_minus} вне области фиксации")
                    x = x_minus + alpha
                else:
                    x = x_minus

                builder.event(t, alpha, x_minus, fixed)
                if fixed or record_rejected:
                    builder.knot(t, x_minus, alpha if fixed else 0.0)

                n_events += 1
                if n_events > sc.event_cap:
                    if not (fixed or record_rejected):
                        builder.knot(t, x_minus)
                    partial = builder.build(sc.horizon, sc.output_grid_step, self.scenario_hash, seed, complete=False)
                    logger.warning(f"Лимит событий {sc.event_cap} превышен на t={t:.6g} (seed={seed})")
                    raise BudgetExceeded(
                        f"Превышен лимит событий {sc.event_cap} на t={t:.6g}", trajectory=partial
                    )

                next_proposal = t + rng.exponential(mean_wait)
            else:
                x = x - sc.speed.displacement(t, next_knot, rng)
                t = next_knot
                builder.knot(t, x)
                if k >= len(knots):
                    break
                k += 1

        trajectory = builder.build(sc.horizon, sc.output_grid_step, self.scenario_hash, seed)
        logger.debug(
            f"Траектория seed={seed}: {trajectory.n_events} событий, {trajectory.n_fixed} фиксаций, X_T={x:.6g}"
        )
        return trajectory


def simulate(sc: Scenario, seed: Optional[int] = None) -> Trajectory:
    """Точная траектория сценария; детерминирована при заданном seed."""
    return Simulator(sc).run(seed)


# --- потраекторные диагностики ---


@dataclass(frozen=True, eq=False)
class MartingaleSeries:
    """M_t на выходной сетке."""

    times: np.ndarray
    values: np.ndarray

    def __iter__(self) -> Iterator[Tuple[float, float]]:
        return iter(zip(self.times.tolist(), self.values.tolist()))

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def terminal(self) -> float:
        return float(self.values[-1])

    @property
    def terminal_time(self) -> float:
        return float(self.times[-1])


def _effect_domains(measure: MutationMeasure, eps: float) -> List[Tuple[float, float]]:
    if eps <= 0.0:
        return [(-math.inf, math.inf)]
    domains = [(eps, math.inf)]
    if measure.two_sided:
        domains.append((-math.inf, -eps))
    return domains


def _compensator(sc: Scenario, x_start: np.ndarray, x_end: np.ndarray, dt: np.ndarray, chunk: int) -> np.ndarray:
    """dt * int_{|alpha|>=eps} alpha * mean_segment g(X, alpha) nu(d alpha) для каждого участка."""
    out = np.zeros(x_start.size)
    model = sc.model
    for start in range(0, x_start.size, chunk):
        block = slice(start, start + chunk)
        xs, xe, width = x_start[block], x_end[block], dt[block]

        def integrand(alpha: float) -> np.ndarray:
            return alpha * width * model.segment_average(xs, xe, alpha)

        for domain in _effect_domains(sc.measure, sc.trunc.epsilon):
            value = integrate_against(sc.measure, integrand, domain)
            out[block] += np.broadcast_to(np.asarray(value, dtype=float), xs.shape)
    return out


def martingale_residual(traj: Trajectory, sc: Scenario, chunk: int = 2048) -> MartingaleSeries:
    """
    M_t = sum_{s<=t} Delta X_s - int_0^t m_eps(X_s) ds на выходной сетке.

    Для детерминированной скорости сумма скачков равна X_t - X_0 + v(t).
    Интеграл по времени берется по линейным участкам пути, разрезанным в
    узлах сетки; среднее g вдоль участка вычисляется в замкнутой форме.
    """
    cuts = np.union1d(traj.knot_t, traj.sample_t)
    x_start = np.atleast_1d(traj.value_at(cuts[:-1]))
    x_end = np.atleast_1d(traj.value_before(cuts[1:]))
    dt = np.diff(cuts)

    pieces = _compensator(sc, x_start, x_end, dt, chunk) if cuts.size > 1 else np.empty(0)
    compensator = np.concatenate([[0.0], np.cumsum(pieces)])
    at_samples = compensator[np.searchsorted(cuts, traj.sample_t)]

    jump_t, jump_alpha, _ = traj.fixed_jumps()
    jump_sum = np.concatenate([[0.0], np.cumsum(jump_alpha)])
    jumps_at_samples = jump_sum[np.searchsorted(jump_t, traj.sample_t, side="right")]

    return MartingaleSeries(times=traj.sample_t.copy(), values=jumps_at_samples - at_samples)


def quadratic_variation_check(traj: Trajectory) -> float:
    """
    max по сетке |X_t^2 - (X_0^2 + 2 int X_{s-} dX_s + sum (Delta X_s)^2)|.

    Непрерывная часть интеграла Стилтьеса берется аналитически по участкам,
    скачковая: как 2 X_{s-} Delta X_s.
    """
    jump = traj.knot_x_plus - traj.knot_x_minus
    continuous = np.concatenate([[0.0], traj.knot_x_minus[1:] ** 2 - traj.knot_x_plus[:-1] ** 2])
    jumps = 2.0 * traj.knot_x_minus * jump + jump**2
    rhs_at_knots = traj.x0**2 + np.cumsum(continuous + jumps)

    i = np.clip(np.searchsorted(traj.knot_t, traj.sample_t, side="right") - 1, 0, len(traj.knot_t) - 1)
    x = traj.sample_x
    rhs = rhs_at_knots[i] + (x**2 - traj.knot_x_plus[i] ** 2)
    if x.size == 0:
        return 0.0
    return float(np.max(np.abs(x**2 - rhs)))


class LyapunovFunction:
    """Функция Phi класса C^2 с монотонной Phi''."""

    name: str = ""
    #: True, если Phi'' возрастает; False, если убывает
    second_derivative_increasing: bool = False
    #: Требование X < 0 на окне проверки
    requires_negative: bool = False

    def value(self, x: Any) -> Any:
        raise NotImplementedError

    def first(self, x: Any) -> Any:
        raise NotImplementedError

    def second(self, x: Any) -> Any:
        raise NotImplementedError


class LogAbs(LyapunovFunction):
    """Phi(x) = log|x| на x < 0; Phi'' = -1/x^2 убывает."""

    name = "log_abs"
    requires_negative = True

    def value(self, x: Any) -> Any:
        return np.log(np.abs(x))

    def first(self, x: Any) -> Any:
        return 1.0 / np.asarray(x, dtype=float)

    def second(self, x: Any) -> Any:
        return -1.0 / np.square(x)


class PowerLyapunov(LyapunovFunction):
    """
    f(x) = |x|^(-p) при x <= -1, f(x) = 1 + p(x+1) + p(p+1)(x+1)^2/2 при x > -1.

    f(-1) = 1, f'(-1) = p, f'' = p(p+1)|x|^(-p-2) слева и p(p+1) справа, т.е. возрастает.
    """

    name = "power_lyapunov"
    second_derivative_increasing = True

    def __init__(self, p: float):
        if not 0.0 < p < 1.0:
            raise ValueError("p должен лежать в (0, 1)")
        self.p = float(p)
        self.name = f"power_lyapunov(p={self.p})"

    def value(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        p, y = self.p, x + 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            left = np.abs(x) ** (-p)
        return np.where(x <= -1.0, left, 1.0 + p * y + 0.5 * p * (p + 1.0) * y * y)

    def first(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        p, y = self.p, x + 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            left = p * np.abs(x) ** (-p - 1.0)
        return np.where(x <= -1.0, left, p + p * (p + 1.0) * y)

    def second(self, x: Any) -> Any:
        x = np.asarray(x, dtype=float)
        p = self.p
        with np.errstate(divide="ignore", invalid="ignore"):
            left = p * (p + 1.0) * np.abs(x) ** (-p - 2.0)
        return np.where(x <= -1.0, left, p * (p + 1.0))


@dataclass(frozen=True)
class ItoCheck:
    """
    Результат проверки неравенства для Phi(X_t) - Phi(X_0) - int Phi'(X_{s-}) dX_s.

    lower/upper: оценки (1/2) sum Phi''(.) (Delta X)^2 в точках X_{s-} и X_s,
    упорядоченные согласно монотонности Phi''.
    """

    phi: str
    until: float
    lhs: float
    lower: float
    upper: float
    holds: bool
    n_jumps: int


def ito_inequality_check(traj: Trajectory, phi: LyapunovFunction, until: Optional[float] = None) -> ItoCheck:
    """
    Проверяет потраекторное неравенство для скачков Delta X >= 0 на окне [0, until].

    При убывающей Phi'': LHS <= (1/2) sum Phi''(X_{s-}) (Delta X)^2.
    При возрастающей Phi'': LHS <= (1/2) sum Phi''(X_s) (Delta X)^2; нижняя оценка
    в обоих случаях берется в противоположной точке.

    Raises:
        WindowViolation: Путь выходит в X >= 0 (для log|x|) или содержит отрицательный скачок
    """
    until = traj.end_time if until is None else min(until, traj.end_time)
    count = int(np.searchsorted(traj.knot_t, until, side="right"))
    knot_t = traj.knot_t[:count]
    x_minus = traj.knot_x_minus[:count]
    x_plus = traj.knot_x_plus[:count]
    x_until = traj.value_at(until)

    if phi.requires_negative and (np.max(x_minus) >= 0.0 or np.max(x_plus) >= 0.0 or x_until >= 0.0):
        raise WindowViolation(f"Траектория достигает X >= 0 до t={until:.6g}")

    jump = x_plus - x_minus
    if np.any(jump < 0.0):
        raise WindowViolation(f"Отрицательный скачок на окне [0, {until:.6g}]")

    # int Phi'(X_{s-}) dX_s: непрерывная часть по правилу цепочки, скачки: Phi'(X_{s-}) Delta X
    seg_start = x_plus
    seg_end = np.append(x_minus[1:], x_until)
    continuous = float(np.sum(phi.value(seg_end) - phi.value(seg_start)))
    jumping = float(np.sum(phi.first(x_minus) * jump))
    lhs = float(phi.value(x_until) - phi.value(traj.x0)) - continuous - jumping

    at_before = 0.5 * float(np.sum(phi.second(x_minus) * jump**2))
    at_after = 0.5 * float(np.sum(phi.second(x_plus) * jump**2))
    lower, upper = (at_before, at_after) if phi.second_derivative_increasing else (at_after, at_before)

    scale = 1e-9 * max(1.0, abs(lower), abs(upper), float(np.sum(np.abs(phi.value(seg_end)))))
    holds = lower - scale <= lhs <= upper + scale
    return ItoCheck(
        phi=phi.name,
        until=float(until),
        lhs=lhs,
        lower=lower,
        upper=upper,
        holds=bool(holds),
        n_jumps=int(np.count_nonzero(jump)),
    )
