"""
Классификация режима (транзиентный / положительно возвратный / граница m = vbar)
и ансамблевые оценки: скорость ухода, времена возврата, доли времени.

Асимптотические условия проверяются по тренду на геометрической сетке
x = -2^k; при немонотонном тренде ответ: inconclusive.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import stats

from .exceptions import NoCrossings
from .fixation import TAIL_EPSABS, TAIL_EPSREL, MomentFunctionals
from .measures import PowerLawTail
from .simulator import Trajectory
from .speed import SpeedModel
from .utils import json_float, json_safe

DEFAULT_GRID = tuple(-(2.0**k) for k in range(3, 25))
TAIL_POINTS = 5
TREND_RTOL = 1e-7
BOUNDARY_TOL = 1e-9
P_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
DECAY_SLOPE = -0.05


class Verdict(str, Enum):
    TRANSIENT = "Transient"
    POSITIVE_RECURRENT = "PositiveRecurrent"
    BOUNDARY_NULL_RECURRENT = "BoundaryNullRecurrent"
    BOUNDARY_TRANSIENT_ZERO_SPEED = "BoundaryTransientZeroSpeed"
    BOUNDARY_UNDETERMINED = "BoundaryUndetermined"
    BOUNDARY_RECURRENT = "BoundaryRecurrent"


class ConditionId(str, Enum):
    COND1 = "cond1"
    COND2 = "cond2"
    PROP6 = "prop6"
    LEM_TO0 = "lem_to0"
    ASSUMPTION_A = "assumptionA"
    ASSUMPTION_B = "assumptionB"
    CONDSUP = "condsup"


class Satisfied(str, Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"


@dataclass
class ConditionVerdict:
    """Оценка асимптотического условия на сетке."""

    id: ConditionId
    grid: List[float]
    values: List[float]
    limit_estimate: float
    trend: str
    satisfied: Satisfied
    margin: float
    details: Dict[str, Any] = field(default_factory=dict)
    parts: List["ConditionVerdict"] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return json_safe(
            {
                "id": self.id,
                "grid": self.grid,
                "values": self.values,
                "limit_estimate": self.limit_estimate,
                "trend": self.trend,
                "satisfied": self.satisfied,
                "margin": self.margin,
                "details": self.details,
                "parts": [part.to_dict() for part in self.parts],
            }
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ConditionVerdict":
        return cls(
            id=ConditionId(data["id"]),
            grid=[json_float(x) for x in data["grid"]],
            values=[json_float(v) for v in data["values"]],
            limit_estimate=json_float(data["limit_estimate"]),
            trend=data["trend"],
            satisfied=Satisfied(data["satisfied"]),
            margin=json_float(data["margin"]),
            details=data.get("details", {}),
            parts=[cls.from_dict(part) for part in data.get("parts", [])],
        )


@dataclass
class RegimeReport:
    """Итог классификации."""

    m: float
    V: float
    vbar: float
    verdict: Verdict
    speed: Optional[float] = None
    condition_evidence: List[ConditionVerdict] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    tolerance: float = BOUNDARY_TOL

    @property
    def decided(self) -> bool:
        return self.verdict != Verdict.BOUNDARY_UNDETERMINED

    def to_dict(self) -> Dict[str, Any]:
        return json_safe(
            {
                "m": self.m,
                "V": self.V,
                "vbar": self.vbar,
                "verdict": self.verdict,
                "speed": self.speed,
                "tolerance": self.tolerance,
                "condition_evidence": [c.to_dict() for c in self.condition_evidence],
                "notes": self.notes,
            }
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RegimeReport":
        speed = data.get("speed")
        return cls(
            m=json_float(data["m"]),
            V=json_float(data["V"]),
            vbar=json_float(data["vbar"]),
            verdict=Verdict(data["verdict"]),
            speed=None if speed is None else json_float(speed),
            condition_evidence=[ConditionVerdict.from_dict(c) for c in data.get("condition_evidence", [])],
            notes=list(data.get("notes", [])),
            tolerance=json_float(data.get("tolerance", BOUNDARY_TOL)),
        )


# --- тренды на сетке ---


def _trend(values: Sequence[float], tail: int = TAIL_POINTS) -> str:
    """increasing / decreasing / flat / mixed по последним `tail` точкам."""
    v = np.asarray(values[-tail:], dtype=float)
    if v.size < 2 or not np.all(np.isfinite(v)):
        return "mixed"
    tol = TREND_RTOL * max(float(np.max(np.abs(v))), 1e-300)
    diffs = np.diff(v)
    ups, downs = bool(np.any(diffs > tol)), bool(np.any(diffs < -tol))
    if ups and downs:
        return "mixed"
    if ups:
        return "increasing"
    if downs:
        return "decreasing"
    return "flat"


def _extrapolate(values: Sequence[float]) -> float:
    """Предел по геометрическому хвосту последних трех значений."""
    if len(values) == 0:
        return math.nan
    if len(values) < 3 or not all(math.isfinite(v) for v in values[-3:]):
        return float(values[-1])
    a, b, c = values[-3:]
    d1, d2 = b - a, c - b
    if d1 == 0.0 or d2 == 0.0:
        return float(c)
    ratio = d2 / d1
    if 0.0 < ratio < 1.0:
        return float(c + d2 * ratio / (1.0 - ratio))
    if ratio >= 1.0:
        return math.copysign(math.inf, d2)
    return float(c)


def _ratio_verdict(
    cid: ConditionId,
    grid: Sequence[float],
    numer: np.ndarray,
    denom: np.ndarray,
    below: bool,
    details: Optional[Dict[str, Any]] = None,
) -> ConditionVerdict:
    """
    Условие вида numer < denom (below) или numer > denom в пределе x -> -inf.

    Значения: отношение numer/denom; тренд: по зазору между ними, который
    должен не сужаться.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0.0, numer / denom, np.where(numer > 0.0, math.inf, 0.0))
    gap = denom - numer if below else numer - denom
    trend = _trend(gap.tolist()) if np.all(np.isfinite(gap[-TAIL_POINTS:])) else "mixed"
    tail = ratio[-TAIL_POINTS:]

    if trend == "mixed":
        satisfied = Satisfied.INCONCLUSIVE
    elif below and np.all(tail < 1.0) and trend in ("increasing", "flat"):
        satisfied = Satisfied.YES
    elif not below and np.all(tail > 1.0) and trend in ("increasing", "flat"):
        satisfied = Satisfied.YES
    elif (below and np.all(tail > 1.0)) or (not below and np.all(tail < 1.0)):
        satisfied = Satisfied.NO
    else:
        satisfied = Satisfied.INCONCLUSIVE

    limit = _extrapolate(ratio.tolist())
    margin = (1.0 - limit) if below else (limit - 1.0)
    return ConditionVerdict(
        id=cid,
        grid=list(grid),
        values=ratio.tolist(),
        limit_estimate=limit,
        trend=trend,
        satisfied=satisfied,
        margin=margin,
        details=details or {},
    )


def _grid(grid: Optional[Sequence[float]]) -> List[float]:
    points = list(DEFAULT_GRID if grid is None else grid)
    if any(x >= 0.0 for x in points) or any(b >= a for a, b in zip(points, points[1:])):
        raise ValueError("Сетка должна состоять из отрицательных и строго убывающих x")
    return points


def _evaluate(func: Callable[[float], float], grid: Sequence[float]) -> np.ndarray:
    return np.array([func(x) for x in grid], dtype=float)


# --- условия на границе m = v ---


def check_cond1(funcs: MomentFunctionals, v: float, grid: Optional[Sequence[float]] = None) -> ConditionVerdict:
    """
    limsup |x psi(x)| < V/2 в форме |x psi(x)| < V(x)/2 с неубывающим зазором.

    Форма с V(x) охватывает и случай V = inf (хвосты alpha^(-2-delta), 1/2 < delta <= 1).
    """
    grid = _grid(grid)
    abs_x_psi = _evaluate(lambda x: abs(x * funcs.psi(v, x)), grid)
    half_V = _evaluate(lambda x: 0.5 * funcs.V_of_x(x), grid)
    verdict = _ratio_verdict(
        ConditionId.COND1,
        grid,
        abs_x_psi,
        half_V,
        below=True,
        details={"abs_x_psi": abs_x_psi.tolist(), "half_V_of_x": half_V.tolist(), "V": funcs.V_limit},
    )
    logger.debug(f"cond1: satisfied={verdict.satisfied.value}, предел отношения {verdict.limit_estimate:.6g}")
    return verdict


def prop6_quantity(funcs: MomentFunctionals, x: float, beta: float, p: float) -> float:
    """|x|^(p+2) int_{beta|x|}^inf alpha^2 g(x, alpha) nu(d alpha)."""
    integral = funcs.moment(x, 2, lower=beta * abs(x), epsabs=TAIL_EPSABS, epsrel=TAIL_EPSREL)
    return abs(x) ** (p + 2.0) * integral


def _decay_verdict(grid: Sequence[float], values: np.ndarray, details: Dict[str, Any]) -> ConditionVerdict:
    tail = values[-TAIL_POINTS:]
    xs = np.abs(np.asarray(grid[-TAIL_POINTS:], dtype=float))
    trend = _trend(values.tolist())
    slope = math.nan

    if np.all(tail == 0.0):
        satisfied = Satisfied.YES
    elif np.all(tail >= 0.0) and tail[-1] == 0.0 and trend in ("decreasing", "flat"):
        # значения ушли в машинный ноль
        satisfied = Satisfied.YES
    elif np.all(tail > 0.0) and np.all(np.isfinite(tail)):
        slope = float(np.polyfit(np.log(xs), np.log(tail), 1)[0])
        if trend == "mixed":
            satisfied = Satisfied.INCONCLUSIVE
        elif slope < DECAY_SLOPE and trend == "decreasing":
            satisfied = Satisfied.YES
        elif slope >= 0.0:
            satisfied = Satisfied.NO
        else:
            satisfied = Satisfied.INCONCLUSIVE
    else:
        satisfied = Satisfied.INCONCLUSIVE

    return ConditionVerdict(
        id=ConditionId.PROP6,
        grid=list(grid),
        values=values.tolist(),
        limit_estimate=0.0 if satisfied == Satisfied.YES else _extrapolate(values.tolist()),
        trend=trend,
        satisfied=satisfied,
        margin=-slope if math.isfinite(slope) else math.nan,
        details={**details, "loglog_slope": slope},
    )


def _condsup_verdict(
    grid: Sequence[float], x_psi: np.ndarray, V_of_x: np.ndarray, p: float
) -> ConditionVerdict:
    """sup_{x <= -K} (|x| psi(x) + (2p+1) V(x)/2) < 0."""
    values = x_psi + (2.0 * p + 1.0) * 0.5 * V_of_x
    tail = values[-TAIL_POINTS:]
    trend = _trend(values.tolist())
    if trend == "mixed":
        satisfied = Satisfied.INCONCLUSIVE
    elif np.all(tail < 0.0) and trend in ("decreasing", "flat"):
        satisfied = Satisfied.YES
    elif np.all(tail > 0.0):
        satisfied = Satisfied.NO
    else:
        satisfied = Satisfied.INCONCLUSIVE
    return ConditionVerdict(
        id=ConditionId.CONDSUP,
        grid=list(grid),
        values=values.tolist(),
        limit_estimate=_extrapolate(values.tolist()),
        trend=trend,
        satisfied=satisfied,
        margin=-float(np.max(tail)),
        details={"p": p},
    )


def check_cond2_prop6(
    funcs: MomentFunctionals,
    v: float,
    grid: Optional[Sequence[float]] = None,
    p0: float = 0.9,
    beta0: float = 0.5,
) -> ConditionVerdict:
    """
    liminf |x psi(x)| > V/2 вместе с убыванием prop6 при beta in {beta0/2, beta0/4}.

    Перебирает p из {0.1, ..., 0.9}, p <= p0, и берет наименьшее p, при котором
    выполнены и prop6, и условие sup(|x| psi + (2p+1) V(x)/2) < 0.
    Возвращает сводный вердикт (id = cond2); частные проверки: в `parts`.
    """
    if not (0.0 < p0 < 1.0 and 0.0 < beta0 < 1.0):
        raise ValueError("p0 и beta0 должны лежать в (0, 1)")
    grid = _grid(grid)
    V = funcs.V_limit

    psi_values = _evaluate(lambda x: funcs.psi(v, x), grid)
    xs = np.abs(np.asarray(grid))
    abs_x_psi = np.abs(xs * psi_values)
    V_of_x = _evaluate(funcs.V_of_x, grid)

    if math.isfinite(V):
        cond2 = _ratio_verdict(
            ConditionId.COND2,
            grid,
            abs_x_psi,
            np.full(len(grid), 0.5 * V),
            below=False,
            details={"abs_x_psi": abs_x_psi.tolist(), "V": V},
        )
    else:
        cond2 = ConditionVerdict(
            id=ConditionId.COND2,
            grid=list(grid),
            values=[0.0] * len(grid),
            limit_estimate=0.0,
            trend="flat",
            satisfied=Satisfied.NO,
            margin=-math.inf,
            details={"abs_x_psi": abs_x_psi.tolist(), "V": V, "reason": "V = inf"},
        )

    betas = (beta0 / 2.0, beta0 / 4.0)
    integrals = {
        beta: _evaluate(
            lambda x, b=beta: funcs.moment(x, 2, lower=b * abs(x), epsabs=TAIL_EPSABS, epsrel=TAIL_EPSREL), grid
        )
        for beta in betas
    }
    candidates = [p for p in P_GRID if p <= p0 + 1e-12] or [p0]

    chosen: Optional[float] = None
    parts: List[ConditionVerdict] = []
    for p in candidates:
        prop6_parts = [
            _decay_verdict(grid, xs ** (p + 2.0) * integrals[beta], {"beta": beta, "p": p}) for beta in betas
        ]
        current = [*prop6_parts, _condsup_verdict(grid, -abs_x_psi, V_of_x, p)]
        if not parts:
            parts = current
        if all(part.satisfied == Satisfied.YES for part in current):
            chosen, parts = p, current
            break

    if cond2.satisfied == Satisfied.YES and chosen is not None:
        satisfied = Satisfied.YES
    elif cond2.satisfied == Satisfied.NO or any(part.satisfied == Satisfied.NO for part in parts):
        satisfied = Satisfied.NO
    else:
        satisfied = Satisfied.INCONCLUSIVE

    logger.debug(f"cond2+prop6: cond2={cond2.satisfied.value}, p={chosen}, итог={satisfied.value}")
    return ConditionVerdict(
        id=ConditionId.COND2,
        grid=cond2.grid,
        values=cond2.values,
        limit_estimate=cond2.limit_estimate,
        trend=cond2.trend,
        satisfied=satisfied,
        margin=cond2.margin,
        details={**cond2.details, "cond2": cond2.satisfied.value, "p": chosen, "betas": list(betas)},
        parts=parts,
    )


def check_lem_to0(funcs: MomentFunctionals, grid: Optional[Sequence[float]] = None) -> ConditionVerdict:
    """V(x)/|x| убывает к 0 на сетке."""
    grid = _grid(grid)
    values = _evaluate(lambda x: funcs.V_of_x(x) / abs(x), grid)
    trend = _trend(values.tolist())
    if trend == "mixed":
        satisfied = Satisfied.INCONCLUSIVE
    elif trend in ("decreasing", "flat") and values[-1] <= 1e-2 * max(values[0], 1e-300):
        satisfied = Satisfied.YES
    elif trend == "increasing":
        satisfied = Satisfied.NO
    else:
        satisfied = Satisfied.INCONCLUSIVE
    return ConditionVerdict(
        id=ConditionId.LEM_TO0,
        grid=grid,
        values=values.tolist(),
        limit_estimate=_extrapolate(values.tolist()),
        trend=trend,
        satisfied=satisfied,
        margin=float(values[0] - values[-1]),
    )


def check_assumptions(
    funcs: MomentFunctionals, speed: SpeedModel, grid: Optional[Sequence[float]] = None
) -> List[ConditionVerdict]:
    """
    Предположения A и B для переменной скорости v1(t).

    A: liminf |x| psi_sup(x) > -V/2, psi_sup = m(x) - v_sup.
    B: limsup |x| psi_inf(x) < -V/2, psi_inf = m(x) - v_inf.
    """
    grid = _grid(grid)
    xs = np.abs(np.asarray(grid))
    deficit = _evaluate(funcs.deficit, grid)
    m = funcs.m_limit
    half_V_of_x = 0.5 * _evaluate(funcs.V_of_x, grid)

    verdicts = []
    if math.isfinite(speed.v_sup):
        lag_sup = xs * ((speed.v_sup - m) + deficit)
        verdicts.append(
            _ratio_verdict(
                ConditionId.ASSUMPTION_A,
                grid,
                lag_sup,
                half_V_of_x,
                below=True,
                details={"v_sup": speed.v_sup, "x_psi_sup": (-lag_sup).tolist()},
            )
        )
    else:
        verdicts.append(_failed(ConditionId.ASSUMPTION_A, grid, "v_sup = inf"))

    V = funcs.V_limit
    if math.isfinite(speed.v_inf) and math.isfinite(V):
        lag_inf = xs * ((speed.v_inf - m) + deficit)
        verdicts.append(
            _ratio_verdict(
                ConditionId.ASSUMPTION_B,
                grid,
                lag_inf,
                np.full(len(grid), 0.5 * V),
                below=False,
                details={"v_inf": speed.v_inf, "x_psi_inf": (-lag_inf).tolist()},
            )
        )
    else:
        verdicts.append(_failed(ConditionId.ASSUMPTION_B, grid, "v_inf = inf или V = inf"))
    return verdicts


def _failed(cid: ConditionId, grid: Sequence[float], reason: str) -> ConditionVerdict:
    return ConditionVerdict(
        id=cid,
        grid=list(grid),
        values=[math.nan] * len(grid),
        limit_estimate=math.nan,
        trend="mixed",
        satisfied=Satisfied.NO,
        margin=math.nan,
        details={"reason": reason},
    )


def classify(
    funcs: MomentFunctionals,
    speed: SpeedModel,
    tol: float = BOUNDARY_TOL,
    grid: Optional[Sequence[float]] = None,
    p0: float = 0.9,
    beta0: float = 0.5,
) -> RegimeReport:
    """
    Вердикт по m, V и vbar.

    m < vbar: Transient со скоростью vbar - m; m > vbar: PositiveRecurrent;
    |m - vbar| <= tol * max(m, vbar): проверка условий на границе.
    """
    m, V = funcs.limits()
    vbar = speed.mean_rate
    report = RegimeReport(m=m, V=V, vbar=vbar, verdict=Verdict.BOUNDARY_UNDETERMINED, tolerance=tol)

    if math.isinf(m):
        report.verdict = Verdict.POSITIVE_RECURRENT
        report.notes.append("m = inf: условие положительной возвратности выполнено при любой конечной vbar")
        return report

    if abs(m - vbar) > tol * max(m, vbar):
        if m < vbar:
            report.verdict = Verdict.TRANSIENT
            report.speed = vbar - m
        else:
            report.verdict = Verdict.POSITIVE_RECURRENT
        logger.info(f"Вердикт {report.verdict.value}: m={m:.6g}, vbar={vbar:.6g}")
        return report

    if speed.has_noise:
        report.notes.append("На границе m = vbar шум R_t не поддерживается: режим не определен")
        return report

    if not speed.is_constant:
        assumptions = check_assumptions(funcs, speed, grid)
        report.condition_evidence.extend(assumptions)
        if assumptions[0].satisfied == Satisfied.YES:
            report.verdict = Verdict.BOUNDARY_RECURRENT
            report.notes.append("Предположения A выполнены: процесс возвратен; нулевая возвратность не установлена")
        else:
            report.notes.append("Предположения A не подтверждены на сетке: режим не определен")
        return report

    cond1 = check_cond1(funcs, m, grid)
    report.condition_evidence.append(cond1)
    if cond1.satisfied == Satisfied.YES:
        report.verdict = Verdict.BOUNDARY_NULL_RECURRENT
        report.condition_evidence.append(check_lem_to0(funcs, grid))
        return report

    cond2 = check_cond2_prop6(funcs, m, grid, p0=p0, beta0=beta0)
    report.condition_evidence.append(cond2)
    report.condition_evidence.extend(cond2.parts)
    if cond2.satisfied == Satisfied.YES:
        report.verdict = Verdict.BOUNDARY_TRANSIENT_ZERO_SPEED
        report.speed = 0.0
        return report

    if isinstance(funcs.measure, PowerLawTail) and 0.0 < funcs.measure.delta <= 0.5:
        report.notes.append(
            "Хвост alpha^(-2-delta) с 0 < delta <= 1/2: поведение на границе m = v не установлено"
        )
    report.notes.append("Ни cond1, ни cond2 + prop6 не подтверждены на сетке")
    logger.info(f"Вердикт {report.verdict.value}: m = vbar = {m:.6g}")
    return report


# --- ансамблевые оценки ---


@dataclass
class SpeedEstimate:
    """Средний наклон (X_T - X_0)/T по ансамблю и нормальный доверительный интервал."""

    mean: float
    std: float
    ci_low: float
    ci_high: float
    confidence: float
    n_paths: int
    slopes: List[float] = field(default_factory=list)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)


def _mean(values: Sequence[float]) -> float:
    # math.fsum не зависит от порядка слагаемых
    return math.fsum(values) / len(values)


def estimate_speed(ensemble: Sequence[Trajectory], confidence: float = 0.95) -> SpeedEstimate:
    """Наклон траекторий ансамбля с общим горизонтом."""
    if len(ensemble) < 2:
        raise ValueError("Нужно не менее двух траекторий")
    horizons = {traj.end_time for traj in ensemble}
    if len(horizons) != 1:
        raise ValueError(f"Траектории имеют разные горизонты: {sorted(horizons)}")
    horizon = horizons.pop()

    slopes = [(traj.final_value - traj.x0) / horizon for traj in ensemble]
    mean = _mean(slopes)
    var = math.fsum((s - mean) ** 2 for s in slopes) / (len(slopes) - 1)
    std = math.sqrt(max(var, 0.0))
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    half = z * std / math.sqrt(len(slopes))
    return SpeedEstimate(
        mean=mean,
        std=std,
        ci_low=mean - half,
        ci_high=mean + half,
        confidence=confidence,
        n_paths=len(slopes),
        slopes=sorted(slopes),
    )


def below_intervals(traj: Trajectory, level: float) -> List[Tuple[float, Optional[float]]]:
    """
    Интервалы [start, end), на которых X_t < level; end = None, если интервал
    не закрылся к концу траектории.
    """
    intervals: List[Tuple[float, Optional[float]]] = []
    below = traj.x0 < level
    start: Optional[float] = 0.0 if below else None

    t, x_minus, x_plus = traj.knot_t, traj.knot_x_minus, traj.knot_x_plus
    for i in range(1, len(t)):
        xs, xe = x_plus[i - 1], x_minus[i]
        if below and xe >= level:
            crossing = t[i - 1] + (level - xs) / (xe - xs) * (t[i] - t[i - 1])
            intervals.append((start, float(crossing)))
            below, start = False, None
        elif not below and xe < level:
            crossing = t[i - 1] + (xs - level) / (xs - xe) * (t[i] - t[i - 1])
            below, start = True, float(crossing)

        if below and x_plus[i] >= level:
            intervals.append((start, float(t[i])))
            below, start = False, None
        elif not below and x_plus[i] < level:
            below, start = True, float(t[i])

    if below:
        intervals.append((start, None))
    return intervals


@dataclass
class ReturnTimeStats:
    """Длительности экскурсий ниже уровня по ансамблю."""

    level: float
    n_paths: int
    completed: int
    censored: int
    mean: float
    median: float
    durations: List[float] = field(default_factory=list)
    censored_durations: List[float] = field(default_factory=list)
    initial_sojourns: List[Optional[float]] = field(default_factory=list)
    first_downcrossings: List[Optional[float]] = field(default_factory=list)
    returns_per_path: float = 0.0
    no_crossings: bool = False

    def survival(self) -> Tuple[List[float], List[float]]:
        """Эмпирическая функция выживания завершенных экскурсий (для графика хвоста)."""
        xs = sorted(self.durations)
        n = len(xs)
        return xs, [1.0 - i / n for i in range(n)]


def return_time_stats(ensemble: Sequence[Trajectory], level: float = 0.0, strict: bool = False) -> ReturnTimeStats:
    """
    Экскурсии ниже `level`: от пересечения вниз до возврата в [level, inf).

    Начальное пребывание (X_0 < level) учитывается отдельно; незавершенные
    экскурсии помечаются как цензурированные.

    Raises:
        NoCrossings: Если strict и ни одна траектория не пересекла уровень
    """
    durations: List[float] = []
    censored: List[float] = []
    initial: List[Optional[float]] = []
    downcrossings: List[Optional[float]] = []
    returns = 0

    for traj in ensemble:
        intervals = below_intervals(traj, level)
        sojourn: Optional[float] = None
        first_down: Optional[float] = None
        for start, end in intervals:
            if end is not None:
                returns += 1
            if start == 0.0 and traj.x0 < level:
                sojourn = end
                continue
            if first_down is None:
                first_down = start
            if end is None:
                censored.append(traj.end_time - start)
            else:
                durations.append(end - start)
        initial.append(sojourn)
        downcrossings.append(first_down)

    no_crossings = not durations and all(d is None for d in downcrossings) and all(s is None for s in initial)
    if no_crossings:
        logger.warning(f"Ни одна траектория не пересекла уровень {level}")
        if strict:
            raise NoCrossings(f"Нет пересечений уровня {level}")

    durations.sort()
    return ReturnTimeStats(
        level=level,
        n_paths=len(ensemble),
        completed=len(durations),
        censored=len(censored),
        mean=_mean(durations) if durations else math.nan,
        median=float(np.median(durations)) if durations else math.nan,
        durations=durations,
        censored_durations=sorted(censored),
        initial_sojourns=initial,
        first_downcrossings=downcrossings,
        returns_per_path=returns / len(ensemble) if ensemble else 0.0,
        no_crossings=no_crossings,
    )


@dataclass
class FirstPassageStats:
    """Первые моменты достижения уровня."""

    level: float
    direction: str
    times: List[Optional[float]]
    reached: int
    mean: float
    median: float
    maximum: float


def first_passage_stats(ensemble: Sequence[Trajectory], level: float = 0.0, direction: str = "below") -> FirstPassageStats:
    """
    T = inf{t : X_t < level} (direction="below") или inf{t : X_t >= level} ("above").

    При x0 > 0 и постоянной скорости v > 0 выполняется T_0 <= x0 / v.
    """
    if direction not in ("below", "above"):
        raise ValueError("direction должен быть 'below' или 'above'")
    if direction == "below":
        times = [traj.first_time_below(level) for traj in ensemble]
    else:
        times = [traj.first_time_at_or_above(level) for traj in ensemble]
    reached = [t for t in times if t is not None]
    return FirstPassageStats(
        level=level,
        direction=direction,
        times=times,
        reached=len(reached),
        mean=_mean(reached) if reached else math.nan,
        median=float(np.median(reached)) if reached else math.nan,
        maximum=max(reached) if reached else math.nan,
    )


def occupation_fraction(traj: Trajectory, interval: Tuple[float, float]) -> float:
    """Доля времени [0, T], проведенного траекторией в (lo, hi), точно по участкам."""
    lo, hi = interval
    if hi <= lo:
        raise ValueError(f"Пустой интервал: {interval}")
    t_start, t_end, x_start, x_end = traj.segments()
    dt = t_end - t_start
    total = float(np.sum(dt))
    if total <= 0.0:
        return 1.0 if lo < traj.x0 < hi else 0.0

    low = np.minimum(x_start, x_end)
    high = np.maximum(x_start, x_end)
    width = high - low
    overlap = np.maximum(np.minimum(high, hi) - np.maximum(low, lo), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        sloped = np.where(width > 0.0, overlap / np.where(width > 0.0, width, 1.0), 0.0)
    flat = ((low > lo) & (low < hi)).astype(float)
    fraction = np.where(width > 0.0, sloped, flat)
    return float(np.clip(np.sum(fraction * dt) / total, 0.0, 1.0))
