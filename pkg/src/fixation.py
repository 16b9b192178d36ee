"""
Вероятности фиксации g(x, alpha) и моментные функционалы m(x), V(x), psi(x).

Все модели имеют вид g(x, alpha) = ramp(u, |alpha|) при x*alpha < 0 и
u = |x| - |alpha|/2 >= 0, иначе 0 (условие 1: g <= 1_{x alpha<0} 1_{|alpha|<=2|x|}).
Коэффициент отбора s = sigma*|alpha|*(2|x|-|alpha|) = 2*sigma*|alpha|*u.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Any, ClassVar, Dict, Iterable, Optional, Tuple

import numpy as np
from loguru import logger

from .measures import QUAD_EPSABS, QUAD_EPSREL, MutationMeasure, integrate_against


#: Допуски для величин, стремящихся к нулю на сетке |x| -> inf
TAIL_EPSABS = 1e-300
TAIL_EPSREL = 1e-10


def selection_coefficient(x: Any, alpha: Any, sigma: float) -> Any:
    """
    s(x, alpha) = sigma * [|alpha| (2|x| - |alpha|)]^+ * 1_{x alpha < 0}.

    Знак выбран так, что s >= 0 для полезных мутаций (см. DESIGN.md).
    """
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    a = np.abs(alpha)
    s = sigma * np.maximum(a * (2.0 * np.abs(x) - a), 0.0) * (x * alpha < 0.0)
    return float(s) if s.ndim == 0 else s


class FixationModel(ABC):
    """Базовый класс модели вероятности фиксации."""

    kind: ClassVar[str]

    def __init__(self, sigma: float = 1.0):
        if not sigma > 0.0:
            raise ValueError(f"sigma должна быть > 0 (получено {sigma})")
        self.sigma = float(sigma)

    @abstractmethod
    def ramp(self, u: Any, a: Any) -> Any:
        """Вероятность фиксации на расстоянии u >= 0 за порогом |x| = a/2."""

    @abstractmethod
    def ramp_integral(self, big_u: Any, a: Any) -> Any:
        """int_0^U ramp(u, a) du (векторизовано)."""

    def probability(self, x: Any, alpha: Any) -> Any:
        """g(x, alpha) в [0, 1]."""
        if np.isscalar(x) and np.isscalar(alpha):
            if x * alpha >= 0.0:
                return 0.0
            a = abs(alpha)
            u = abs(x) - 0.5 * a
            if u < 0.0:
                return 0.0
            return float(self.ramp(u, a))

        x, alpha = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(alpha, dtype=float))
        a = np.abs(alpha)
        u = np.abs(x) - 0.5 * a
        mask = (x * alpha < 0.0) & (u >= 0.0)
        out = np.zeros(x.shape)
        out[mask] = self.ramp(u[mask], a[mask])
        return out

    def cumulative(self, x: Any, alpha: Any) -> Any:
        """H(x, alpha) = int_0^x g(y, alpha) dy."""
        x = np.asarray(x, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        a = np.abs(alpha)
        sign = np.sign(alpha)
        big_u = np.maximum(-sign * x - 0.5 * a, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            value = -sign * self.ramp_integral(big_u, np.where(a > 0.0, a, 1.0))
        return np.where(a > 0.0, value, 0.0)

    def segment_average(self, x_a: Any, x_b: Any, alpha: Any) -> Any:
        """
        Среднее g(X, alpha) вдоль линейного отрезка X: x_a -> x_b.

        Для почти вырожденных отрезков используется значение в середине.
        """
        x_a, x_b, alpha = np.broadcast_arrays(
            np.asarray(x_a, dtype=float), np.asarray(x_b, dtype=float), np.asarray(alpha, dtype=float)
        )
        dx = x_b - x_a
        tiny = np.abs(dx) <= 1e-9 * np.maximum(1.0, np.maximum(np.abs(x_a), np.abs(x_b)))
        safe_dx = np.where(tiny, 1.0, dx)
        exact = (self.cumulative(x_b, alpha) - self.cumulative(x_a, alpha)) / safe_dx
        mid = self.probability(0.5 * (x_a + x_b), alpha)
        return np.clip(np.where(tiny, mid, exact), 0.0, 1.0)

    def selection(self, x: Any, alpha: Any) -> Any:
        return selection_coefficient(x, alpha, self.sigma)

    def describe(self) -> Dict[str, Any]:
        return {"kind": self.kind, "sigma": self.sigma}

    def __repr__(self) -> str:
        return f"<{type(self).__name__}(sigma={self.sigma})>"


class KimuraExp(FixationModel):
    """g = 1 - exp(-2 s(x, alpha)) при s > 0."""

    kind = "kimura_exp"

    def ramp(self, u: Any, a: Any) -> Any:
        return -np.expm1(-4.0 * self.sigma * a * u)

    def ramp_integral(self, big_u: Any, a: Any) -> Any:
        c = 4.0 * self.sigma * a
        return big_u + np.expm1(-c * big_u) / c


class HaldaneLinear(FixationModel):
    """g = min(2 s(x, alpha), 1)."""

    kind = "haldane_linear"

    def ramp(self, u: Any, a: Any) -> Any:
        return np.minimum(4.0 * self.sigma * a * u, 1.0)

    def ramp_integral(self, big_u: Any, a: Any) -> Any:
        c = 4.0 * self.sigma * a
        return np.where(big_u * c <= 1.0, 0.5 * c * big_u * big_u, big_u - 0.5 / c)


class StepLimit(FixationModel):
    """g = 1_{x alpha < 0} 1_{|alpha| <= 2|x|}: предел сильного отбора."""

    kind = "step_limit"

    def ramp(self, u: Any, a: Any) -> Any:
        return np.ones_like(np.asarray(u, dtype=float)) if np.ndim(u) else 1.0

    def ramp_integral(self, big_u: Any, a: Any) -> Any:
        return np.asarray(big_u, dtype=float) + 0.0 * np.asarray(a, dtype=float)


FIXATION_KINDS: Dict[str, type] = {cls.kind: cls for cls in (KimuraExp, HaldaneLinear, StepLimit)}


def fixation_prob(model: FixationModel, x: Any, alpha: Any) -> Any:
    """g(x, alpha) для заданной модели."""
    return model.probability(x, alpha)


@dataclass(frozen=True)
class MomentFunctionals:
    """m(x), V(x), psi(x) и их пределы m, V для пары (мера, модель)."""

    measure: MutationMeasure
    model: FixationModel

    @cached_property
    def m_limit(self) -> float:
        return self.measure.positive_moment(1.0)

    @cached_property
    def V_limit(self) -> float:
        return self.measure.positive_moment(2.0)

    def limits(self) -> Tuple[float, float]:
        """(m, V); бесконечность: допустимый результат."""
        return self.m_limit, self.V_limit

    def _breakpoints(self, x: float) -> Tuple[float, ...]:
        # переход g от 4 sigma |x| alpha к 1 и излом на alpha = 2|x|
        width = 1.0 / (4.0 * self.model.sigma * abs(x))
        points = (width, abs(x))
        return points if x < 0.0 else tuple(-p for p in points)

    def moment(
        self,
        x: float,
        k: int,
        lower: float = 0.0,
        epsabs: float = QUAD_EPSABS,
        epsrel: float = QUAD_EPSREL,
    ) -> float:
        """
        int_{|alpha| >= lower} alpha^k g(x, alpha) nu(d alpha) по компактному носителю g(x, .).

        Args:
            x: Отставание (конечное)
            k: Порядок (1 для m(x), 2 для V(x))
            lower: Нижняя отсечка по |alpha|
        """
        if not math.isfinite(x):
            raise ValueError("x должен быть конечным")
        if x == 0.0:
            return 0.0

        reach = 2.0 * abs(x)
        if lower > reach:
            return 0.0

        if isinstance(self.model, StepLimit) and x < 0.0:
            return self.measure.positive_moment(float(k), lower, reach)

        domain = (lower, reach) if x < 0.0 else (-reach, -lower)
        model = self.model
        return float(
            integrate_against(
                self.measure,
                lambda alpha: alpha**k * model.probability(x, alpha),
                domain,
                breakpoints=self._breakpoints(x),
                epsabs=epsabs,
                epsrel=epsrel,
            )
        )

    def m_of_x(self, x: float) -> float:
        if x < 0.0 and math.isfinite(self.m_limit):
            return self.m_limit - self.deficit(x)
        return self.moment(x, 1)

    def V_of_x(self, x: float) -> float:
        return self.moment(x, 2)

    def deficit(self, x: float) -> float:
        """
        m - m(x) = int_{alpha>0} alpha (1 - g(x, alpha)) nu(d alpha), x < 0.

        Хвост alpha > 2|x| берется в замкнутой форме, остальное: квадратурой.
        """
        if x >= 0.0:
            return self.m_limit - self.m_of_x(x)

        reach = 2.0 * abs(x)
        tail = self.measure.positive_moment(1.0, reach, math.inf)
        if isinstance(self.model, StepLimit):
            return tail

        model = self.model
        body = integrate_against(
            self.measure,
            lambda alpha: alpha * (1.0 - model.probability(x, alpha)),
            (0.0, reach),
            breakpoints=self._breakpoints(x),
            epsabs=TAIL_EPSABS,
            epsrel=TAIL_EPSREL,
        )
        return tail + float(body)

    def psi(self, v: float, x: float) -> float:
        """psi(x) = m(x) - v."""
        if v < 0.0:
            raise ValueError("v должна быть >= 0")
        if x < 0.0 and math.isfinite(self.m_limit):
            return (self.m_limit - v) - self.deficit(x)
        return self.m_of_x(x) - v

    def convergence_point(self, start: float = -1.0, tol: float = 1e-6, max_doublings: int = 60) -> Optional[float]:
        """
        Первая точка сетки x = start * 2^j, где |m(x) - m(2x)| <= tol * max(1, m(x)).

        Возвращает None, если сходимость не обнаружена.
        """
        x = start
        current = self.m_of_x(x)
        for _ in range(max_doublings):
            following = self.m_of_x(2.0 * x)
            if abs(current - following) <= tol * max(1.0, current):
                return x
            x, current = 2.0 * x, following
        return None


def m_of_x(funcs: MomentFunctionals, x: float) -> float:
    """Средняя скорость к оптимуму m(x) = int alpha g(x, alpha) nu(d alpha)."""
    return funcs.m_of_x(x)


def V_of_x(funcs: MomentFunctionals, x: float) -> float:
    """V(x) = int alpha^2 g(x, alpha) nu(d alpha)."""
    return funcs.V_of_x(x)


def psi(funcs: MomentFunctionals, v: float, x: float) -> float:
    """Чистый дрейф отставания psi(x) = m(x) - v."""
    return funcs.psi(v, x)


def limits(funcs: MomentFunctionals) -> Tuple[float, float]:
    """Пределы m и V при x -> -inf."""
    return funcs.limits()


@dataclass
class LipschitzReport:
    """Результат проверки интегрального условия Липшица."""

    max_ratio: float
    c_K: float
    passed: bool
    pairs_evaluated: int
    worst_pair: Optional[Tuple[float, float]] = None


def lipschitz_check(
    funcs: MomentFunctionals,
    K: Tuple[float, float],
    n_pairs: int,
    rng: np.random.Generator,
    pairs: Optional[Iterable[Tuple[float, float]]] = None,
    chunk: int = 256,
) -> LipschitzReport:
    """
    Ищет max int_K |alpha| |g(u, alpha) - g(w, alpha)| nu(d alpha) / |u - w|.

    Пары (u, w) берутся на [-R, R], R = max|K| / 2. Половина пар независимы,
    остальные близки (оценка локальной производной).
    Граница c_K = 4 sigma int_K alpha^2 nu(d alpha).
    """
    if not isinstance(funcs.model, KimuraExp):
        raise ValueError("lipschitz_check определена только для KimuraExp")

    lo, hi = K
    model = funcs.model
    c_K = 4.0 * model.sigma * float(integrate_against(funcs.measure, lambda a: a * a, (lo, hi)))

    if pairs is None:
        radius = 0.5 * max(abs(lo), abs(hi))
        u = rng.uniform(-radius, radius, size=n_pairs)
        w = rng.uniform(-radius, radius, size=n_pairs)
        close = np.arange(n_pairs) % 2 == 1
        w[close] = u[close] + rng.uniform(-1e-3, 1e-3, size=int(close.sum())) * radius
        candidates = np.column_stack([u, w])
    else:
        candidates = np.asarray(list(pairs), dtype=float).reshape(-1, 2)

    candidates = candidates[candidates[:, 0] != candidates[:, 1]]

    max_ratio, worst = 0.0, None
    for start in range(0, len(candidates), chunk):
        block = candidates[start : start + chunk]
        u_b, w_b = block[:, 0], block[:, 1]

        def difference(alpha: float) -> np.ndarray:
            return abs(alpha) * np.abs(model.probability(u_b, alpha) - model.probability(w_b, alpha))

        integral = np.asarray(integrate_against(funcs.measure, difference, (lo, hi)), dtype=float)
        ratios = integral / np.abs(u_b - w_b)
        index = int(np.argmax(ratios))
        if ratios[index] > max_ratio:
            max_ratio, worst = float(ratios[index]), (float(u_b[index]), float(w_b[index]))

    passed = max_ratio <= c_K * (1.0 + 1e-6)
    logger.debug(f"Проверка Липшица: max_ratio={max_ratio:.6g}, c_K={c_K:.6g}, pass={passed}")
    return LipschitzReport(
        max_ratio=max_ratio, c_K=c_K, passed=passed, pairs_evaluated=len(candidates), worst_pair=worst
    )
