"""
Мера интенсивности мутаций nu(d alpha).

Точная выборка предлагаемых мутаций, интегрирование по мере и отсечка
малых скачков для sigma-конечных мер с явной оценкой смещения.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, ClassVar, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import integrate, special

from .exceptions import Divergent, InfiniteRate, InvalidMeasure, NonConvergent

# Допуски адаптивной квадратуры
QUAD_EPSABS = 1e-9
QUAD_EPSREL = 1e-8
QUAD_LIMIT = 10_000

# Нижняя граница по log(alpha) для особенности в нуле (alpha = 1e-300)
_LOG_ALPHA_MIN = math.log(1e-300)

Integrand = Callable[[Any], Any]
Domain = Tuple[float, float]


def _power_integral(coef: float, exponent: float, lo: float, hi: float) -> float:
    """Возвращает coef * int_lo^hi t^(exponent-1) dt, 0 <= lo <= hi <= inf."""
    if hi <= lo or coef == 0.0:
        return 0.0
    if exponent == 0.0:
        if lo == 0.0 or math.isinf(hi):
            return math.inf
        return coef * math.log(hi / lo)
    if exponent > 0.0:
        if math.isinf(hi):
            return math.inf
        return coef * (hi**exponent - lo**exponent) / exponent
    # exponent < 0: интеграл сходится на бесконечности, расходится в нуле
    if lo == 0.0:
        return math.inf
    upper = 0.0 if math.isinf(hi) else hi**exponent
    return coef * (lo**exponent - upper) / (-exponent)


class MutationMeasure(ABC):
    """Базовый класс меры nu(d alpha) на R."""

    family: ClassVar[str]

    two_sided: bool = False

    @property
    def support_sign(self) -> str:
        return "two-sided" if self.two_sided else "positive-only"

    # --- закрытые формулы для положительной полуоси ---

    @abstractmethod
    def _positive_moment(self, k: float, lo: float, hi: float) -> float:
        """int_{[lo, hi] ∩ (0, inf)} alpha^k nu(d alpha), 0 <= lo <= hi."""

    @abstractmethod
    def _sample_positive(self, rng: np.random.Generator, eps: float) -> float:
        """Выборка alpha > 0 из nu, ограниченной на [eps, inf) и нормированной."""

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Каноническое описание параметров (для хеша сценария)."""

    # --- общие операции ---

    def abs_moment(self, k: float, lo: float, hi: float) -> float:
        """
        int_{lo <= |alpha| <= hi} |alpha|^k nu(d alpha) с учетом обеих полуосей.

        Args:
            k: Порядок момента
            lo: Нижняя граница по |alpha| (>= 0)
            hi: Верхняя граница по |alpha| (может быть inf)
        """
        value = self._positive_moment(k, lo, hi)
        if self.two_sided:
            value *= 2.0
        return value

    def positive_moment(self, k: float, lo: float = 0.0, hi: float = math.inf) -> float:
        """int_{[lo, hi] ∩ R_+} alpha^k nu(d alpha)."""
        return self._positive_moment(k, max(lo, 0.0), hi)

    def mass_above(self, eps: float) -> float:
        """nu({|alpha| >= eps}); для eps = 0: полная масса (возможно inf)."""
        return self.abs_moment(0.0, eps, math.inf)

    @property
    def finite_mass(self) -> bool:
        return math.isfinite(self.mass_above(0.0))

    def small_jump_moment(self, eps: float) -> float:
        """int_{|alpha| < eps} |alpha| nu(d alpha)."""
        if eps <= 0.0:
            return 0.0
        return self.abs_moment(1.0, 0.0, eps)

    def sample(self, rng: np.random.Generator, eps: float = 0.0) -> float:
        """Выборка эффекта мутации из nu, ограниченной на {|alpha| >= eps}."""
        sign = 1.0
        if self.two_sided and rng.random() < 0.5:
            sign = -1.0
        return sign * self._sample_positive(rng, eps)

    @abstractmethod
    def integrate(
        self,
        integrand: Integrand,
        lo: float,
        hi: float,
        breakpoints: Sequence[float] = (),
        epsabs: float = QUAD_EPSABS,
        epsrel: float = QUAD_EPSREL,
    ) -> Any:
        """int_{[lo, hi]} f(alpha) nu(d alpha)."""

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.describe().items() if k != "family")
        return f"<{self.family}({params})>"


class DiscreteAtoms(MutationMeasure):
    """Конечная сумма атомов: nu = sum_i w_i delta_{alpha_i}."""

    family = "discrete_atoms"

    def __init__(self, atoms: Iterable[Tuple[float, float]]):
        pairs = [(float(loc), float(weight)) for loc, weight in atoms]
        for loc, weight in pairs:
            if not math.isfinite(loc) or loc == 0.0:
                raise InvalidMeasure(f"Атом должен быть ненулевым и конечным: {loc}")
            if not (weight > 0.0 and math.isfinite(weight)):
                raise InvalidMeasure(f"Вес атома должен быть положительным: {weight}")

        pairs.sort()
        self.locations = np.array([p[0] for p in pairs], dtype=float)
        self.weights = np.array([p[1] for p in pairs], dtype=float)
        self.two_sided = bool(np.any(self.locations < 0.0))

    @property
    def atoms(self) -> List[Tuple[float, float]]:
        return list(zip(self.locations.tolist(), self.weights.tolist()))

    def _positive_moment(self, k: float, lo: float, hi: float) -> float:
        mask = (self.locations > 0.0) & (self.locations >= lo) & (self.locations <= hi)
        return float(np.sum(self.weights[mask] * self.locations[mask] ** k))

    def abs_moment(self, k: float, lo: float, hi: float) -> float:
        size = np.abs(self.locations)
        mask = (size >= lo) & (size <= hi)
        return float(np.sum(self.weights[mask] * size[mask] ** k))

    def small_jump_moment(self, eps: float) -> float:
        size = np.abs(self.locations)
        mask = size < eps
        return float(np.sum(self.weights[mask] * size[mask]))

    def sample(self, rng: np.random.Generator, eps: float = 0.0) -> float:
        mask = np.abs(self.locations) >= eps
        cumulative = np.cumsum(self.weights[mask])
        # Всегда расходует ровно одно равномерное число
        u = rng.random() * cumulative[-1]
        index = int(np.searchsorted(cumulative, u, side="right"))
        return float(self.locations[mask][min(index, len(cumulative) - 1)])

    def _sample_positive(self, rng: np.random.Generator, eps: float) -> float:
        return self.sample(rng, eps)

    def integrate(
        self,
        integrand: Integrand,
        lo: float,
        hi: float,
        breakpoints: Sequence[float] = (),
        epsabs: float = QUAD_EPSABS,
        epsrel: float = QUAD_EPSREL,
    ) -> Any:
        mask = (self.locations >= lo) & (self.locations <= hi)
        total = 0.0
        for loc, weight in zip(self.locations[mask], self.weights[mask]):
            total = total + weight * np.asarray(integrand(float(loc)), dtype=float)
        return total if np.ndim(total) else float(total)

    def describe(self) -> Dict[str, Any]:
        return {"family": self.family, "atoms": [[loc, w] for loc, w in self.atoms]}


class DensityMeasure(MutationMeasure):
    """Абсолютно непрерывная мера; двусторонний вариант: зеркальное отражение."""

    #: Характерный масштаб для геометрического разбиения отрезка интегрирования
    scale: float = 1.0
    #: Левая граница носителя на положительной полуоси
    support_start: float = 0.0
    #: Неинтегрируемая особенность плотности в нуле (alpha^(-1-delta))
    singular_at_zero: bool = False

    @abstractmethod
    def density(self, alpha: Any) -> Any:
        """Плотность на положительной полуоси."""

    def log_weight(self, y: float) -> float:
        """density(alpha) * alpha при alpha = exp(y)."""
        alpha = math.exp(y)
        return float(self.density(alpha)) * alpha

    def integrate(
        self,
        integrand: Integrand,
        lo: float,
        hi: float,
        breakpoints: Sequence[float] = (),
        epsabs: float = QUAD_EPSABS,
        epsrel: float = QUAD_EPSREL,
    ) -> Any:
        total: Any = 0.0
        if hi > 0.0:
            points = [p for p in breakpoints if p > 0.0]
            total = total + self._integrate_side(integrand, max(lo, 0.0), hi, points, epsabs, epsrel)
        if self.two_sided and lo < 0.0:
            points = [-p for p in breakpoints if p < 0.0]
            mirrored = lambda beta: integrand(-beta)  # noqa: E731
            total = total + self._integrate_side(mirrored, max(-hi, 0.0), -lo, points, epsabs, epsrel)
        return total

    def _integrate_side(
        self,
        h: Integrand,
        a: float,
        b: float,
        breakpoints: Sequence[float],
        epsabs: float,
        epsrel: float,
    ) -> Any:
        a = max(a, self.support_start)
        if b <= a:
            return 0.0

        self._check_divergence(h, a, b)

        total: Any = 0.0
        if self.singular_at_zero and a < 1.0:
            # alpha = exp(y): особенность alpha^(-1-delta) в нуле снимается заменой
            top = min(b, 1.0)
            y_lo = math.log(a) if a > 0.0 else _LOG_ALPHA_MIN
            y_points = [math.log(p) for p in breakpoints if a < p < top]

            def in_log(y: float) -> Any:
                return np.asarray(h(math.exp(y))) * self.log_weight(y)

            total = total + _quad(in_log, y_lo, math.log(top), y_points, epsabs, epsrel)
            a = top
            if b <= a:
                return total

        points = sorted({*self._geometric_points(a, b), *(p for p in breakpoints if a < p < b)})
        total = total + _quad(lambda al: np.asarray(h(al)) * self.density(al), a, b, points, epsabs, epsrel)
        return total

    def _geometric_points(self, a: float, b: float) -> List[float]:
        start = max(a, self.scale / 64.0)
        stop = b if math.isfinite(b) else self.scale * 4.0**12
        points = []
        p = self.scale / 64.0
        while p < stop and len(points) < 64:
            if p > start:
                points.append(p)
            p *= 4.0
        return points

    def _check_divergence(self, h: Integrand, a: float, b: float) -> None:
        def magnitude(alpha: float) -> float:
            with np.errstate(all="ignore"):
                return float(np.max(np.abs(np.asarray(h(alpha), dtype=float) * self.density(alpha))))

        def magnitude_log(y: float) -> float:
            with np.errstate(all="ignore"):
                return float(np.max(np.abs(np.asarray(h(math.exp(y)), dtype=float) * self.log_weight(y))))

        if math.isinf(b):
            t1 = max(self.scale, a, 1.0) * 1e6
            t2 = t1 * 100.0
            f1, f2 = magnitude(t1), magnitude(t2)
            if f1 > 0.0 and f2 > 0.0 and math.log(f2 / f1) / math.log(100.0) > -1.0 - 1e-6:
                raise Divergent(f"{self.family}: подынтегральное выражение не убывает быстрее 1/alpha на бесконечности")

        if self.singular_at_zero and a == 0.0:
            # в переменной y = log(alpha) интегрируемость <=> убывание при y -> -inf
            y1, y2 = -30.0, -60.0
            g1 = magnitude_log(y1)
            g2 = magnitude_log(y2)
            if g2 > 0.0 and (g1 == 0.0 or math.log(g1 / g2) / (y1 - y2) <= 1e-6):
                raise Divergent(f"{self.family}: неинтегрируемая особенность в нуле")


def _quad(
    f: Callable[[float], Any],
    a: float,
    b: float,
    points: Sequence[float],
    epsabs: float,
    epsrel: float,
) -> Any:
    """Адаптивная квадратура Гаусса-Кронрода (scipy.integrate.quad_vec)."""
    with np.errstate(over="ignore", under="ignore"):
        result, error, info = integrate.quad_vec(
            f,
            a,
            b,
            epsabs=epsabs,
            epsrel=epsrel,
            norm="max",
            limit=QUAD_LIMIT,
            points=list(points) or None,
            full_output=True,
        )
    if info.status != 0:
        raise NonConvergent(
            f"quad_vec на [{a}, {b}] не сошлась (status={info.status}, оценка ошибки {np.max(error):.3g})"
        )
    return result if np.ndim(result) else float(result)


class ExponentialDensity(DensityMeasure):
    """nu(d alpha) = r * exp(-alpha/lambda)/lambda d alpha, alpha > 0; m = r * lambda."""

    family = "exponential"

    def __init__(self, rate_scale: float, mean_effect: float, two_sided: bool = False):
        if not (rate_scale > 0.0 and mean_effect > 0.0):
            raise InvalidMeasure("ExponentialDensity: rate_scale и mean_effect должны быть > 0")
        self.rate_scale = float(rate_scale)
        self.mean_effect = float(mean_effect)
        self.two_sided = bool(two_sided)
        self.scale = self.mean_effect

    def density(self, alpha: Any) -> Any:
        return self.rate_scale / self.mean_effect * np.exp(-np.asarray(alpha) / self.mean_effect)

    def _positive_moment(self, k: float, lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        lam = self.mean_effect
        upper = 1.0 if math.isinf(hi) else special.gammainc(k + 1.0, hi / lam)
        lower = special.gammainc(k + 1.0, lo / lam)
        return self.rate_scale * lam**k * special.gamma(k + 1.0) * (upper - lower)

    def _sample_positive(self, rng: np.random.Generator, eps: float) -> float:
        # отсутствие памяти: alpha | alpha >= eps ~ eps + Exp(lambda)
        return max(eps, 0.0) + rng.exponential(self.mean_effect)

    def describe(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "rate_scale": self.rate_scale,
            "mean_effect": self.mean_effect,
            "two_sided": self.two_sided,
        }


class HalfGaussianDensity(DensityMeasure):
    """nu(d alpha) = r * sqrt(2/pi)/s * exp(-alpha^2 / 2 s^2) d alpha, alpha > 0."""

    family = "half_gaussian"

    def __init__(self, rate_scale: float, scale: float, two_sided: bool = False):
        if not (rate_scale > 0.0 and scale > 0.0):
            raise InvalidMeasure("HalfGaussianDensity: rate_scale и scale должны быть > 0")
        self.rate_scale = float(rate_scale)
        self.scale = float(scale)
        self.two_sided = bool(two_sided)

    def density(self, alpha: Any) -> Any:
        s = self.scale
        return self.rate_scale * math.sqrt(2.0 / math.pi) / s * np.exp(-np.square(alpha) / (2.0 * s * s))

    def _positive_moment(self, k: float, lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        s2 = 2.0 * self.scale**2
        shape = (k + 1.0) / 2.0
        upper = 1.0 if math.isinf(hi) else special.gammainc(shape, hi * hi / s2)
        lower = special.gammainc(shape, lo * lo / s2)
        coef = self.rate_scale * (self.scale * math.sqrt(2.0)) ** k / math.sqrt(math.pi)
        return coef * special.gamma(shape) * (upper - lower)

    def _sample_positive(self, rng: np.random.Generator, eps: float) -> float:
        root = self.scale * math.sqrt(2.0)
        u = 1.0 - rng.random()
        return float(root * special.erfcinv(u * special.erfc(max(eps, 0.0) / root)))

    def describe(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "rate_scale": self.rate_scale,
            "scale": self.scale,
            "two_sided": self.two_sided,
        }


class PowerLawTail(DensityMeasure):
    """nu(d alpha) = r * alpha^(-(2+delta)) d alpha на [a, inf)."""

    family = "power_law_tail"

    def __init__(self, delta: float, lower_cut: float = 1.0, rate_scale: float = 1.0, two_sided: bool = False):
        if not delta > -1.0:
            raise InvalidMeasure(f"PowerLawTail: требуется delta > -1 (получено {delta})")
        if not lower_cut > 0.0:
            raise InvalidMeasure("PowerLawTail: lower_cut должен быть > 0")
        if not rate_scale > 0.0:
            raise InvalidMeasure("PowerLawTail: rate_scale должен быть > 0")
        self.delta = float(delta)
        self.lower_cut = float(lower_cut)
        self.rate_scale = float(rate_scale)
        self.two_sided = bool(two_sided)
        self.scale = self.lower_cut
        self.support_start = self.lower_cut

    @property
    def exponent(self) -> float:
        return 2.0 + self.delta

    def density(self, alpha: Any) -> Any:
        alpha = np.asarray(alpha, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(alpha >= self.lower_cut, self.rate_scale * alpha ** (-self.exponent), 0.0)

    def _positive_moment(self, k: float, lo: float, hi: float) -> float:
        return _power_integral(self.rate_scale, k - 1.0 - self.delta, max(lo, self.lower_cut), hi)

    def _sample_positive(self, rng: np.random.Generator, eps: float) -> float:
        start = max(self.lower_cut, eps)
        return start * (1.0 - rng.random()) ** (-1.0 / (1.0 + self.delta))

    def describe(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "delta": self.delta,
            "lower_cut": self.lower_cut,
            "rate_scale": self.rate_scale,
            "two_sided": self.two_sided,
        }


class SmallJumpPowerLaw(DensityMeasure):
    """
    nu(d alpha) = r * alpha^(-1-delta) 1_{0<alpha<1} + C * alpha^(-k) 1_{alpha>1}.

    При delta >= 0 полная масса бесконечна (бесконечно много малых мутаций),
    но int alpha nu(d alpha) около нуля конечен при delta < 1.
    """

    family = "small_jump_power_law"

    def __init__(
        self,
        delta: float,
        rate_scale: float = 1.0,
        tail_coefficient: float = 0.0,
        tail_exponent: float = 5.5,
        two_sided: bool = False,
    ):
        if not delta < 1.0:
            raise InvalidMeasure(f"SmallJumpPowerLaw: требуется delta < 1 (получено {delta})")
        if not rate_scale > 0.0:
            raise InvalidMeasure("SmallJumpPowerLaw: rate_scale должен быть > 0")
        if tail_coefficient < 0.0:
            raise InvalidMeasure("SmallJumpPowerLaw: tail_coefficient должен быть >= 0")
        if tail_coefficient > 0.0 and not tail_exponent > 1.0:
            raise InvalidMeasure("SmallJumpPowerLaw: tail_exponent должен быть > 1")
        self.delta = float(delta)
        self.rate_scale = float(rate_scale)
        self.tail_coefficient = float(tail_coefficient)
        self.tail_exponent = float(tail_exponent)
        self.two_sided = bool(two_sided)
        self.scale = 1.0
        self.singular_at_zero = True

    def density(self, alpha: Any) -> Any:
        alpha = np.asarray(alpha, dtype=float)
        with np.errstate(divide="ignore"):
            small = self.rate_scale * alpha ** (-1.0 - self.delta)
            tail = self.tail_coefficient * alpha ** (-self.tail_exponent)
        return np.where(alpha < 1.0, small, tail)

    def log_weight(self, y: float) -> float:
        # alpha^(-1-delta) переполняется при alpha < 1e-205; alpha^(-delta) = exp(-delta y) конечно
        if y < 0.0:
            return self.rate_scale * math.exp(-self.delta * y)
        return self.tail_coefficient * math.exp((1.0 - self.tail_exponent) * y)

    def _positive_moment(self, k: float, lo: float, hi: float) -> float:
        small = _power_integral(self.rate_scale, k - self.delta, lo, min(hi, 1.0)) if lo < 1.0 else 0.0
        tail = _power_integral(self.tail_coefficient, k + 1.0 - self.tail_exponent, max(lo, 1.0), hi)
        return small + tail

    def _small_mass(self, eps: float) -> float:
        return self._positive_moment(0.0, eps, 1.0) if eps < 1.0 else 0.0

    def _sample_positive(self, rng: np.random.Generator, eps: float) -> float:
        eps = max(eps, 0.0)
        small = self._small_mass(eps)
        tail = self._positive_moment(0.0, max(eps, 1.0), math.inf)
        choice, w = rng.random(), rng.random()

        if choice * (small + tail) < small:
            d = self.delta
            if d == 0.0:
                return eps ** (1.0 - w)
            start = eps ** (-d) if eps > 0.0 else 0.0
            return (start - w * (start - 1.0)) ** (-1.0 / d)

        return max(eps, 1.0) * (1.0 - w) ** (-1.0 / (self.tail_exponent - 1.0))

    def describe(self) -> Dict[str, Any]:
        return {
            "family": self.family,
            "delta": self.delta,
            "rate_scale": self.rate_scale,
            "tail_coefficient": self.tail_coefficient,
            "tail_exponent": self.tail_exponent,
            "two_sided": self.two_sided,
        }


@dataclass(frozen=True)
class TruncationPolicy:
    """Отсечка малых скачков |alpha| < epsilon и оценка вносимого смещения дрейфа."""

    epsilon: float = 0.0
    bias_bound: float = 0.0

    @classmethod
    def for_measure(cls, measure: MutationMeasure, epsilon: float) -> "TruncationPolicy":
        if epsilon < 0.0:
            raise ValueError("epsilon должен быть >= 0")
        return cls(epsilon=float(epsilon), bias_bound=truncation_bias(measure, epsilon))


def total_rate(measure: MutationMeasure, trunc: TruncationPolicy) -> float:
    """
    Базовая интенсивность прореживания lambda_eps = nu({|alpha| >= eps}).

    Raises:
        InfiniteRate: Если eps = 0, а полная масса бесконечна
    """
    rate = measure.mass_above(trunc.epsilon)
    if not math.isfinite(rate):
        raise InfiniteRate(
            f"{measure.family}: бесконечная интенсивность при eps={trunc.epsilon}; задайте отсечку eps > 0"
        )
    return rate


def sample_effect(measure: MutationMeasure, trunc: TruncationPolicy, rng: np.random.Generator) -> float:
    """Эффект A_i очередной предложенной мутации (nu на {|alpha| >= eps}, нормированная)."""
    return measure.sample(rng, trunc.epsilon)


def integrate_against(
    measure: MutationMeasure,
    integrand: Integrand,
    domain: Domain,
    breakpoints: Sequence[float] = (),
    epsabs: float = QUAD_EPSABS,
    epsrel: float = QUAD_EPSREL,
) -> Any:
    """
    Вычисляет int_domain f(alpha) nu(d alpha).

    Для атомов: точная взвешенная сумма, для плотностей: адаптивная
    квадратура (допускаются векторные подынтегральные функции).

    Args:
        measure: Мера мутаций
        integrand: Функция alpha -> float или numpy-массив
        domain: Замкнутый отрезок (lo, hi), концы могут быть бесконечны
        breakpoints: Точки излома подынтегральной функции

    Raises:
        NonConvergent: Квадратура не сошлась
        Divergent: Обнаружена неинтегрируемая особенность
    """
    lo, hi = domain
    if hi < lo:
        raise ValueError(f"Пустая область интегрирования: {domain}")
    return measure.integrate(integrand, lo, hi, breakpoints, epsabs, epsrel)


def truncation_bias(measure: MutationMeasure, eps: float) -> float:
    """Смещение дрейфа от отброшенных скачков: int_{|alpha|<eps} |alpha| nu(d alpha)."""
    if eps < 0.0:
        raise ValueError("eps должен быть >= 0")
    return measure.small_jump_moment(eps)


def auto_truncation(measure: MutationMeasure, m: float, v: float, rel_tol: float = 1e-9) -> TruncationPolicy:
    """
    Выбирает eps так, чтобы смещение было пренебрежимо относительно |m - v|.

    Порог: 1e-3 * |m - v|, либо 1e-4 в абсолютных единицах при m = v.
    Для мер с конечной массой отсечка не нужна (eps = 0).
    """
    if measure.finite_mass:
        return TruncationPolicy.for_measure(measure, 0.0)

    gap = abs(m - v)
    if math.isinf(gap):
        threshold = 1e-3 * max(v, 1.0)
    elif gap <= rel_tol * max(abs(m), abs(v), 1.0):
        threshold = 1e-4
    else:
        threshold = 1e-3 * gap

    eps = 1.0
    for _ in range(200):
        if truncation_bias(measure, eps) <= threshold:
            break
        eps /= 2.0
    policy = TruncationPolicy.for_measure(measure, eps)
    logger.debug(f"Автоматическая отсечка для {measure.family}: eps={eps:.3g}, bias={policy.bias_bound:.3g}")
    return policy


MEASURE_FAMILIES: Dict[str, type] = {
    cls.family: cls
    for cls in (DiscreteAtoms, ExponentialDensity, HalfGaussianDensity, PowerLawTail, SmallJumpPowerLaw)
}
