"""Тесты моделей скорости оптимума."""

import math

import numpy as np
import pytest
from scipy import integrate

from src.speed import SPEED_KINDS, Constant, PiecewiseConstantRate, SinusoidalRate, WithBrownianNoise


def test_constant():
    speed = Constant(1.5)
    assert speed.drift(2.0, 4.0) == pytest.approx(3.0)
    assert speed.mean_rate == speed.v_sup == speed.v_inf == 1.5
    assert speed.knot_times(10.0).size == 0
    with pytest.raises(ValueError):
        Constant(-1.0)


class TestPiecewiseConstant:
    def test_cumulative(self):
        speed = PiecewiseConstantRate([1.0, 3.0], [1.0, 1.0])
        assert speed.mean_rate == pytest.approx(2.0)
        assert speed.cumulative(2.5) == pytest.approx(4.5)
        assert speed.drift(0.5, 1.5) == pytest.approx(0.5 + 1.5)
        assert speed.rate(1.5) == 3.0
        assert (speed.v_inf, speed.v_sup) == (1.0, 3.0)

    def test_knots_at_level_changes(self):
        speed = PiecewiseConstantRate([1.0, 3.0], [1.0, 1.0])
        np.testing.assert_allclose(speed.knot_times(4.0), [1.0, 2.0, 3.0])

    def test_validation(self):
        with pytest.raises(ValueError):
            PiecewiseConstantRate([1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            PiecewiseConstantRate([1.0], [0.0])


class TestSinusoidal:
    def test_cumulative_matches_rate(self):
        speed = SinusoidalRate(mean=2.0, amplitude=0.5, period=10.0, phase=0.3)
        expected, _ = integrate.quad(lambda s: float(speed.rate(s)), 0.0, 7.3)
        assert speed.cumulative(7.3) == pytest.approx(expected, rel=1e-10)
        assert speed.cumulative(10.0) == pytest.approx(20.0)

    def test_bounds_and_knots(self):
        speed = SinusoidalRate(mean=2.0, amplitude=-0.5, period=64.0)
        assert (speed.v_inf, speed.v_sup) == (1.5, 2.5)
        assert speed.knot_step == 1.0
        knots = speed.knot_times(5.0)
        np.testing.assert_allclose(knots, [1.0, 2.0, 3.0, 4.0])
        assert not speed.is_constant


class TestBrownianNoise:
    def test_without_rng_is_deterministic_part(self):
        speed = WithBrownianNoise(Constant(1.0), noise_scale=0.5)
        assert speed.displacement(0.0, 3.0) == pytest.approx(3.0)
        assert speed.mean_rate == 1.0
        assert speed.has_noise

    def test_increment_variance(self):
        speed = WithBrownianNoise(Constant(1.0), noise_scale=0.5)
        rng = np.random.default_rng(11)
        noise = np.array([speed.displacement(0.0, 4.0, rng) - 4.0 for _ in range(20000)])
        assert noise.mean() == pytest.approx(0.0, abs=0.03)
        assert noise.std() == pytest.approx(1.0, rel=0.05)

    def test_knots_merge_base_knots(self):
        base = PiecewiseConstantRate([1.0, 2.0], [0.5, 0.5])
        speed = WithBrownianNoise(base, noise_scale=0.1, step=1.0)
        knots = speed.knot_times(3.0)
        assert {0.5, 1.0, 1.5, 2.0, 2.5} <= set(knots.tolist())
        assert np.all(np.diff(knots) > 0.0)

    def test_validation(self):
        noisy = WithBrownianNoise(Constant(1.0), 0.1)
        with pytest.raises(ValueError):
            WithBrownianNoise(noisy, 0.1)
        with pytest.raises(ValueError):
            WithBrownianNoise(Constant(1.0), -0.1)


def test_describe_is_registered():
    speed = WithBrownianNoise(SinusoidalRate(1.0, 0.2, 5.0), 0.3)
    described = speed.describe()
    assert described["kind"] in SPEED_KINDS
    assert described["base"]["kind"] == "sinusoidal"
    assert math.isclose(described["noise_scale"], 0.3)
