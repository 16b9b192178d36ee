"""Тесты мер мутаций, выборки и отсечки малых скачков."""

import math

import numpy as np
import pytest
from scipy import stats

from src.exceptions import Divergent, InfiniteRate, InvalidMeasure
from src.measures import (
    DiscreteAtoms,
    ExponentialDensity,
    HalfGaussianDensity,
    PowerLawTail,
    SmallJumpPowerLaw,
    TruncationPolicy,
    auto_truncation,
    integrate_against,
    sample_effect,
    total_rate,
    truncation_bias,
)


class TestClosedFormMoments:
    def test_exponential(self, exponential):
        assert exponential.mass_above(0.0) == pytest.approx(1.0, rel=1e-12)
        assert exponential.positive_moment(1.0) == pytest.approx(1.0, rel=1e-12)
        assert exponential.positive_moment(2.0) == pytest.approx(2.0, rel=1e-12)
        assert exponential.finite_mass

    def test_half_gaussian(self):
        measure = HalfGaussianDensity(rate_scale=1.0, scale=1.0)
        assert measure.positive_moment(1.0) == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-12)
        assert measure.positive_moment(2.0) == pytest.approx(1.0, rel=1e-12)

    def test_power_law_tail(self):
        measure = PowerLawTail(delta=1.0)
        assert measure.mass_above(0.0) == pytest.approx(0.5)
        assert measure.positive_moment(1.0) == pytest.approx(1.0)
        assert math.isinf(measure.positive_moment(2.0))
        assert PowerLawTail(delta=0.25).positive_moment(1.0) == pytest.approx(4.0)
        assert math.isinf(PowerLawTail(delta=-0.5).positive_moment(1.0))

    def test_small_jumps_have_infinite_mass(self, small_jump_measure):
        assert not small_jump_measure.finite_mass
        assert small_jump_measure.positive_moment(1.0) == pytest.approx(2.0 + 1.0 / 3.5)
        assert truncation_bias(small_jump_measure, 0.01) == pytest.approx(0.2)

    def test_two_sided_doubles_mass(self):
        measure = ExponentialDensity(1.0, 1.0, two_sided=True)
        assert measure.mass_above(0.0) == pytest.approx(2.0)
        assert measure.support_sign == "two-sided"

    def test_atoms(self):
        measure = DiscreteAtoms([(2.0, 0.3), (1.0, 0.7)])
        assert measure.atoms == [(1.0, 0.7), (2.0, 0.3)]
        assert measure.mass_above(0.0) == pytest.approx(1.0)
        assert measure.mass_above(1.5) == pytest.approx(0.3)


class TestValidation:
    @pytest.mark.parametrize(
        "factory",
        [
            lambda: ExponentialDensity(0.0, 1.0),
            lambda: HalfGaussianDensity(1.0, -1.0),
            lambda: PowerLawTail(delta=-1.5),
            lambda: SmallJumpPowerLaw(delta=1.0),
            lambda: DiscreteAtoms([(0.0, 1.0)]),
            lambda: DiscreteAtoms([(1.0, -0.1)]),
        ],
    )
    def test_invalid_parameters(self, factory):
        with pytest.raises(InvalidMeasure):
            factory()

    def test_infinite_rate_without_truncation(self, small_jump_measure):
        with pytest.raises(InfiniteRate):
            total_rate(small_jump_measure, TruncationPolicy())

    def test_truncated_rate_is_finite(self, small_jump_measure):
        # 2 (eps^(-1/2) - 1) + 1/4.5
        rate = total_rate(small_jump_measure, TruncationPolicy.for_measure(small_jump_measure, 0.01))
        assert rate == pytest.approx(18.0 + 1.0 / 4.5)


class TestIntegrateAgainst:
    def test_density_mean(self, exponential):
        assert integrate_against(exponential, lambda a: a, (0.0, math.inf)) == pytest.approx(1.0, abs=1e-7)

    def test_vector_integrand(self, exponential):
        value = integrate_against(exponential, lambda a: np.array([1.0, a, a * a]), (0.0, math.inf))
        np.testing.assert_allclose(value, [1.0, 1.0, 2.0], rtol=1e-7)

    def test_atoms_exact(self):
        measure = DiscreteAtoms([(1.0, 0.7), (2.0, 0.3)])
        assert integrate_against(measure, lambda a: a, (0.0, math.inf)) == 0.7 + 0.6

    def test_singular_density(self, small_jump_measure):
        # int_0^1 alpha * alpha^(-1.5) d alpha = 2
        value = integrate_against(small_jump_measure, lambda a: a, (0.0, 1.0))
        assert value == pytest.approx(2.0, rel=1e-6)

    @pytest.mark.parametrize("delta, expected", [(0.5, 0.2), (0.95, 0.01**0.05 / 0.05)])
    def test_singular_density_down_to_zero(self, delta, expected):
        # int_0^0.01 alpha^(-delta) d alpha; alpha^(-1-delta) alone overflows near 1e-300
        measure = SmallJumpPowerLaw(delta=delta)
        value = integrate_against(measure, lambda a: a, (0.0, 0.01))
        assert value == pytest.approx(expected, rel=1e-6)

    def test_divergent_integrand(self):
        with pytest.raises(Divergent):
            integrate_against(PowerLawTail(delta=0.5), lambda a: a * a, (0.0, math.inf))

    def test_empty_domain(self, exponential):
        with pytest.raises(ValueError):
            integrate_against(exponential, lambda a: a, (2.0, 1.0))


class TestSampling:
    def test_exponential_mean(self, exponential):
        rng = np.random.default_rng(1)
        draws = np.array([exponential.sample(rng) for _ in range(20000)])
        assert draws.mean() == pytest.approx(1.0, abs=0.05)

    def test_truncated_samples_respect_epsilon(self, small_jump_measure):
        rng = np.random.default_rng(2)
        trunc = TruncationPolicy.for_measure(small_jump_measure, 0.01)
        draws = np.array([sample_effect(small_jump_measure, trunc, rng) for _ in range(20000)])
        assert np.all(draws >= 0.01)
        # доля хвоста alpha > 1: (1/4.5) / (18 + 1/4.5)
        expected = (1.0 / 4.5) / (18.0 + 1.0 / 4.5)
        assert np.mean(draws > 1.0) == pytest.approx(expected, abs=0.004)

    def test_two_sided_signs(self):
        measure = HalfGaussianDensity(1.0, 1.0, two_sided=True)
        rng = np.random.default_rng(3)
        draws = np.array([measure.sample(rng) for _ in range(4000)])
        assert np.mean(draws < 0.0) == pytest.approx(0.5, abs=0.05)

    def test_atoms_frequencies(self):
        measure = DiscreteAtoms([(1.0, 0.75), (3.0, 0.25)])
        rng = np.random.default_rng(4)
        draws = np.array([measure.sample(rng) for _ in range(20000)])
        assert set(np.unique(draws)) == {1.0, 3.0}
        assert np.mean(draws == 3.0) == pytest.approx(0.25, abs=0.02)


class TestAutoTruncation:
    def test_finite_measure_needs_no_cut(self, exponential):
        policy = auto_truncation(exponential, 1.0, 2.0)
        assert policy.epsilon == 0.0
        assert policy.bias_bound == 0.0

    def test_bias_below_threshold(self, small_jump_measure):
        m, v = small_jump_measure.positive_moment(1.0), 3.0
        policy = auto_truncation(small_jump_measure, m, v)
        assert policy.epsilon > 0.0
        assert policy.bias_bound <= 1e-3 * abs(m - v)
        assert policy.bias_bound == pytest.approx(2.0 * math.sqrt(policy.epsilon))

    def test_boundary_uses_absolute_threshold(self, small_jump_measure):
        m = small_jump_measure.positive_moment(1.0)
        policy = auto_truncation(small_jump_measure, m, m)
        assert policy.bias_bound <= 1e-4


class TestReferenceValues:
    def test_total_rate(self):
        assert total_rate(DiscreteAtoms([(1.0, 2.0)]), TruncationPolicy()) == 2.0
        assert total_rate(PowerLawTail(delta=1.0), TruncationPolicy()) == pytest.approx(0.5)

    def test_truncation_bias_values(self, exponential):
        assert truncation_bias(DiscreteAtoms([(1.0, 2.0), (3.0, 1.0)]), 0.5) == 0.0
        assert truncation_bias(exponential, 1e6) == pytest.approx(1.0)

    def test_truncation_bias_monotone(self, small_jump_measure, exponential):
        grid = [2.0**-k for k in range(21)]
        for measure in (small_jump_measure, exponential, PowerLawTail(delta=0.5)):
            bias = [truncation_bias(measure, eps) for eps in grid]
            assert all(b < a for a, b in zip(bias, bias[1:]) if a > 0.0)
            assert bias[-1] <= bias[0]

    def test_atoms_integral(self):
        assert integrate_against(DiscreteAtoms([(1.0, 2.0)]), lambda a: a * a, (0.0, math.inf)) == 2.0

    def test_point_mass_sampling(self):
        rng = np.random.default_rng(0)
        assert {DiscreteAtoms([(1.0, 2.0)]).sample(rng) for _ in range(10)} == {1.0}

    def test_power_law_distribution(self):
        measure = PowerLawTail(delta=1.0)
        rng = np.random.default_rng(8)
        draws = np.array([measure.sample(rng) for _ in range(100_000)])
        assert np.mean(draws <= 2.0) == pytest.approx(0.75, abs=0.01)
        assert np.mean(draws <= 4.0) == pytest.approx(1.0 - 4.0**-2, abs=0.01)
        assert stats.kstest(draws, lambda a: 1.0 - np.asarray(a) ** -2.0).pvalue > 1e-3

    def test_sampler_matches_integral(self, exponential):
        def f(a):
            return np.exp(-a)

        expected = integrate_against(exponential, f, (0.0, math.inf)) / total_rate(exponential, TruncationPolicy())
        rng = np.random.default_rng(9)
        values = f(np.array([exponential.sample(rng) for _ in range(50_000)]))
        assert abs(values.mean() - expected) <= 4.0 * values.std() / math.sqrt(values.size)

    def test_same_stream_same_samples(self, small_jump_measure):
        trunc = TruncationPolicy.for_measure(small_jump_measure, 0.01)
        first = [sample_effect(small_jump_measure, trunc, np.random.default_rng(5)) for _ in range(3)]
        second = [sample_effect(small_jump_measure, trunc, np.random.default_rng(5)) for _ in range(3)]
        assert first == second


@pytest.mark.slow
@pytest.mark.parametrize(
    "measure, epsilon, domain",
    [
        (ExponentialDensity(1.0, 1.0, two_sided=True), 0.0, (-math.inf, math.inf)),
        (HalfGaussianDensity(1.5, 0.7), 0.0, (0.0, math.inf)),
        (PowerLawTail(delta=1.0, lower_cut=0.5), 0.0, (0.0, math.inf)),
        (SmallJumpPowerLaw(delta=0.5, tail_coefficient=1.0), 0.01, (0.01, math.inf)),
        (DiscreteAtoms([(-1.0, 0.2), (0.5, 0.5), (3.0, 0.3)]), 0.0, (-math.inf, math.inf)),
    ],
    ids=["exponential_two_sided", "half_gaussian", "power_law", "small_jumps", "atoms"],
)
def test_sampler_agrees_with_integrator(measure, epsilon, domain):
    def f(a):
        return 1.0 / (1.0 + np.asarray(a) ** 2)

    trunc = TruncationPolicy.for_measure(measure, epsilon)
    expected = integrate_against(measure, f, domain) / total_rate(measure, trunc)
    rng = np.random.default_rng(21)
    values = f(np.array([sample_effect(measure, trunc, rng) for _ in range(200_000)]))
    assert abs(values.mean() - expected) <= 4.0 * values.std() / math.sqrt(values.size)
