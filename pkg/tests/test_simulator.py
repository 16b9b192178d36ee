"""Тесты событийного симулятора и потраекторных проверок."""

import heapq

import numpy as np
import pytest
from scipy import stats

from src.exceptions import BudgetExceeded, EnvelopeViolation, InfiniteRate, SimulationError, WindowViolation
from src.fixation import FixationModel, KimuraExp, StepLimit
from src.measures import DiscreteAtoms, ExponentialDensity, SmallJumpPowerLaw, TruncationPolicy, truncation_bias
from src.simulator import (
    FIXED,
    REJECTED,
    LogAbs,
    PowerLyapunov,
    Scenario,
    Simulator,
    Trajectory,
    ito_inequality_check,
    martingale_residual,
    quadratic_variation_check,
    simulate,
)
from src.speed import Constant, PiecewiseConstantRate, WithBrownianNoise

from .conftest import make_scenario


def birth_clock_oracle(atoms, v, x0, horizon, seed):
    """
    Независимая реализация для атомов и предела сильного отбора: очередь
    часов на heapq, тот же порядок розыгрыша (время, эффект, метка).
    """
    rng = np.random.default_rng(seed)
    locations = sorted(atoms)
    rate = float(np.sum([w for _, w in locations]))
    mean_wait = 1.0 / rate

    clocks = [(horizon, 1, "end"), (rng.exponential(mean_wait), 0, "proposal")]
    heapq.heapify(clocks)
    t, x = 0.0, x0
    log = []
    while True:
        t_next, _, kind = heapq.heappop(clocks)
        x = x - v * (t_next - t)
        t = t_next
        if kind == "end":
            break

        u = rng.random() * float(np.cumsum([w for _, w in locations])[-1])
        acc, alpha = 0.0, locations[-1][0]
        for loc, weight in locations:
            acc += weight
            if u < acc:
                alpha = loc
                break
        mark = rng.random()
        fixed = x * alpha < 0.0 and abs(alpha) <= 2.0 * abs(x) and mark <= 1.0
        log.append((t, alpha, fixed))
        if fixed:
            x = x + alpha
        heapq.heappush(clocks, (t + rng.exponential(mean_wait), 0, "proposal"))
    return log, x


class TestScenario:
    def test_validation(self):
        with pytest.raises(ValueError):
            make_scenario(horizon=0.0)
        with pytest.raises(ValueError):
            make_scenario(grid_step=-1.0)
        with pytest.raises(InfiniteRate):
            make_scenario(measure=SmallJumpPowerLaw(delta=0.5))

    def test_hash_is_stable(self):
        assert make_scenario().scenario_hash() == make_scenario().scenario_hash()
        assert make_scenario().scenario_hash() != make_scenario(speed=Constant(2.5)).scenario_hash()
        assert len(make_scenario().scenario_hash()) == 64


class TestSimulate:
    def test_deterministic_for_seed(self):
        sc = make_scenario(horizon=200.0)
        first, second = simulate(sc, 42), simulate(sc, 42)
        assert np.array_equal(first.event_t, second.event_t)
        assert np.array_equal(first.sample_x, second.sample_x)
        assert first.scenario_hash == sc.scenario_hash()
        assert not np.array_equal(first.event_t, simulate(sc, 43).event_t)

    def test_event_log_consistency(self):
        traj = simulate(make_scenario(x0=-5.0, horizon=300.0, speed=Constant(1.0)), 7)
        assert traj.n_events >= traj.n_fixed > 0
        for event in traj.events:
            assert event.kind in (FIXED, REJECTED)
            if event.kind == FIXED:
                assert event.x_after == event.x_before + event.alpha
                assert event.x_before * event.alpha < 0.0
                assert abs(event.alpha) <= 2.0 * abs(event.x_before)
            else:
                assert event.x_after == event.x_before

    def test_output_grid(self):
        traj = simulate(make_scenario(horizon=10.0, grid_step=2.5), 1)
        np.testing.assert_allclose(traj.sample_t, [0.0, 2.5, 5.0, 7.5, 10.0])
        assert traj.end_time == 10.0
        assert traj.sample_x[-1] == pytest.approx(traj.final_value)

    def test_positive_lag_reaches_zero_in_time(self):
        # при x0 > 0 полезных скачков нет, X убывает со скоростью v
        traj = simulate(make_scenario(x0=10.0, horizon=20.0, speed=Constant(2.0)), 3)
        t0 = traj.first_time_below(0.0)
        assert t0 is not None and t0 <= 10.0 / 2.0 + 1e-9

    def test_budget_exceeded_keeps_partial_path(self):
        sc = make_scenario(horizon=1000.0, event_cap=5)
        with pytest.raises(BudgetExceeded) as excinfo:
            Simulator(sc).run(0)
        partial = excinfo.value.trajectory
        assert partial is not None and not partial.complete
        assert partial.n_events == 6

    def test_noise_records_rejected_knots(self):
        speed = WithBrownianNoise(Constant(2.0), noise_scale=0.5, step=1.0)
        sc = make_scenario(speed=speed, horizon=50.0)
        first, second = simulate(sc, 9), simulate(sc, 9)
        assert np.array_equal(first.knot_x_plus, second.knot_x_plus)
        assert first.knot_t.size >= first.n_events + 50

    def test_time_varying_speed_knots(self):
        speed = PiecewiseConstantRate([1.0, 3.0], [5.0, 5.0])
        traj = simulate(make_scenario(speed=speed, horizon=40.0), 4)
        assert {5.0, 10.0, 35.0} <= set(traj.knot_t.tolist())
        assert quadratic_variation_check(traj) <= 1e-9 * max(1.0, float(np.max(traj.knot_x_plus**2)))


class TestOracle:
    def test_birth_clock_oracle_agrees(self, atoms_step_scenario):
        sc = atoms_step_scenario
        atoms = [(1.0, 0.7), (-0.5, 0.2)]
        for seed in range(100):
            traj = simulate(sc, seed)
            log, final = birth_clock_oracle(atoms, 0.7, sc.x0, sc.horizon, seed)
            assert traj.event_t.tolist() == [t for t, _, _ in log]
            assert traj.event_alpha.tolist() == [a for _, a, _ in log]
            assert traj.event_fixed.tolist() == [f for _, _, f in log]
            assert traj.final_value == final


class TestTrajectoryHelpers:
    @pytest.fixture
    def path(self):
        return Trajectory.from_path(x0=-5.0, horizon=10.0, jumps=[(2.0, 1.5)], speed=Constant(1.0))

    def test_values_around_jump(self, path):
        assert path.value_before(2.0) == pytest.approx(-7.0)
        assert path.value_at(2.0) == pytest.approx(-5.5)
        assert path.final_value == pytest.approx(-13.5)
        assert path.sample_x[2] == pytest.approx(-5.5)

    def test_first_crossings(self, path):
        assert path.first_time_below(-6.0) == pytest.approx(1.0)
        assert path.first_time_at_or_above(-5.5) == 0.0
        assert path.first_time_at_or_above(-4.0) is None

    def test_segments(self, path):
        t_start, t_end, x_start, x_end = path.segments()
        np.testing.assert_allclose(t_start, [0.0, 2.0])
        np.testing.assert_allclose(x_end, [-7.0, -13.5])


class TestMartingale:
    def test_exact_compensator_for_atoms(self):
        sc = Scenario(
            measure=DiscreteAtoms([(1.0, 0.5)]),
            trunc=TruncationPolicy(),
            model=StepLimit(1.0),
            speed=Constant(0.0),
            x0=-10.0,
            horizon=4.0,
            output_grid_step=1.0,
        )
        traj = Trajectory.from_path(x0=-10.0, horizon=4.0, jumps=[(2.0, 1.0)], speed=Constant(0.0))
        residual = martingale_residual(traj, sc)
        np.testing.assert_allclose(residual.values, [0.0, -0.5, 0.0, -0.5, -1.0], atol=1e-12)
        assert residual.terminal_time == 4.0
        assert len(residual) == 5

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "measure, v, x0",
        [
            (ExponentialDensity(1.0, 1.0), 2.0, 0.0),
            (ExponentialDensity(2.0, 1.0), 1.0, -10.0),
            (DiscreteAtoms([(1.0, 0.7)]), 0.7, -10.0),
        ],
        ids=["transient", "positive_recurrent", "boundary_atoms"],
    )
    def test_strong_law(self, measure, v, x0):
        sc = make_scenario(measure=measure, speed=Constant(v), x0=x0, horizon=2000.0)
        simulator = Simulator(sc)
        ratios = []
        for seed in range(50):
            traj = simulator.run(seed)
            ratios.append(abs(martingale_residual(traj, sc).terminal) / traj.end_time)
        assert np.mean(ratios) <= 0.05


class TestQuadraticVariation:
    def test_identity_on_simulated_paths(self):
        sc = make_scenario(x0=-3.0, horizon=100.0, speed=Constant(1.5))
        for seed in range(200):
            traj = simulate(sc, seed)
            scale = max(1.0, float(np.max(traj.knot_x_plus**2)), float(np.max(traj.knot_x_minus**2)))
            assert quadratic_variation_check(traj) <= 1e-9 * scale

    @pytest.mark.slow
    def test_identity_on_many_paths(self):
        sc = make_scenario(x0=-3.0, horizon=200.0, speed=Constant(1.5))
        for seed in range(1000):
            traj = simulate(sc, seed)
            scale = max(1.0, float(np.max(traj.knot_x_plus**2)), float(np.max(traj.knot_x_minus**2)))
            assert quadratic_variation_check(traj) <= 1e-9 * scale


class TestItoInequality:
    @pytest.fixture
    def path(self):
        return Trajectory.from_path(x0=-10.0, horizon=6.0, jumps=[(1.0, 2.0), (3.0, 1.0)], speed=Constant(0.5))

    @pytest.mark.parametrize("phi", [LogAbs(), PowerLyapunov(0.5)], ids=["log_abs", "power"])
    def test_holds_on_deterministic_path(self, path, phi):
        check = ito_inequality_check(path, phi)
        assert check.holds
        assert check.lower <= check.lhs <= check.upper
        assert check.n_jumps == 2

    def test_window_violation_for_log(self):
        crossing = Trajectory.from_path(x0=-1.0, horizon=3.0, jumps=[(1.0, 1.5)], speed=Constant(0.1))
        with pytest.raises(WindowViolation):
            ito_inequality_check(crossing, LogAbs())

    def test_negative_jump_rejected(self):
        path = Trajectory.from_path(x0=-5.0, horizon=3.0, jumps=[(1.0, -0.5)], speed=Constant(0.1))
        with pytest.raises(WindowViolation):
            ito_inequality_check(path, PowerLyapunov(0.3))

    def test_holds_on_simulated_paths(self):
        sc = make_scenario(measure=ExponentialDensity(2.0, 1.0), speed=Constant(1.0), x0=-200.0, horizon=20.0)
        for seed in range(50):
            check = ito_inequality_check(simulate(sc, seed), LogAbs())
            assert check.holds

    @pytest.mark.slow
    def test_holds_on_many_simulated_paths(self):
        sc = make_scenario(measure=ExponentialDensity(2.0, 1.0), speed=Constant(1.0), x0=-200.0, horizon=20.0)
        assert all(ito_inequality_check(simulate(sc, seed), LogAbs()).holds for seed in range(1000))

    def test_power_lyapunov_validation(self):
        with pytest.raises(ValueError):
            PowerLyapunov(1.5)


def test_envelope_violation_is_simulation_error():
    assert issubclass(EnvelopeViolation, SimulationError)
    assert issubclass(BudgetExceeded, SimulationError)
    assert KimuraExp(1.0).probability(-1.0, 3.0) == 0.0


class ConstantInsideEnvelope(FixationModel):
    """g = c в области фиксации; только для проверки прореживания."""

    kind = "constant_inside_envelope"

    def __init__(self, c: float):
        super().__init__(1.0)
        self.c = float(c)

    def ramp(self, u, a):
        return np.full(np.broadcast(np.asarray(u), np.asarray(a)).shape, self.c)

    def ramp_integral(self, big_u, a):
        return self.c * np.asarray(big_u) * np.ones_like(np.asarray(a, dtype=float))


class TestThinning:
    def test_fixed_count_is_poisson(self):
        # путь не выходит из x < -900, поэтому g(x, 1) = c на всем горизонте
        c, rate, horizon = 0.3, 2.0, 10.0
        sc = make_scenario(
            measure=DiscreteAtoms([(1.0, rate)]),
            model=ConstantInsideEnvelope(c),
            speed=Constant(10.0),
            x0=-1000.0,
            horizon=horizon,
        )
        simulator = Simulator(sc)
        counts = np.array([simulator.run(seed).n_fixed for seed in range(1000)])

        mean = c * rate * horizon
        edges = list(range(3, 11))
        observed = [np.sum(counts <= 2)] + [np.sum(counts == k) for k in edges] + [np.sum(counts >= 11)]
        probs = [stats.poisson.cdf(2, mean)] + [stats.poisson.pmf(k, mean) for k in edges] + [stats.poisson.sf(10, mean)]
        expected = 1000.0 * np.array(probs)
        assert stats.chisquare(observed, expected).pvalue > 1e-3


@pytest.mark.slow
def test_halving_epsilon_moves_mean_within_bias(small_jump_measure):
    eps, horizon = 0.01, 50.0
    finals = {}
    for cut in (eps, eps / 2.0):
        sc = make_scenario(measure=small_jump_measure, speed=Constant(3.0), horizon=horizon, epsilon=cut)
        simulator = Simulator(sc)
        finals[cut] = np.mean([simulator.run(seed).final_value for seed in range(50)])
    assert abs(finals[eps] - finals[eps / 2.0]) <= 2.0 * truncation_bias(small_jump_measure, eps) * horizon
