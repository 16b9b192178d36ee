"""Тесты ансамблевого запуска."""

import numpy as np
import pytest

from src.ensemble import EnsembleResult, SeedFailure, derive_seeds, run_ensemble
from src.speed import Constant

from .conftest import make_scenario


class TestDeriveSeeds:
    def test_reproducible_and_distinct(self):
        seeds = derive_seeds(12345, 8)
        assert seeds == derive_seeds(12345, 8)
        assert len(set(seeds)) == 8
        assert all(0 <= s < 2**64 for s in seeds)

    def test_prefix_stable(self):
        assert derive_seeds(7, 10)[:3] == derive_seeds(7, 3)

    def test_master_seed_matters(self):
        assert derive_seeds(1, 4) != derive_seeds(2, 4)

    def test_requires_positive_count(self):
        with pytest.raises(ValueError):
            derive_seeds(0, 0)


class TestRunEnsemble:
    def test_results_follow_seed_order(self):
        sc = make_scenario(horizon=50.0)
        seeds = derive_seeds(3, 4)
        result = run_ensemble(sc, seeds)
        assert isinstance(result, EnsembleResult)
        assert [traj.seed for traj in result.trajectories] == seeds
        assert not result.partial_failure
        assert result.workers_used == 1

    def test_parallel_matches_single_process(self):
        sc = make_scenario(horizon=50.0, speed=Constant(1.5))
        seeds = derive_seeds(11, 6)
        single = run_ensemble(sc, seeds, workers=1)
        parallel = run_ensemble(sc, seeds, workers=2)
        assert len(parallel.trajectories) == len(single.trajectories) == 6
        for a, b in zip(single.trajectories, parallel.trajectories):
            assert a.seed == b.seed
            assert np.array_equal(a.event_t, b.event_t)
            assert np.array_equal(a.sample_x, b.sample_x)

    def test_workers_capped_by_seed_count(self):
        result = run_ensemble(make_scenario(horizon=5.0), [1], workers=8)
        assert result.workers_used == 1

    def test_budget_failures_are_collected(self):
        sc = make_scenario(horizon=1000.0, event_cap=3)
        result = run_ensemble(sc, [1, 2, 3])
        assert result.partial_failure
        assert result.trajectories == []
        assert [f.seed for f in result.failures] == [1, 2, 3]
        failure = result.failures[0]
        assert isinstance(failure, SeedFailure)
        assert failure.partial is not None and not failure.partial.complete

    def test_falls_back_when_pool_unavailable(self, mocker):
        mocker.patch("src.ensemble._collect_parallel", side_effect=OSError("no semaphores"))
        sc = make_scenario(horizon=20.0)
        seeds = derive_seeds(5, 3)
        result = run_ensemble(sc, seeds, workers=3)
        assert result.workers_used == 1
        assert [traj.seed for traj in result.trajectories] == seeds
