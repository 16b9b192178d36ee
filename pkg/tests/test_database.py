"""Тесты базы результатов."""

import pytest

from src.database import ResultsStore


def test_requires_url():
    with pytest.raises(ValueError):
        ResultsStore()


def test_add_and_query_run(test_store):
    rows = [
        {"seed": 2**63 + 5, "final_x": -10.5, "slope": -1.05, "n_events": 12, "n_fixed": 4, "status": "ok"},
        {"seed": 7, "status": "budget-exceeded"},
    ]
    run_id = test_store.add_run(
        scenario_hash="f" * 64,
        command="ensemble",
        scenario={"x0": 0.0},
        summary={"slope": {"mean": -1.05}},
        seed_rows=rows,
        wall_time_s=1.5,
    )

    runs = test_store.get_runs("f" * 64)
    assert [r.id for r in runs] == [run_id]
    assert runs[0].summary["slope"]["mean"] == -1.05
    assert runs[0].command == "ensemble"

    seeds = test_store.get_seed_results(run_id)
    assert [s.seed for s in seeds] == [str(2**63 + 5), "7"]
    assert seeds[0].complete and not seeds[1].complete
    assert seeds[0].n_fixed == 4


def test_runs_filtered_by_hash(test_store):
    test_store.add_run("a" * 64, "simulate", {}, {})
    test_store.add_run("b" * 64, "simulate", {}, {})
    assert len(test_store.get_runs("a" * 64)) == 1
    assert test_store.get_runs("c" * 64) == []
