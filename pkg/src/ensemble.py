"""Ансамбль траекторий: независимые потоки случайных чисел и пул процессов."""

import concurrent.futures
import multiprocessing
import os
from concurrent.futures.process import BrokenProcessPool
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .exceptions import BudgetExceeded
from .simulator import Scenario, Simulator, Trajectory


def derive_seeds(master_seed: int, n: int) -> List[int]:
    """n независимых 64-битных seed из главного seed (numpy SeedSequence)."""
    if n < 1:
        raise ValueError("Число seed должно быть >= 1")
    state = np.random.SeedSequence(master_seed).generate_state(n, dtype=np.uint64)
    return [int(s) for s in state]


@dataclass
class SeedFailure:
    """Траектория, прерванная по лимиту событий."""

    seed: int
    message: str
    partial: Optional[Trajectory] = None


@dataclass
class EnsembleResult:
    """Результаты в порядке seed, независимо от порядка завершения."""

    seeds: List[int]
    trajectories: List[Trajectory] = field(default_factory=list)
    failures: List[SeedFailure] = field(default_factory=list)
    workers_used: int = 1

    @property
    def partial_failure(self) -> bool:
        return bool(self.failures)


_worker_simulator: Optional[Simulator] = None


def _init_worker(scenario: Scenario) -> None:
    global _worker_simulator
    _worker_simulator = Simulator(scenario)


def _run_seed(simulator: Simulator, index: int, seed: int) -> Tuple[int, object]:
    try:
        return index, simulator.run(seed)
    except BudgetExceeded as e:
        return index, SeedFailure(seed=seed, message=str(e), partial=e.trajectory)


def _run_seed_in_worker(task: Tuple[int, int]) -> Tuple[int, object]:
    index, seed = task
    return _run_seed(_worker_simulator, index, seed)


def _start_method() -> str:
    methods = multiprocessing.get_all_start_methods()
    if os.name == "posix" and "fork" in methods:
        return "fork"
    return "spawn" if "spawn" in methods else methods[0]


def _collect_single(simulator: Simulator, seeds: Sequence[int]) -> List[object]:
    return [_run_seed(simulator, i, seed)[1] for i, seed in enumerate(seeds)]


def _collect_parallel(scenario: Scenario, seeds: Sequence[int], workers: int) -> List[object]:
    results = {}
    context = multiprocessing.get_context(_start_method())
    with concurrent.futures.ProcessPoolExecutor(
        max_workers=workers,
        mp_context=context,
        initializer=_init_worker,
        initargs=(scenario,),
    ) as executor:
        futures = [executor.submit(_run_seed_in_worker, (i, seed)) for i, seed in enumerate(seeds)]
        for future in concurrent.futures.as_completed(futures):
            index, outcome = future.result()
            results[index] = outcome
    return [results[i] for i in sorted(results)]


def run_ensemble(scenario: Scenario, seeds: Sequence[int], workers: int = 1) -> EnsembleResult:
    """
    Моделирует по траектории на каждый seed.

    Args:
        scenario: Сценарий
        seeds: Список seed (порядок сохраняется в результате)
        workers: Размер пула процессов; 1: в текущем процессе
    """
    seeds = list(seeds)
    simulator = Simulator(scenario)
    workers_used = max(1, min(workers, len(seeds)))

    if workers_used > 1:
        try:
            outcomes = _collect_parallel(scenario, seeds, workers_used)
        except (OSError, NotImplementedError, BrokenProcessPool) as e:
            logger.warning(f"Пул процессов недоступен ({e}); выполнение в одном процессе")
            workers_used = 1
            outcomes = _collect_single(simulator, seeds)
    else:
        outcomes = _collect_single(simulator, seeds)

    result = EnsembleResult(seeds=seeds, workers_used=workers_used)
    for outcome in outcomes:
        if isinstance(outcome, SeedFailure):
            result.failures.append(outcome)
        else:
            result.trajectories.append(outcome)

    if result.failures:
        logger.warning(f"{len(result.failures)} из {len(seeds)} траекторий прерваны по лимиту событий")
    logger.info(f"Ансамбль: {len(result.trajectories)} траекторий, workers={workers_used}")
    return result
