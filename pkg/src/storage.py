"""Запись результатов: CSV траекторий, JSONL событий, manifest, отчеты, gnuplot-скрипты."""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from loguru import logger

from .analysis import RegimeReport
from .exceptions import MixedScenarioError
from .simulator import Scenario, Trajectory
from .utils import json_safe

HASH_PREFIX = "# scenario_hash="

PathLike = Union[str, Path]


def trajectory_csv_name(seed: int) -> str:
    return f"trajectory_{seed}.csv"


def events_jsonl_name(seed: int) -> str:
    return f"events_{seed}.jsonl"


def _dump_json(path: Path, data: Any) -> Path:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(json_safe(data), f, ensure_ascii=False, indent=2)
    return path


def write_trajectory_csv(directory: PathLike, traj: Trajectory) -> Path:
    """Траектория на выходной сетке: строка-комментарий с хешем, затем `t,x`."""
    path = Path(directory) / trajectory_csv_name(traj.seed)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"{HASH_PREFIX}{traj.scenario_hash},seed={traj.seed}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["t", "x"])
        for t, x in traj.samples:
            writer.writerow([f"{t:.17g}", f"{x:.17g}"])
    return path


def write_events_jsonl(directory: PathLike, traj: Trajectory) -> Path:
    """Журнал событий: первая запись: заголовок, далее по записи на событие."""
    path = Path(directory) / events_jsonl_name(traj.seed)
    header = {
        "scenario_hash": traj.scenario_hash,
        "seed": traj.seed,
        "x0": traj.x0,
        "horizon": traj.horizon,
        "complete": traj.complete,
    }
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(header) + "\n")
        for event in traj.events:
            f.write(json.dumps(event._asdict()) + "\n")
    return path


def write_manifest(
    directory: PathLike,
    scenario: Scenario,
    seeds: Sequence[int],
    files: Iterable[Path],
    wall_time: float,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """manifest.json: хеш сценария, отсечка и ее смещение, время работы."""
    manifest = {
        "scenario_hash": scenario.scenario_hash(),
        "scenario": scenario.describe(),
        "epsilon": scenario.trunc.epsilon,
        "truncation_bias": scenario.trunc.bias_bound,
        "seeds": list(seeds),
        "files": sorted(Path(p).name for p in files),
        "wall_time_s": wall_time,
    }
    manifest.update(extra or {})
    return _dump_json(Path(directory) / "manifest.json", manifest)


def write_report(directory: PathLike, report: RegimeReport, scenario_hash: str, name: str = "report.json") -> Path:
    data = {"scenario_hash": scenario_hash, **report.to_dict()}
    return _dump_json(Path(directory) / name, data)


def write_evidence_csv(directory: PathLike, report: RegimeReport, scenario_hash: str) -> Path:
    """Значения всех проверенных условий на сетке x."""
    path = Path(directory) / "evidence.csv"
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"{HASH_PREFIX}{scenario_hash}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["condition", "x", "value"])
        for verdict in report.condition_evidence:
            for x, value in zip(verdict.grid, verdict.values):
                writer.writerow([verdict.id.value, f"{x:.17g}", f"{value:.17g}"])
    return path


def write_summary(directory: PathLike, summary: Dict[str, Any], name: str = "summary.json") -> Path:
    return _dump_json(Path(directory) / name, summary)


def write_seed_table(directory: PathLike, rows: List[Dict[str, Any]], scenario_hash: str) -> Path:
    """Потраекторная таблица ансамбля."""
    path = Path(directory) / "seeds.csv"
    columns = list(rows[0].keys()) if rows else ["seed"]
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"{HASH_PREFIX}{scenario_hash}\n")
        writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: f"{v:.17g}" if isinstance(v, float) else v for k, v in row.items()})
    return path


def write_survival_csv(directory: PathLike, durations: Sequence[float], survival: Sequence[float]) -> Path:
    path = Path(directory) / "return_survival.csv"
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["duration", "survival"])
        for d, s in zip(durations, survival):
            writer.writerow([f"{d:.17g}", f"{s:.17g}"])
    return path


def write_plot_script(directory: PathLike, trajectory_files: Sequence[Path], survival_file: Optional[Path] = None) -> Path:
    """
    gnuplot-скрипт: траектории X_t и, если есть, хвост времен возврата в log-log.

    Запуск: `gnuplot plot.gp` в каталоге результатов.
    """
    lines = [
        'set datafile separator ","',
        'set datafile commentschars "#"',
        "set key off",
        "set terminal pngcairo size 1000,600",
        'set output "trajectories.png"',
        'set xlabel "t"',
        'set ylabel "X_t"',
    ]
    series = [f'"{Path(p).name}" using 1:2 every ::1 with lines' for p in trajectory_files]
    if series:
        lines.append("plot " + ", \\\n     ".join(series))

    if survival_file is not None:
        lines += [
            'set output "return_survival.png"',
            "set logscale xy",
            'set xlabel "excursion length"',
            'set ylabel "P(length > t)"',
            f'plot "{Path(survival_file).name}" using 1:2 every ::1 with steps',
        ]

    path = Path(directory) / "plot.gp"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# --- чтение ---


def read_scenario_hash(path: PathLike) -> str:
    """Хеш сценария из CSV, JSONL или JSON-файла результатов."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        if path.suffix == ".json":
            return json.load(f)["scenario_hash"]
        first = f.readline().strip()

    if path.suffix == ".jsonl":
        return json.loads(first)["scenario_hash"]
    if not first.startswith(HASH_PREFIX):
        raise ValueError(f"{path}: нет строки с хешем сценария")
    return first[len(HASH_PREFIX):].split(",")[0]


def read_trajectory_csv(path: PathLike) -> List[List[float]]:
    """Строки (t, x) из CSV траектории."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = [row for row in csv.reader(line for line in f if not line.startswith("#"))]
    return [[float(t), float(x)] for t, x in rows[1:]]


def summarize(paths: Sequence[PathLike]) -> Dict[str, Any]:
    """
    Сводка по CSV-траекториям одного сценария.

    Raises:
        MixedScenarioError: Файлы относятся к разным сценариям
    """
    if not paths:
        raise ValueError("Нет файлов для сводки")
    hashes = {read_scenario_hash(p) for p in paths}
    if len(hashes) != 1:
        logger.error(f"Смешаны результаты {len(hashes)} сценариев")
        raise MixedScenarioError(f"Разные хеши сценариев: {sorted(hashes)}")

    slopes = []
    for p in paths:
        rows = read_trajectory_csv(p)
        (t0, x0), (t1, x1) = rows[0], rows[-1]
        if t1 > t0:
            slopes.append((x1 - x0) / (t1 - t0))
    return {
        "scenario_hash": hashes.pop(),
        "n_trajectories": len(paths),
        "mean_slope": math.fsum(slopes) / len(slopes) if slopes else math.nan,
    }
