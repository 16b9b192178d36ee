"""
Командная строка: simulate | classify | ensemble | sweep.

Коды выхода: 0: успех, 1: ошибка конфигурации, 2: режим не определен,
3: часть траекторий прервана по лимиту событий.
"""

import argparse
import math
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from loguru import logger

from .analysis import RegimeReport, Verdict, below_intervals, classify, estimate_speed, return_time_stats
from .config import settings
from .database import ResultsStore
from .ensemble import EnsembleResult, run_ensemble
from .exceptions import ConfigError, LagSimError
from .scenario import RunConfig, load_config
from .simulator import Scenario, martingale_residual
from .storage import (
    summarize,
    write_evidence_csv,
    write_events_jsonl,
    write_manifest,
    write_plot_script,
    write_report,
    write_seed_table,
    write_summary,
    write_survival_csv,
    write_trajectory_csv,
)
from .utils import format_number, format_report, format_table, json_safe, setup_logging

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_UNDETERMINED = 2
EXIT_PARTIAL = 3


def _output_dir(config: RunConfig, override: Optional[str]) -> Path:
    directory = Path(override) if override else config.output_dir
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"каталог недоступен для записи: {e}", key="outputs.directory") from e
    return directory


def _wants_report(config: RunConfig) -> bool:
    return "json-report" in config.outputs.formats


def _write_trajectories(config: RunConfig, directory: Path, result: EnsembleResult) -> List[Path]:
    files: List[Path] = []
    formats = config.outputs.formats
    for traj in result.trajectories:
        if "csv" in formats:
            files.append(write_trajectory_csv(directory, traj))
        if "jsonl" in formats:
            files.append(write_events_jsonl(directory, traj))
    return files


def _failures(result: EnsembleResult) -> List[Dict[str, Any]]:
    return [{"seed": f.seed, "message": f.message} for f in result.failures]


def _store(command: str, scenario: Scenario, summary: Dict[str, Any], rows: Sequence[Dict[str, Any]], wall: float):
    if not settings.results_db_url:
        return
    store = ResultsStore()
    store.create_tables()
    store.add_run(scenario.scenario_hash(), command, scenario.describe(), json_safe(summary), list(rows), wall)


# --- команды ---


def cmd_simulate(config: RunConfig, seeds: Optional[int] = None, out: Optional[str] = None) -> int:
    """Траектории и журналы событий по каждому seed плюс manifest.json."""
    scenario = config.build_scenario()
    directory = _output_dir(config, out)
    seed_list = config.seed_list(seeds)

    started = time.perf_counter()
    result = run_ensemble(scenario, seed_list, config.workers)
    files = _write_trajectories(config, directory, result)
    if config.outputs.emit_plot_script:
        files.append(write_plot_script(directory, [f for f in files if f.suffix == ".csv"]))
    wall = time.perf_counter() - started

    write_manifest(directory, scenario, seed_list, files, wall, extra={"failures": _failures(result)})
    logger.success(f"simulate: {len(result.trajectories)} траекторий записаны в {directory}")
    return EXIT_PARTIAL if result.partial_failure else EXIT_OK


def cmd_classify(config: RunConfig, out: Optional[str] = None) -> int:
    """Вердикт о режиме: report.json, таблица условий и сводка в stdout."""
    scenario = config.build_scenario()
    directory = _output_dir(config, out)

    report = classify(scenario.functionals(), scenario.speed)
    if _wants_report(config):
        scenario_hash = scenario.scenario_hash()
        write_report(directory, report, scenario_hash)
        if report.condition_evidence:
            write_evidence_csv(directory, report, scenario_hash)

    print(format_report(report))
    logger.success(f"classify: {report.verdict.value}")
    return EXIT_OK if report.decided else EXIT_UNDETERMINED


def _seed_rows(result: EnsembleResult, scenario: Scenario, level: float) -> List[Dict[str, Any]]:
    rows = []
    for traj in result.trajectories:
        residual = martingale_residual(traj, scenario)
        rows.append(
            {
                "seed": traj.seed,
                "final_x": traj.final_value,
                "slope": (traj.final_value - traj.x0) / traj.end_time,
                "martingale_terminal": residual.terminal,
                "n_events": traj.n_events,
                "n_fixed": traj.n_fixed,
                "returns": sum(1 for _, end in below_intervals(traj, level) if end is not None),
                "status": "ok",
            }
        )
    for failure in result.failures:
        rows.append({"seed": failure.seed, "status": "budget-exceeded"})
    return rows


def cmd_ensemble(config: RunConfig, seeds: Optional[int] = None, out: Optional[str] = None) -> int:
    """Наклон, |M_T/T| и экскурсии по ансамблю; summary.json и seeds.csv."""
    seed_list = config.seed_list(seeds)
    if len(seed_list) < 2:
        raise ConfigError("для ансамбля нужно не менее двух seed", key="run.seeds")
    scenario = config.build_scenario()
    directory = _output_dir(config, out)
    level = config.run.return_level

    started = time.perf_counter()
    result = run_ensemble(scenario, seed_list, config.workers)
    files = _write_trajectories(config, directory, result)
    rows = _seed_rows(result, scenario, level)

    completed = result.trajectories
    summary: Dict[str, Any] = {
        "scenario_hash": scenario.scenario_hash(),
        "n_seeds": len(seed_list),
        "n_completed": len(completed),
        "failures": _failures(result),
    }
    csv_files = [f for f in files if f.name.startswith("trajectory_")]
    if csv_files:
        grid = summarize(csv_files)
        summary["grid"] = {"n_trajectories": grid["n_trajectories"], "mean_slope": grid["mean_slope"]}
    if len(completed) >= 2:
        speed = estimate_speed(completed, config.run.confidence)
        summary["slope"] = {
            "mean": speed.mean,
            "ci_low": speed.ci_low,
            "ci_high": speed.ci_high,
            "confidence": speed.confidence,
        }
    if completed:
        residuals = [abs(row["martingale_terminal"]) / traj.end_time for row, traj in zip(rows, completed)]
        summary["martingale_over_t_mean"] = math.fsum(residuals) / len(residuals)

        returns = return_time_stats(completed, level)
        summary["returns"] = {
            "level": level,
            "completed": returns.completed,
            "censored": returns.censored,
            "mean": returns.mean,
            "median": returns.median,
            "returns_per_path": returns.returns_per_path,
        }
        if config.outputs.emit_plot_script:
            survival = write_survival_csv(directory, *returns.survival()) if returns.durations else None
            files.append(write_plot_script(directory, [f for f in files if f.suffix == ".csv"], survival))

    files.append(write_seed_table(directory, rows, scenario.scenario_hash()))
    if _wants_report(config):
        files.append(write_summary(directory, summary))
    wall = time.perf_counter() - started
    write_manifest(directory, scenario, seed_list, files, wall, extra={"failures": summary["failures"]})

    _store("ensemble", scenario, summary, rows, wall)

    table_rows = [
        [row["seed"], row.get("slope", "-"), row.get("martingale_terminal", "-"), row.get("returns", "-"), row["status"]]
        for row in rows
    ]
    print(format_table(["seed", "slope", "M_T", "returns", "status"], table_rows))
    if "slope" in summary:
        s = summary["slope"]
        print(f"slope {format_number(s['mean'])} [{format_number(s['ci_low'])}, {format_number(s['ci_high'])}]")

    logger.success(f"ensemble: {len(completed)}/{len(seed_list)} траекторий")
    return EXIT_PARTIAL if result.partial_failure else EXIT_OK


def cmd_sweep(config: RunConfig, speeds: Optional[Sequence[float]] = None, out: Optional[str] = None) -> int:
    """Классификация для ряда постоянных скоростей v."""
    speeds = list(speeds) if speeds else config.run.sweep_speeds
    if not speeds:
        raise ConfigError("не задан список скоростей (--speeds или run.sweep_speeds)", key="run.sweep_speeds")
    directory = _output_dir(config, out)

    entries = []
    reports: List[RegimeReport] = []
    for v in speeds:
        scenario = config.with_speed(v).build_scenario()
        report = classify(scenario.functionals(), scenario.speed)
        reports.append(report)
        entries.append({"v": v, "scenario_hash": scenario.scenario_hash(), **report.to_dict()})

    if _wants_report(config):
        write_summary(directory, {"sweep": entries}, name="sweep.json")
    print(
        format_table(
            ["v", "m", "verdict", "speed"],
            [[float(v), r.m, r.verdict.value, r.speed if r.speed is not None else "-"] for v, r in zip(speeds, reports)],
        )
    )
    logger.success(f"sweep: {len(speeds)} скоростей")
    undetermined = any(r.verdict == Verdict.BOUNDARY_UNDETERMINED for r in reports)
    return EXIT_UNDETERMINED if undetermined else EXIT_OK


# --- разбор аргументов ---


def _speed_list(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"ожидается список чисел через запятую: {text}") from e
    if not values or any(v < 0.0 for v in values):
        raise argparse.ArgumentTypeError("скорости должны быть неотрицательными")
    return values


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("ожидается целое >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lagsim", description="Моделирование отставания от движущегося оптимума")
    parser.add_argument("--log-level", default=None, help="Уровень консольного лога (по умолчанию LAGSIM_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("simulate", "траектории и журналы событий"),
        ("classify", "вердикт о режиме"),
        ("ensemble", "ансамблевые оценки"),
        ("sweep", "классификация по ряду скоростей"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="YAML-файл сценария")
        cmd.add_argument("--out", default=None, help="Каталог результатов (по умолчанию LAGSIM_OUTPUT_DIR)")
        if name in ("simulate", "ensemble"):
            cmd.add_argument("--seeds", type=_positive_int, default=None, help="Число seed из master_seed")
        if name == "sweep":
            cmd.add_argument("--speeds", type=_speed_list, default=None, help="v1,v2,...")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging("lagsim.log", args.log_level)
    logger.info(f"Команда {args.command}: {args.config}")

    try:
        config = load_config(args.config)
        if args.command == "simulate":
            return cmd_simulate(config, args.seeds, args.out)
        if args.command == "classify":
            return cmd_classify(config, args.out)
        if args.command == "ensemble":
            return cmd_ensemble(config, args.seeds, args.out)
        return cmd_sweep(config, args.speeds, args.out)
    except ConfigError as e:
        logger.error(f"Ошибка конфигурации: {e}")
        return EXIT_CONFIG
    except LagSimError as e:
        logger.error(f"Ошибка выполнения: {e}")
        return EXIT_CONFIG
