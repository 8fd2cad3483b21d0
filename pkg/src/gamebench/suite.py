"""Suite runner: preset parsing, expansion into repeat waves, bounded
parallel execution, and aggregation into summary reports.

A preset composes one run as ``<game_id>+<task_id>+<model_spec>``. A suite
file enumerates cases (games x tasks x models); expansion is deterministic
(case order, then game, task, profile, repeat) and grouped into repeat
waves: wave k holds the k-th repeat of every expanded run. Runs are fully
isolated; a failure in one never aborts its siblings. Every aggregate is
recomputable from the persisted run records alone.
"""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping

import yaml

from .evaluator import ABORTED, RUNNING, RunRecord, aggregate_metrics, compute_iar
from .controls import ValidityCounters
from .registry import Registry
from .rng import mix64
from .runtime import RunConfig, run_task
from .state import canonical_json

DEFAULT_PORT_BASE = 8600


class MalformedPresetError(ValueError):
    pass


@dataclass(frozen=True)
class Preset:
    game_id: str
    task_id: str
    model_spec: str


def parse_preset(text: str, registry: Registry | None = None) -> Preset:
    """Parse ``<game_id>+<task_id>+<model_spec>``; resolve against registries."""
    parts = text.split("+")
    if len(parts) != 3 or not all(parts):
        raise MalformedPresetError(
            f"preset must be <game_id>+<task_id>+<model_spec>, got {text!r}"
        )
    preset = Preset(game_id=parts[0], task_id=parts[1], model_spec=parts[2])
    if registry is not None:
        registry.task(preset.game_id, preset.task_id)  # raises unknown-game/-task
        registry.profile(preset.model_spec)
    return preset


@dataclass(frozen=True)
class SuiteCase:
    games: tuple[str, ...]
    tasks: tuple[str, ...]
    profiles: tuple[str, ...]


@dataclass(frozen=True)
class SuitePlan:
    cases: tuple[SuiteCase, ...]
    repeats: int = 1
    max_parallel: int = 1
    mode: str = "paused"

    @classmethod
    def from_file(cls, path: Path, repeats: int | None = None,
                  max_parallel: int | None = None, mode: str | None = None) -> "SuitePlan":
        data = yaml.safe_load(path.read_text())
        cases = tuple(
            SuiteCase(
                games=tuple(case["games"]),
                tasks=tuple(case["tasks"]),
                profiles=tuple(case.get("models", case.get("profiles", ()))),
            )
            for case in data.get("cases", ())
        )
        return cls(
            cases=cases,
            repeats=repeats if repeats is not None else int(data.get("repeats", 1)),
            max_parallel=max_parallel if max_parallel is not None else int(data.get("max_parallel", 1)),
            mode=mode if mode is not None else data.get("mode", "paused"),
        )


def expand_suite(plan: SuitePlan, registry: Registry, base_dir: Path,
                 port_base: int = DEFAULT_PORT_BASE) -> list[list[RunConfig]]:
    """Expand a plan into repeat waves of fully resolved run configs.

    Repeat r of a task derives its game seed as ``mix64(task_seed, r)``,
    so repeats sample both agent and environment draws.
    """
    waves: list[list[RunConfig]] = []
    run_index = 0
    for repeat in range(plan.repeats):
        wave: list[RunConfig] = []
        for case in plan.cases:
            for game_id in case.games:
                bundle = registry.game(game_id)
                for task_id in case.tasks:
                    task = registry.task(game_id, task_id)
                    for profile_id in case.profiles:
                        profile = registry.profile(profile_id)
                        session_id = f"{game_id}+{task_id}+{profile_id}#r{repeat}"
                        run_dir = base_dir / f"run_{run_index:04d}__{game_id}+{task_id}+{profile_id}__r{repeat}"
                        wave.append(RunConfig(
                            game=bundle,
                            task=task,
                            profile=profile,
                            seed=mix64(task.seed, repeat),
                            mode=plan.mode,
                            session_id=session_id,
                            run_dir=run_dir,
                            port=port_base + run_index,
                            repeat_index=repeat,
                        ))
                        run_index += 1
        waves.append(wave)
    return waves


def execute(plan: SuitePlan, registry: Registry, base_dir: Path,
            port_base: int = DEFAULT_PORT_BASE) -> list[RunRecord]:
    """Run every wave with bounded parallelism; waves never overlap."""
    base_dir.mkdir(parents=True, exist_ok=True)
    records: list[RunRecord] = []
    for wave in expand_suite(plan, registry, base_dir, port_base):
        with ThreadPoolExecutor(max_workers=max(1, plan.max_parallel)) as pool:
            futures = [(cfg, pool.submit(_run_isolated, cfg)) for cfg in wave]
            for cfg, future in futures:
                records.append(future.result())
    return records


def _run_isolated(cfg: RunConfig) -> RunRecord:
    try:
        return run_task(cfg)
    except Exception as exc:  # a crashed run must not abort its siblings
        record = RunRecord(
            run_id=cfg.session_id,
            game_id=cfg.task.game_id,
            task_id=cfg.task.task_id,
            profile_id=cfg.profile.agent_id,
            seed=cfg.seed,
            genre=cfg.task.genre,
            curriculum_level=cfg.task.curriculum_level,
            mode=cfg.mode,
            repeat_index=cfg.repeat_index,
        )
        record.status = ABORTED
        record.error = f"{type(exc).__name__}: {exc}"
        record.started_at = record.finished_at = time.time()
        if cfg.run_dir is not None:
            cfg.run_dir.mkdir(parents=True, exist_ok=True)
            (cfg.run_dir / "run_record.json").write_text(canonical_json(record.to_doc()) + "\n")
        return record


# -- aggregation -------------------------------------------------------------

def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _pstdev(values: list[float]) -> float:
    return statistics.pstdev(values) if len(values) > 1 else 0.0


def aggregate(records: Iterable[RunRecord]) -> dict[str, Any]:
    """Build the summary report from finished records.

    Pure function of the records' deterministic fields, so re-running it
    over persisted records reproduces the report byte-for-byte.
    """
    all_records = list(records)
    scored = [r for r in all_records if r.status not in (RUNNING, ABORTED)]
    excluded = [r for r in all_records if r.status in (RUNNING, ABORTED)]
    if not scored:
        raise ValueError("no scored records to aggregate")

    report: dict[str, Any] = {"profiles": {}, "excludedRuns": sorted(r.run_id for r in excluded)}
    for profile_id in sorted({r.profile_id for r in scored}):
        mine = [r for r in scored if r.profile_id == profile_id]
        overall = aggregate_metrics(mine)
        by_genre = {}
        for genre in sorted({r.genre for r in mine}):
            sub = aggregate_metrics([r for r in mine if r.genre == genre])
            by_genre[genre] = {"SR": sub["SR"], "PG": sub["PG"], "N": sub["N"]}
        by_game = {}
        for game_id in sorted({r.game_id for r in mine}):
            progresses = [r.run_progress for r in mine if r.game_id == game_id]
            by_game[game_id] = {
                "meanPG": _mean(progresses),
                "stdPG": _pstdev(progresses),
                "N": len(progresses),
            }
        by_level = {}
        for level in sorted({r.curriculum_level for r in mine}):
            progresses = [r.run_progress for r in mine if r.curriculum_level == level]
            by_level[str(level)] = {"meanPG": _mean(progresses), "N": len(progresses)}
        repeats = sorted({r.repeat_index for r in mine})
        per_repeat = []
        for repeat in repeats:
            sub = aggregate_metrics([r for r in mine if r.repeat_index == repeat])
            per_repeat.append({"repeat": repeat, "SR": sub["SR"], "PG": sub["PG"], "N": sub["N"]})
        repeat_sr = [row["SR"] for row in per_repeat]
        repeat_pg = [row["PG"] for row in per_repeat]
        counters = ValidityCounters()
        for r in mine:
            counters.proposed += r.validity.proposed
            counters.valid += r.validity.valid
            counters.ntc += r.validity.ntc
            counters.oos += r.validity.oos
        validity = compute_iar(counters) if counters.proposed else {"IAR": 0.0, "NTC_rate": 0.0, "OOS_rate": 0.0}
        latencies = [x for r in mine for x in r.latencies_ms]
        tokens = [x for r in mine for x in r.input_tokens]
        report["profiles"][profile_id] = {
            "overall": overall,
            "byGenre": by_genre,
            "byGame": by_game,
            "byLevel": by_level,
            "perRepeat": per_repeat,
            "repeatStats": {
                "meanSR": _mean(repeat_sr),
                "stdSR": _pstdev(repeat_sr),
                "meanPG": _mean(repeat_pg),
                "stdPG": _pstdev(repeat_pg),
                "repeats": len(per_repeat),
            },
            "validity": {
                "IAR": validity["IAR"],
                "NTC": validity["NTC_rate"],
                "OOS": validity["OOS_rate"],
                "proposed": counters.proposed,
            },
            "meanInputTokens": _mean([float(t) for t in tokens]) if tokens else 0.0,
            "secPerStep": _mean(latencies) / 1000.0 if latencies else 0.0,
        }
    report["ranking"] = rank_profiles(report["profiles"])
    return report


def rank_profiles(profiles: Mapping[str, Mapping[str, Any]]) -> list[str]:
    """Rank by overall PG, ties broken by overall SR, then profile id."""
    return [
        pid for pid, _ in sorted(
            profiles.items(),
            key=lambda kv: (-kv[1]["overall"]["PG"], -kv[1]["overall"]["SR"], kv[0]),
        )
    ]


def emit_reports(report: Mapping[str, Any], out_dir: Path) -> tuple[Path, Path]:
    """Write the canonical JSON summary and a plain-text leaderboard."""
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(canonical_json(report) + "\n")
    board_path = out_dir / "leaderboard.txt"
    board_path.write_text(render_leaderboard(report))
    return summary_path, board_path


def render_leaderboard(report: Mapping[str, Any]) -> str:
    profiles = report["profiles"]
    genres = sorted({g for p in profiles.values() for g in p["byGenre"]})
    header = ["rank", "profile"]
    for genre in genres:
        header.extend([f"{genre} SR", f"{genre} PG"])
    header.extend(["overall SR", "overall PG"])
    rows = [header]
    for rank, pid in enumerate(report["ranking"], start=1):
        p = profiles[pid]
        row = [str(rank), pid]
        for genre in genres:
            cell = p["byGenre"].get(genre)
            row.extend(["-" if cell is None else f"{100 * cell['SR']:.1f}",
                        "-" if cell is None else f"{100 * cell['PG']:.1f}"])
        row.extend([f"{100 * p['overall']['SR']:.1f}", f"{100 * p['overall']['PG']:.1f}"])
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = []
    for idx, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if idx == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def load_records(runs_dir: Path) -> list[RunRecord]:
    """Re-read every persisted run record under a suite directory."""
    import json

    records = []
    for record_path in sorted(runs_dir.glob("*/run_record.json")):
        records.append(RunRecord.from_doc(json.loads(record_path.read_text())))
    return records
