"""``bench`` command line: run, suite, report, serve."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .agents import AgentProfile, MemoryConfig
from .registry import load_registry
from .runtime import RunConfig, run_task
from .service import HumanBridge, SessionService
from .state import canonical_json
from .suite import (
    SuitePlan,
    aggregate,
    emit_reports,
    execute,
    load_records,
    parse_preset,
)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="bench", description="Game-agent benchmark runner")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a single preset")
    run_p.add_argument("--config", required=True, help="<game_id>+<task_id>+<model_spec>")
    run_p.add_argument("--mode", choices=("paused", "rt"), default="paused")
    run_p.add_argument("--seed", type=int, default=None, help="override the task seed")
    run_p.add_argument("--run-dir", type=Path, default=None)
    run_p.add_argument("--log-frames", action="store_true")

    suite_p = sub.add_parser("suite", help="expand and execute a suite file")
    suite_p.add_argument("--file", required=True, type=Path)
    suite_p.add_argument("--max-parallel", type=int, default=None)
    suite_p.add_argument("--repeats", type=int, default=None)
    suite_p.add_argument("--mode", choices=("paused", "rt"), default=None)
    suite_p.add_argument("--out", type=Path, default=Path("suite_runs"))

    report_p = sub.add_parser("report", help="re-aggregate persisted run records")
    report_p.add_argument("--runs", required=True, type=Path)

    serve_p = sub.add_parser("serve", help="serve one session over HTTP")
    serve_p.add_argument("--config", required=True)
    serve_p.add_argument("--port", type=int, default=8600, help="0 picks a free port")
    serve_p.add_argument("--human", action="store_true",
                         help="accept human input via POST /action")
    serve_p.add_argument("--seed", type=int, default=None)
    serve_p.add_argument("--linger", type=float, default=5.0,
                         help="seconds to keep serving after the run ends")

    args = parser.parse_args(argv)
    registry = load_registry()

    if args.command == "run":
        preset = parse_preset(args.config, registry)
        task = registry.task(preset.game_id, preset.task_id)
        cfg = RunConfig(
            game=registry.game(preset.game_id),
            task=task,
            profile=registry.profile(preset.model_spec),
            seed=args.seed if args.seed is not None else task.seed,
            mode="real_time" if args.mode == "rt" else "paused",
            session_id=args.config,
            run_dir=args.run_dir,
            log_frames=args.log_frames,
        )
        record = run_task(cfg)
        print(canonical_json(record.to_doc()))
        return 0

    if args.command == "suite":
        plan = SuitePlan.from_file(
            args.file, repeats=args.repeats, max_parallel=args.max_parallel,
            mode={"rt": "real_time", "paused": "paused", None: None}[args.mode],
        )
        records = execute(plan, registry, args.out)
        report = aggregate(records)
        summary_path, board_path = emit_reports(report, args.out)
        print(board_path.read_text())
        print(f"summary: {summary_path}")
        return 0

    if args.command == "report":
        records = load_records(args.runs)
        report = aggregate(records)
        summary_path, board_path = emit_reports(report, args.runs)
        print(board_path.read_text())
        print(f"summary: {summary_path}")
        return 0

    if args.command == "serve":
        return _serve(registry, args)

    return 2


def _serve(registry, args) -> int:
    preset = parse_preset(args.config, registry)
    task = registry.task(preset.game_id, preset.task_id)
    bridge = HumanBridge() if args.human else None
    service = SessionService(port=args.port, human=bridge).start()
    service.set_task({
        "instruction": task.instruction,
        "maxSteps": task.max_steps,
        "targetScore": task.target_score,
        "startScore": task.start_score,
        "gameId": task.game_id,
        "taskId": task.task_id,
    })
    if args.human:
        profile = AgentProfile(
            agent_id="human",
            interface_kind="computer_use",
            output_format_kind="scripted",
            policy="human",
            memory=MemoryConfig(memory_rounds=0),
        )
        decide_override = bridge.decide
    else:
        profile = registry.profile(preset.model_spec)
        decide_override = None
    cfg = RunConfig(
        game=registry.game(preset.game_id),
        task=task,
        profile=profile,
        seed=args.seed if args.seed is not None else task.seed,
        session_id=args.config,
        port=service.port,
    )
    print(f"serving {args.config} on {service.address} (human={bool(args.human)})", flush=True)
    try:
        record = run_task(cfg, on_step=service.publish, decide_override=decide_override)
        print(canonical_json(record.to_doc()), flush=True)
        if args.linger > 0:
            import time as _time

            _time.sleep(args.linger)  # let clients read the final state
    finally:
        service.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
