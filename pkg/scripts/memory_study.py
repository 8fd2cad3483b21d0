#!/usr/bin/env python3
"""Context-memory sensitivity sweep.

Runs the same profile with memory_rounds 0, 1, and 2 over a chosen game
set and prints one row per setting: average input tokens, wall-clock
seconds per step, and overall progress.

Usage: python scripts/memory_study.py [--games lane-runner snake]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gamebench.agents import AgentProfile, MemoryConfig
from gamebench.registry import load_registry
from gamebench.rng import mix64
from gamebench.runtime import RunConfig, run_task


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--games", nargs="*", default=["lane-runner", "snake", "mini-mart"])
    parser.add_argument("--task", default="t01")
    parser.add_argument("--policy", default="oracle")
    args = parser.parse_args()

    registry = load_registry()
    print(f"{'rounds':>6s} {'model':>14s} {'input tokens':>13s} {'sec/step':>9s} {'PG':>6s}")
    for rounds in (0, 1, 2):
        profile = AgentProfile(
            agent_id=f"{args.policy}-mem{rounds}",
            interface_kind="generalist", output_format_kind="scripted",
            policy=args.policy,
            memory=MemoryConfig(
                memory_rounds=rounds, memory_format="text_only",
                memory_include_fields=("user_prompt", "reasoning", "action"),
            ),
        )
        tokens, latencies, progress = [], [], []
        for game_id in args.games:
            task = registry.task(game_id, args.task)
            record = run_task(RunConfig(
                game=registry.game(game_id), task=task, profile=profile,
                seed=mix64(task.seed, 0), session_id=f"mem{rounds}-{game_id}",
            ))
            tokens.extend(record.input_tokens)
            latencies.extend(record.latencies_ms)
            progress.append(record.run_progress)
        print(f"{rounds:>6d} {profile.agent_id:>14s} "
              f"{sum(tokens) / len(tokens):>13.1f} "
              f"{sum(latencies) / len(latencies) / 1000.0:>9.3f} "
              f"{sum(progress) / len(progress):>6.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
