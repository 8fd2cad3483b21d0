#!/usr/bin/env python3
"""Task calibration sweep.

Runs the oracle and the seeded random agent over every bundled task for
the ten repeat-derived seeds and prints, per task, the oracle's success
rate and worst progress next to the random agent's mean progress. Used
to pick target scores with real margin: the easy task of every game must
show oracle SR=1.0 and a random-agent progress gap of at least 0.2.

Usage: python scripts/calibrate_tasks.py [--repeats N] [--tasks t01]
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gamebench.registry import load_registry
from gamebench.rng import mix64
from gamebench.runtime import RunConfig, run_task


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=10)
    parser.add_argument("--tasks", nargs="*", default=None)
    parser.add_argument("--games", nargs="*", default=None)
    args = parser.parse_args()

    registry = load_registry()
    started = time.time()
    print(f"{'task':26s} {'oracle SR':>9s} {'oracle minPG':>12s} {'oracle steps':>12s} "
          f"{'random meanPG':>13s} {'gap':>6s}")
    for game_id in sorted(registry.games):
        if args.games and game_id not in args.games:
            continue
        bundle = registry.game(game_id)
        for task_id in sorted(bundle.tasks):
            if args.tasks and task_id not in args.tasks:
                continue
            task = bundle.tasks[task_id]
            rows = {}
            for profile_id in ("oracle", "random"):
                results = []
                for repeat in range(args.repeats):
                    cfg = RunConfig(
                        game=bundle, task=task, profile=registry.profile(profile_id),
                        seed=mix64(task.seed, repeat), session_id=f"cal-{repeat}",
                    )
                    results.append(run_task(cfg))
                rows[profile_id] = results
            oracle_rows = rows["oracle"]
            random_rows = rows["random"]
            oracle_sr = sum(1 for r in oracle_rows if r.status == "success") / len(oracle_rows)
            oracle_min = min(r.run_progress for r in oracle_rows)
            oracle_steps = max(r.steps_used for r in oracle_rows)
            random_pg = sum(r.run_progress for r in random_rows) / len(random_rows)
            gap = oracle_min - random_pg
            flag = "" if task_id != "t01" else ("  OK" if oracle_sr == 1.0 and gap >= 0.2 else "  !!")
            print(f"{game_id + '+' + task_id:26s} {oracle_sr:9.2f} {oracle_min:12.2f} "
                  f"{oracle_steps:12d} {random_pg:13.2f} {gap:6.2f}{flag}")
    print(f"\nelapsed: {time.time() - started:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
