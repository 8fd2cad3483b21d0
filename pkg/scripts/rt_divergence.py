#!/usr/bin/env python3
"""Paused vs real-time comparison on the bundled runner task.

Runs the 500 ms latency-injected oracle over the ten repeat seeds in both
modes and prints per-seed progress plus the aggregate divergence. In
paused mode the injected latency cannot touch the outcome; in real-time
mode the world keeps moving while the agent "thinks", so the same policy
collapses.

Usage: python scripts/rt_divergence.py [--game lane-runner] [--task t01]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gamebench.registry import load_registry
from gamebench.rng import mix64
from gamebench.runtime import RunConfig, run_task


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--game", default="lane-runner")
    parser.add_argument("--task", default="t01")
    parser.add_argument("--profile", default="oracle-500ms")
    parser.add_argument("--repeats", type=int, default=10)
    args = parser.parse_args()

    registry = load_registry()
    task = registry.task(args.game, args.task)
    print(f"{args.game}+{args.task} with {args.profile}")
    print(f"{'seed':>4s} {'paused PG':>10s} {'paused sec/step':>16s} {'rt PG':>8s} {'rt sec/step':>12s}")
    paused_pgs, rt_pgs = [], []
    for repeat in range(args.repeats):
        seed = mix64(task.seed, repeat)
        rows = {}
        for mode in ("paused", "real_time"):
            record = run_task(RunConfig(
                game=registry.game(args.game), task=task,
                profile=registry.profile(args.profile), seed=seed,
                mode=mode, session_id=f"rtdiv-{mode}-{repeat}",
            ))
            sec_step = sum(record.latencies_ms) / len(record.latencies_ms) / 1000.0
            rows[mode] = (record.run_progress, sec_step)
        paused_pgs.append(rows["paused"][0])
        rt_pgs.append(rows["real_time"][0])
        print(f"{repeat:>4d} {rows['paused'][0]:>10.3f} {rows['paused'][1]:>16.3f} "
              f"{rows['real_time'][0]:>8.3f} {rows['real_time'][1]:>12.3f}")
    print(f"\nmean paused PG {sum(paused_pgs) / len(paused_pgs):.3f}  "
          f"mean rt PG {sum(rt_pgs) / len(rt_pgs):.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
