"""Naive reference implementations used as oracles by the test suite.

Written independently of the package internals on purpose: plain loops,
no shared helpers beyond arithmetic. The acceptance suite replays
synthetic runs through both this module and the real evaluator and
demands bitwise-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass


def clip_progress(q_max: float, b: float, tau: float) -> float:
    ratio = (q_max - b) / (tau - b)
    if ratio < 0.0:
        return 0.0
    if ratio > 1.0:
        return 1.0
    return ratio


@dataclass
class SyntheticRun:
    """One synthetic run: per-episode score traces with terminal flags.

    Each episode is a list of per-step scores; every episode except the
    last ends in a terminal failure (that is what forced the reset).
    """

    b: float
    tau: float
    episodes: list[list[float]]
    max_steps: int
    continue_on_fail: bool = True


def replay(run: SyntheticRun) -> dict:
    """Step through the run the slow, obvious way."""
    q_max = None
    steps = 0
    status = "running"
    boundaries = []
    for idx, episode in enumerate(run.episodes):
        last_in_run = idx == len(run.episodes) - 1
        for pos, q in enumerate(episode):
            steps += 1
            if q_max is None or q > q_max:
                q_max = q
            if q_max >= run.tau:
                status = "success"
                break
            terminal_here = (pos == len(episode) - 1) and not last_in_run
            if terminal_here:
                if run.continue_on_fail:
                    if steps >= run.max_steps:
                        status = "budget_exhausted"
                        break
                    boundaries.append(steps)
                else:
                    status = "fail"
                    break
            if steps >= run.max_steps:
                status = "budget_exhausted"
                break
        if status != "running":
            break
    if status == "running":
        status = "budget_exhausted"
    progress = 1.0 if status == "success" else clip_progress(q_max, run.b, run.tau)
    return {
        "status": status,
        "q_max": q_max,
        "progress": progress,
        "steps": steps,
        "boundaries": boundaries,
    }


def mean_metrics(statuses: list[str], progresses: list[float]) -> dict:
    n = len(statuses)
    sr = 0
    for s in statuses:
        if s == "success":
            sr += 1
    pg = 0.0
    for p in progresses:
        pg += p
    return {"SR": sr / n, "PG": pg / n, "N": n}
