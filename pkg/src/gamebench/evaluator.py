"""Outcome-based, state-verifiable evaluation.

The evaluator never inspects model text. Each step it reads the
post-action snapshot, resolves the task score through the configured
resolver, and combines four stop/reset signals in a fixed precedence:
reaching the target, a stop_success end-field rule, terminal state, a
stop_fail end-field rule, and budget exhaustion. A terminal failure with
``continue_on_fail`` resets the episode and the run continues under the
same step budget; the run-level best progress is preserved across
resets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .controls import ValidityCounters
from .state import EndFieldRule, MissingFieldError, ScoreResolver, StateSnapshot

DEFAULT_MAX_STEPS = 100

GENRES = ("arcade", "platformer", "puzzle", "runner", "simulation")

RUNNING = "running"
SUCCESS = "success"
FAIL = "fail"
BUDGET_EXHAUSTED = "budget_exhausted"
ABORTED = "aborted"  # diagnostic: resolver misconfiguration, excluded from aggregates


class InvalidTaskError(ValueError):
    pass


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    game_id: str
    instruction: str
    start_score: float
    target_score: float
    score_resolver: ScoreResolver
    max_steps: int = DEFAULT_MAX_STEPS
    end_field_rules: tuple[EndFieldRule, ...] = ()
    continue_on_fail: bool = True
    genre: str = "puzzle"
    curriculum_level: int = 1
    seed: int = 0
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.target_score > self.start_score:
            raise InvalidTaskError(
                f"{self.task_id}: target ({self.target_score}) must exceed start ({self.start_score})"
            )
        if self.max_steps < 1:
            raise InvalidTaskError(f"{self.task_id}: max_steps must be >= 1")
        if not 1 <= self.curriculum_level <= 5:
            raise InvalidTaskError(f"{self.task_id}: curriculum_level must be in 1..5")


def compute_progress(q_max: float, b: float, tau: float) -> float:
    """Clipped normalised progress of the best score toward the target."""
    if not tau > b:
        raise InvalidTaskError("target must exceed start score")
    ratio = (q_max - b) / (tau - b)
    if ratio < 0.0:
        return 0.0
    if ratio > 1.0:
        return 1.0
    return ratio


@dataclass(frozen=True)
class StopDecision:
    action: str  # continue | reset_episode | stop
    final_status: str | None = None
    triggered_by: str = "none"  # target | terminal | budget | end_field | none

    def __post_init__(self) -> None:
        if self.action == "stop" and self.final_status is None:
            raise ValueError("stop decisions must carry a final status")


CONTINUE = StopDecision(action="continue")


@dataclass
class RunRecord:
    run_id: str
    game_id: str
    task_id: str
    profile_id: str
    seed: int
    genre: str = "puzzle"
    curriculum_level: int = 1
    mode: str = "paused"
    repeat_index: int = 0
    q_trace: list[float] = field(default_factory=list)
    episode_boundaries: list[int] = field(default_factory=list)
    q_max: float = float("-inf")
    run_progress: float = 0.0
    status: str = RUNNING
    steps_used: int = 0
    validity: ValidityCounters = field(default_factory=ValidityCounters)
    latencies_ms: list[float] = field(default_factory=list)
    input_tokens: list[int] = field(default_factory=list)
    started_at: float = 0.0
    finished_at: float = 0.0
    error: str | None = None

    def to_doc(self) -> dict[str, Any]:
        return {
            "runId": self.run_id,
            "gameId": self.game_id,
            "taskId": self.task_id,
            "profileId": self.profile_id,
            "seed": self.seed,
            "genre": self.genre,
            "curriculumLevel": self.curriculum_level,
            "mode": self.mode,
            "repeatIndex": self.repeat_index,
            "qTrace": self.q_trace,
            "episodeBoundaries": self.episode_boundaries,
            "qMax": self.q_max if self.q_max != float("-inf") else None,
            "runProgress": self.run_progress,
            "status": self.status,
            "stepsUsed": self.steps_used,
            "validity": self.validity.as_dict(),
            "latenciesMs": self.latencies_ms,
            "inputTokens": self.input_tokens,
            "startedAt": self.started_at,
            "finishedAt": self.finished_at,
            "error": self.error,
        }

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "RunRecord":
        rec = cls(
            run_id=doc["runId"],
            game_id=doc["gameId"],
            task_id=doc["taskId"],
            profile_id=doc["profileId"],
            seed=doc["seed"],
            genre=doc.get("genre", "puzzle"),
            curriculum_level=doc.get("curriculumLevel", 1),
            mode=doc.get("mode", "paused"),
            repeat_index=doc.get("repeatIndex", 0),
            q_trace=list(doc.get("qTrace", ())),
            episode_boundaries=list(doc.get("episodeBoundaries", ())),
            run_progress=doc.get("runProgress", 0.0),
            status=doc.get("status", RUNNING),
            steps_used=doc.get("stepsUsed", 0),
            validity=ValidityCounters.from_dict(doc.get("validity", {})),
            latencies_ms=list(doc.get("latenciesMs", ())),
            input_tokens=list(doc.get("inputTokens", ())),
            started_at=doc.get("startedAt", 0.0),
            finished_at=doc.get("finishedAt", 0.0),
            error=doc.get("error"),
        )
        q_max = doc.get("qMax")
        rec.q_max = float("-inf") if q_max is None else q_max
        return rec


def update_on_snapshot(rec: RunRecord, task: TaskSpec, s: StateSnapshot, step: int) -> StopDecision:
    """Fold one post-action snapshot into the record and resolve signals.

    Signal precedence: target, stop_success end-field, terminal,
    stop_fail end-field, budget. Applied to the same-step snapshot, so a
    run that reaches the target on its dying step still counts success.
    """
    if rec.status != RUNNING:
        raise RuntimeError("record already stopped")
    try:
        q = resolve_score(task, s)
        rule_hits = [rule for rule in task.end_field_rules if rule.matches(s)]
    except MissingFieldError as exc:
        rec.status = ABORTED
        rec.error = f"score/end-field path does not resolve: {exc.path}"
        return StopDecision(action="stop", final_status=ABORTED, triggered_by="none")

    rec.q_trace.append(q)
    rec.q_max = max(rec.q_max, q)
    rec.run_progress = compute_progress(rec.q_max, task.start_score, task.target_score)
    rec.steps_used = step

    if rec.q_max >= task.target_score:
        return _stop(rec, SUCCESS, "target")
    if any(rule.effect == "stop_success" for rule in rule_hits):
        return _stop(rec, SUCCESS, "end_field")
    if s.terminal.is_terminal:
        failed = s.terminal.outcome in ("lose", "timeout")
        if failed and task.continue_on_fail:
            if step >= task.max_steps:
                # the reset would land on an empty budget anyway
                return _stop(rec, BUDGET_EXHAUSTED, "budget")
            rec.episode_boundaries.append(step)
            return StopDecision(action="reset_episode", triggered_by="terminal")
        return _stop(rec, FAIL, "terminal")
    if any(rule.effect == "stop_fail" for rule in rule_hits):
        return _stop(rec, FAIL, "end_field")
    if step >= task.max_steps:
        return _stop(rec, BUDGET_EXHAUSTED, "budget")
    return CONTINUE


def _stop(rec: RunRecord, status: str, trigger: str) -> StopDecision:
    rec.status = status
    if status == SUCCESS:
        # Success means full task completion, whatever the raw score says
        # (a stop_success rule can fire below the numeric target).
        rec.run_progress = 1.0
    return StopDecision(action="stop", final_status=status, triggered_by=trigger)


def resolve_score(task: TaskSpec, s: StateSnapshot) -> float:
    from .state import resolve_task_score

    return resolve_task_score(s, task.score_resolver)


def aggregate_metrics(records: Iterable[RunRecord]) -> dict[str, float]:
    """Mean success indicator and mean progress over stopped runs."""
    scored = [r for r in records if r.status not in (RUNNING, ABORTED)]
    if not scored:
        raise ValueError("no finished records to aggregate")
    n = len(scored)
    sr_sum = 0
    pg_sum = 0.0
    for r in scored:
        sr_sum += 1 if r.status == SUCCESS else 0
        pg_sum += r.run_progress
    return {"SR": sr_sum / n, "PG": pg_sum / n, "N": n}


def compute_iar(c: ValidityCounters) -> dict[str, float]:
    """Invalid action rate and its exact NTC/OOS decomposition."""
    if c.proposed <= 0:
        raise ValueError("no proposed actions")
    invalid = c.proposed - c.valid
    assert invalid == c.ntc + c.oos
    return {
        "IAR": invalid / c.proposed,
        "NTC_rate": c.ntc / c.proposed,
        "OOS_rate": c.oos / c.proposed,
    }
