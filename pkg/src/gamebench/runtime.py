"""Per-run coordinator: the observation-action-evaluation loop.

Each step renders an observation, asks the agent for exactly one action,
parses and validates it, lowers it to atomic events, advances the
environment by the action's execution window, snapshots the verifiable
state and lets the evaluator decide whether to continue, reset the
episode, or stop.

Paused mode freezes the game during inference so latency cannot touch
outcomes; real-time mode instead advances the game by the measured (or
injected) inference latency before the action lands. Every step appends
one canonical-JSON trajectory line and extends a snapshot hash chain, so
equal runs are byte-comparable.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Mapping

from .agents import (
    Agent,
    AgentProfile,
    Decision,
    DecideError,
    MemoryRound,
    assemble_prompt,
    cycle_keys_policy,
    oracle_policy,
    random_policy,
    sequence_policy,
)
from .controls import (
    ActionShapeError,
    MissingArgumentError as CuaMissingArgument,
    NormalizedAction,
    UnknownCuaActionError,
    ValidityVerdict,
    execution_window_ms,
    lower_to_atomic_events,
    normalize_cua_call,
    record_validity,
    validate_action,
    with_substitution,
)
from .evaluator import RunRecord, TaskSpec, update_on_snapshot
from .games import Session
from .parsing import ParseOutcome, parse_output
from .registry import GameBundle
from .semantics import (
    MissingArgumentError,
    UnknownCellError,
    UnknownControlError,
    bind_arguments,
    resolve_control,
)
from .state import LifecycleStatus, canonical_bytes, canonical_json

GENESIS_HASH = "0" * 64
READINESS_TIMEOUT_TICKS = 50

# Sentinel decide() payload: reset the episode without consuming a step
# (submitted by the session service's POST /reset).
RESET_REQUEST = object()


class ReadinessTimeoutError(RuntimeError):
    pass


@dataclass
class RunConfig:
    game: GameBundle
    task: TaskSpec
    profile: AgentProfile
    seed: int
    mode: str = "paused"  # paused | real_time
    speed: float = 1.0
    session_id: str = "run"
    run_dir: Path | None = None
    port: int | None = None
    log_frames: bool = False
    repeat_index: int = 0

    def preset_string(self) -> str:
        return f"{self.task.game_id}+{self.task.task_id}+{self.profile.agent_id}"


@dataclass(frozen=True)
class TrajectoryEntry:
    step: int
    prompt_hash: str
    observation_hash: str
    raw_output: str
    parse_ok: bool
    parse_detail: str
    verdict: ValidityVerdict
    events: tuple[dict[str, Any], ...]
    snapshot_doc: Mapping[str, Any]
    state_hash: str
    latency_ms: float

    def to_doc(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "promptHash": self.prompt_hash,
            "observationHash": self.observation_hash,
            "rawOutput": self.raw_output,
            "parse": {"ok": self.parse_ok, "detail": self.parse_detail},
            "verdict": {
                "valid": self.verdict.valid,
                "category": self.verdict.category,
                "reason": self.verdict.reason,
                "substitutedKey": self.verdict.substituted_key,
            },
            "events": list(self.events),
            "snapshot": self.snapshot_doc,
            "stateHash": self.state_hash,
            "latencyMs": self.latency_ms,
        }


def chain_hash(previous_hex: str, snapshot_bytes: bytes) -> str:
    return hashlib.sha256(previous_hex.encode("ascii") + snapshot_bytes).hexdigest()


def readiness_wait(session: Session, timeout_ticks: int = READINESS_TIMEOUT_TICKS) -> Session:
    """Advance through loading/menu phases until the game is actionable."""
    ticks = 0
    while session.status not in (LifecycleStatus.READY, LifecycleStatus.PLAYING):
        if ticks >= timeout_ticks:
            raise ReadinessTimeoutError(
                f"{session.definition.game_id} never reported an actionable status"
            )
        session.advance(session.definition.tick_period_ms)
        ticks += 1
    return session


def build_agent(cfg: RunConfig) -> Agent:
    profile = cfg.profile
    if not profile.is_scripted:
        return Agent(profile, seed=cfg.seed)
    policy_name = profile.policy
    if policy_name == "oracle":
        if cfg.game.oracle is None:
            raise ValueError(f"no oracle registered for {cfg.task.game_id}")
        policy = oracle_policy(cfg.game.oracle)
    elif policy_name == "random":
        role = cfg.game.definition.role()
        policy = random_policy(role.semantic_map, cfg.seed)
    elif policy_name == "cycle_keys":
        policy = cycle_keys_policy(list(profile.policy_args.get("keys", ["ArrowUp"])))
    elif policy_name == "sequence":
        actions = [(a[0], dict(a[1])) for a in profile.policy_args["actions"]]
        policy = sequence_policy(actions)
    else:
        raise ValueError(f"unknown scripted policy {policy_name!r}")
    return Agent(profile, policy=policy, seed=cfg.seed)


def resolve_action(
    outcome: ParseOutcome, profile: AgentProfile, role
) -> tuple[NormalizedAction | None, ValidityVerdict]:
    """Semantic or computer-use resolution plus role-aware legality."""
    if not outcome.ok:
        return None, ValidityVerdict(valid=False, category="NTC", reason=outcome.reason or "no tool call")
    call = outcome.call
    if profile.interface_kind == "generalist":
        try:
            control = resolve_control(call, role.semantic_map)
            action = bind_arguments(control, call)
        except UnknownControlError as exc:
            return None, ValidityVerdict(
                valid=False, category="OOS",
                reason=f"semantic action {exc.identifier!r} is not registered",
            )
        except MissingArgumentError as exc:
            return None, ValidityVerdict(
                valid=False, category="OOS",
                reason=f"missing required argument {exc.argument!r}",
            )
        except UnknownCellError as exc:
            return None, ValidityVerdict(
                valid=False, category="OOS", reason=f"unknown cell id {exc.cell!r}",
            )
        except ActionShapeError as exc:
            return None, ValidityVerdict(valid=False, category="OOS", reason=str(exc))
    else:
        try:
            action = normalize_cua_call(call.name, call.arguments)
        except UnknownCuaActionError as exc:
            return None, ValidityVerdict(valid=False, category="OOS", reason=str(exc))
        except CuaMissingArgument as exc:
            return None, ValidityVerdict(
                valid=False, category="OOS",
                reason=f"missing required argument {exc.argument!r}",
            )
        except ActionShapeError as exc:
            return None, ValidityVerdict(valid=False, category="OOS", reason=str(exc))
    verdict = validate_action(action, role.controls)
    if not verdict.valid:
        return None, verdict
    return with_substitution(action, role.controls), verdict


StepCallback = Callable[[dict[str, Any]], None]


def run_task(
    cfg: RunConfig,
    on_step: StepCallback | None = None,
    decide_override: Callable[..., Decision] | None = None,
) -> RunRecord:
    """Execute one budgeted run and persist its record and trajectory.

    `on_step` receives a live view after every step (used by the session
    service); `decide_override` replaces the agent's decide call (used by
    the human-play bridge).
    """
    task = cfg.task
    profile = cfg.profile
    role = cfg.game.definition.role()
    session = cfg.game.new_session(seed=cfg.seed, speed=cfg.speed, params=task.params)
    readiness_wait(session)

    record = RunRecord(
        run_id=cfg.session_id,
        game_id=task.game_id,
        task_id=task.task_id,
        profile_id=profile.agent_id,
        seed=cfg.seed,
        genre=task.genre,
        curriculum_level=task.curriculum_level,
        mode=cfg.mode,
        repeat_index=cfg.repeat_index,
    )
    record.started_at = time.time()

    agent = build_agent(cfg) if decide_override is None else Agent(
        profile, policy=lambda s, i: ("wait", {}), seed=cfg.seed,
    )
    needs_frame = cfg.log_frames or not profile.is_scripted or on_step is not None

    run_dir = cfg.run_dir
    trajectory_file = None
    if run_dir is not None:
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "config.resolved").write_text(canonical_json({
            "preset": cfg.preset_string(),
            "gameId": task.game_id,
            "taskId": task.task_id,
            "profileId": profile.agent_id,
            "mode": cfg.mode,
            "seed": cfg.seed,
            "speed": cfg.speed,
            "repeatIndex": cfg.repeat_index,
            "sessionId": cfg.session_id,
            "port": cfg.port,
            "maxSteps": task.max_steps,
        }) + "\n")
        _persist_record(run_dir, record)
        if cfg.log_frames:
            (run_dir / "frames").mkdir(exist_ok=True)
        trajectory_file = (run_dir / "trajectory.log").open("w", encoding="utf-8")

    if on_step is not None:
        on_step({
            "step": 0,
            "stepsUsed": 0,
            "budgetRemaining": task.max_steps,
            "runStatus": record.status,
            "runProgress": record.run_progress,
            "decision": "ready",
            "verdict": None,
            "snapshot": session.get_state().to_doc(),
            "observationText": session.render_text(),
            "frame": session.render_frame() if needs_frame else None,
            "record": record,
        })

    state_hash = GENESIS_HASH
    try:
        step = 0
        while step < task.max_steps:
            step += 1
            observation_text = session.render_text()
            frame = session.render_frame() if needs_frame else None
            pre_snapshot = session.get_state()

            paused_here = cfg.mode == "paused" and session.status is LifecycleStatus.PLAYING
            if paused_here:
                session.pause()
            bundle = assemble_prompt(
                profile,
                game_rules=cfg.game.definition.rules_text,
                role_prompt=role.role_prompt,
                cua_controls_text=role.cua_controls_text,
                semantic_map=role.semantic_map,
                task_instruction=task.instruction,
                store=agent.memory,
                observation_text=observation_text,
                observation_image=frame,
            )
            prompt_hash = hashlib.sha256(bundle.render_text().encode("utf-8")).hexdigest()
            decide = decide_override or agent.decide
            decide_failure: str | None = None
            try:
                decision = decide(bundle, pre_snapshot)
            except DecideError as exc:
                decision = Decision(payload=None, latency_ms=0.0, input_tokens=bundle.estimate_tokens())
                decide_failure = str(exc)
            if paused_here:
                session.resume()

            if decision.payload is RESET_REQUEST:
                step -= 1  # a manual reset is not a primitive action
                session.reset()
                readiness_wait(session)
                record.episode_boundaries.append(record.steps_used)
                if on_step is not None:
                    reset_snapshot = session.get_state().to_doc()
                    on_step({
                        "step": record.steps_used,
                        "stepsUsed": record.steps_used,
                        "budgetRemaining": task.max_steps - record.steps_used,
                        "runStatus": record.status,
                        "runProgress": record.run_progress,
                        "decision": "manual_reset",
                        "verdict": None,
                        "snapshot": reset_snapshot,
                        "observationText": session.render_text(),
                        "frame": session.render_frame() if needs_frame else None,
                        "record": record,
                    })
                continue

            if cfg.mode == "real_time" and decision.latency_ms > 0:
                session.advance(int(decision.latency_ms))

            if decide_failure is not None:
                outcome = ParseOutcome.no_tool_call(f"decide failed: {decide_failure}")
            else:
                outcome = parse_output(profile.output_format_kind, decision.payload)
            action, verdict = resolve_action(outcome, profile, role)

            events = []
            if action is not None and verdict.valid:
                events = lower_to_atomic_events(action, role.controls)
            if events and session.status in (LifecycleStatus.READY, LifecycleStatus.PLAYING):
                session.apply_events(events)
            _, remainder = execution_window_ms(events)
            session.advance(remainder)

            snapshot = session.get_state()
            snapshot_doc = snapshot.to_doc()
            state_hash = chain_hash(state_hash, canonical_bytes(snapshot_doc))

            record_validity(record.validity, verdict)
            record.latencies_ms.append(decision.latency_ms)
            record.input_tokens.append(decision.input_tokens)
            stop = update_on_snapshot(record, task, snapshot, step)

            entry = TrajectoryEntry(
                step=step,
                prompt_hash=prompt_hash,
                observation_hash=hashlib.sha256(observation_text.encode("utf-8")).hexdigest(),
                raw_output=_raw_output_text(decision.payload, decide_failure),
                parse_ok=outcome.ok,
                parse_detail=outcome.call.name if outcome.ok else (outcome.reason or ""),
                verdict=verdict,
                events=tuple(e.to_dict() for e in events),
                snapshot_doc=snapshot_doc,
                state_hash=state_hash,
                latency_ms=decision.latency_ms,
            )
            if trajectory_file is not None:
                trajectory_file.write(canonical_json(entry.to_doc()) + "\n")
                trajectory_file.flush()
            if cfg.log_frames and run_dir is not None and frame is not None:
                (run_dir / "frames" / f"step_{step:04d}.ppm").write_bytes(frame)

            agent.memory.record_round(MemoryRound(
                user_prompt=task.instruction,
                screenshot=frame,
                reasoning=(outcome.call.reasoning or "") if outcome.ok else "",
                action=action.describe() if action is not None else f"<invalid:{verdict.category}>",
            ))

            if on_step is not None:
                on_step({
                    "step": step,
                    "stepsUsed": record.steps_used,
                    "budgetRemaining": task.max_steps - record.steps_used,
                    "runStatus": record.status,
                    "runProgress": record.run_progress,
                    "decision": stop.action,
                    "verdict": entry.to_doc()["verdict"],
                    "snapshot": snapshot_doc,
                    "observationText": observation_text,
                    "frame": frame,
                    "record": record,
                })

            if stop.action == "stop":
                break
            if stop.action == "reset_episode":
                session.reset()
                readiness_wait(session)
    finally:
        record.finished_at = time.time()
        if trajectory_file is not None:
            trajectory_file.close()
        if run_dir is not None:
            _persist_record(run_dir, record)
    return record


def run_task_rt(cfg: RunConfig, on_step: StepCallback | None = None) -> RunRecord:
    """Real-time variant: the environment keeps evolving during inference."""
    cfg.mode = "real_time"
    return run_task(cfg, on_step=on_step)


def _raw_output_text(payload: Any, decide_failure: str | None) -> str:
    if decide_failure is not None:
        return f"<decide-error: {decide_failure}>"
    if payload is None:
        return ""
    if isinstance(payload, str):
        return payload
    return canonical_json(payload)


def _persist_record(run_dir: Path, record: RunRecord) -> None:
    (run_dir / "run_record.json").write_text(canonical_json(record.to_doc()) + "\n")


def load_record(run_dir: Path) -> RunRecord:
    import json

    return RunRecord.from_doc(json.loads((run_dir / "run_record.json").read_text()))
