"""Configuration loading: games, tasks, and agent profiles.

One YAML file per game carries the definition, role controls, semantic
registries, prompt blocks, and the game's task list; profiles.yaml
carries the agent profiles. Loaded objects are immutable and shared.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import yaml

from .agents import AgentProfile, MemoryConfig
from .controls import RoleControls
from .evaluator import TaskSpec
from .games import ENGINES, ORACLES, GameDefinition, RoleDefinition, Session
from .semantics import SemanticControl, SemanticControlMap
from .state import EndFieldRule, ScoreResolver


class UnknownGameError(KeyError):
    pass


class UnknownTaskError(KeyError):
    pass


class UnknownModelError(KeyError):
    pass


@dataclass(frozen=True)
class GameBundle:
    definition: GameDefinition
    engine: type[Session]
    tasks: Mapping[str, TaskSpec]
    oracle: Any

    def new_session(self, seed: int, speed: float = 1.0, params: Mapping[str, Any] | None = None) -> Session:
        return self.engine(self.definition, seed=seed, speed=speed, params=params)


def _expand_cell_bindings(spec: Mapping[str, Any] | None) -> dict[str, tuple[int, int]] | None:
    if spec is None:
        return None
    if "grid" in spec:
        grid = spec["grid"]
        cols, rows, cell_px = int(grid["cols"]), int(grid["rows"]), int(grid["cell_px"])
        out = {}
        for r in range(rows):
            for c in range(cols):
                out[f"{chr(ord('a') + c)}{r + 1}"] = (
                    c * cell_px + cell_px // 2,
                    r * cell_px + cell_px // 2,
                )
        return out
    return {str(k): (int(v[0]), int(v[1])) for k, v in spec.items()}


def _load_semantic_map(entries: list[Mapping[str, Any]]) -> SemanticControlMap:
    controls = []
    for entry in entries:
        binding = dict(entry["binding"])
        controls.append(SemanticControl(
            id=entry["id"],
            description=entry["description"].strip(),
            binding=binding,
            aliases=tuple(entry.get("aliases", ())),
            required_args=frozenset(entry.get("required_args", ())),
            cell_bindings=_expand_cell_bindings(entry.get("cell_bindings")),
        ))
    return SemanticControlMap(controls)


def _load_role(entry: Mapping[str, Any]) -> RoleDefinition:
    controls = entry["controls"]
    return RoleDefinition(
        name=entry["name"],
        controls=RoleControls(
            allowed_keys=frozenset(controls.get("allowed_keys", ())),
            allow_clicks=bool(controls.get("allow_clicks", False)),
            hold_duration_ms=int(controls.get("hold_duration_ms", 200)),
            key_durations={k: int(v) for k, v in (controls.get("key_durations") or {}).items()},
            alias_groups=dict(controls.get("alias_groups") or {}),
        ),
        semantic_map=_load_semantic_map(entry["semantic_controls"]),
        role_prompt=entry["role_prompt"],
        cua_controls_text=entry["cua_controls_text"],
    )


def _load_task(entry: Mapping[str, Any], game_id: str, genre: str) -> TaskSpec:
    score = entry["score"]
    rules = tuple(
        EndFieldRule(
            path=rule["path"],
            comparator=rule["comparator"],
            value=rule["value"],
            effect=rule["effect"],
        )
        for rule in entry.get("end_field_rules", ())
    )
    return TaskSpec(
        task_id=entry["task_id"],
        game_id=game_id,
        instruction=entry["instruction"].strip(),
        start_score=float(entry["start_score"]),
        target_score=float(entry["target_score"]),
        score_resolver=ScoreResolver(mode=score["mode"], fields=tuple(score["fields"])),
        max_steps=int(entry.get("max_steps", 100)),
        end_field_rules=rules,
        continue_on_fail=bool(entry.get("continue_on_fail", True)),
        genre=genre,
        curriculum_level=int(entry.get("curriculum_level", 1)),
        seed=int(entry.get("seed", 0)),
        params=dict(entry.get("params", {})),
    )


def load_game_bundle(data: Mapping[str, Any]) -> GameBundle:
    game_id = data["game_id"]
    if game_id not in ENGINES:
        raise UnknownGameError(game_id)
    definition = GameDefinition(
        game_id=game_id,
        genre=data["genre"],
        tick_period_ms=int(data["tick_period_ms"]),
        roles=tuple(_load_role(r) for r in data["roles"]),
        rules_text=data["rules_text"],
        viewport=tuple(data.get("viewport", (192, 192))),
    )
    tasks = {
        t["task_id"]: _load_task(t, game_id, data["genre"])
        for t in data.get("tasks", ())
    }
    return GameBundle(
        definition=definition,
        engine=ENGINES[game_id],
        tasks=tasks,
        oracle=ORACLES.get(game_id),
    )


def _load_profile(entry: Mapping[str, Any]) -> AgentProfile:
    memory = entry.get("memory", {})
    return AgentProfile(
        agent_id=entry["agent_id"],
        interface_kind=entry["interface_kind"],
        output_format_kind=entry["output_format_kind"],
        output_format_block=entry.get("output_format_block", ""),
        model_endpoint=entry.get("model_endpoint"),
        memory=MemoryConfig(
            memory_rounds=int(memory.get("memory_rounds", 0)),
            memory_format=memory.get("memory_format", "full"),
            memory_include_fields=tuple(memory.get("memory_include_fields", ("user_prompt", "screenshot", "reasoning", "action"))),
        ),
        policy=entry.get("policy"),
        policy_args=dict(entry.get("policy_args", {})),
        latency_ms=int(entry.get("latency_ms", 0)),
    )


class Registry:
    """All bundled games and profiles, resolvable by id."""

    def __init__(self, games: dict[str, GameBundle], profiles: dict[str, AgentProfile]) -> None:
        self.games = games
        self.profiles = profiles

    def game(self, game_id: str) -> GameBundle:
        if game_id not in self.games:
            raise UnknownGameError(game_id)
        return self.games[game_id]

    def task(self, game_id: str, task_id: str) -> TaskSpec:
        bundle = self.game(game_id)
        if task_id not in bundle.tasks:
            raise UnknownTaskError(f"{game_id}+{task_id}")
        return bundle.tasks[task_id]

    def profile(self, profile_id: str) -> AgentProfile:
        if profile_id not in self.profiles:
            raise UnknownModelError(profile_id)
        return self.profiles[profile_id]

    def add_profile(self, profile: AgentProfile) -> None:
        self.profiles[profile.agent_id] = profile


def load_registry(config_dir: Path | None = None) -> Registry:
    """Load every bundled game config plus the profile registry."""
    if config_dir is None:
        root = importlib.resources.files("gamebench.configs")
    else:
        root = config_dir
    games: dict[str, GameBundle] = {}
    games_dir = root / "games"
    for entry in sorted(games_dir.iterdir(), key=lambda p: p.name):
        if not entry.name.endswith(".yaml"):
            continue
        bundle = load_game_bundle(yaml.safe_load(entry.read_text()))
        games[bundle.definition.game_id] = bundle
    profiles_text = (root / "profiles.yaml").read_text()
    profiles = {
        p["agent_id"]: _load_profile(p)
        for p in yaml.safe_load(profiles_text)["profiles"]
    }
    return Registry(games=games, profiles=profiles)
