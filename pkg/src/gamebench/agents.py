"""Agent harness: profiles, structured prompts, rolling memory, decisions.

A profile describes one decision source: a scripted policy (per-game
oracle, seeded random agent, fixed key pulse) or a remote
chat-completions endpoint. All profiles share the same structured prompt
with a fixed block order (game rules, role and controls, task
instruction, output format) and a rolling multimodal memory that is
re-sliced at build time.
"""

from __future__ import annotations

import json
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from .parsing import FORMAT_KINDS, ToolCall, render_output
from .rng import Rng, mix64
from .semantics import SemanticControlMap, render_action_list
from .state import StateSnapshot

MEMORY_FIELDS = ("user_prompt", "screenshot", "reasoning", "action")
IMAGE_TOKEN_ESTIMATE = 256  # flat per-image proxy, chars/4 for text


class DecideError(RuntimeError):
    """Endpoint unreachable or timed out; the step is recorded as NTC."""


@dataclass(frozen=True)
class MemoryConfig:
    memory_rounds: int = 0
    memory_format: str = "full"  # full | text_only
    memory_include_fields: tuple[str, ...] = MEMORY_FIELDS

    def __post_init__(self) -> None:
        if self.memory_rounds < 0:
            raise ValueError("memory_rounds must be >= 0")
        if self.memory_format not in ("full", "text_only"):
            raise ValueError(f"unknown memory_format {self.memory_format!r}")
        unknown = set(self.memory_include_fields) - set(MEMORY_FIELDS)
        if unknown:
            raise ValueError(f"unknown memory fields {sorted(unknown)}")


@dataclass(frozen=True)
class AgentProfile:
    agent_id: str
    interface_kind: str  # computer_use | generalist
    output_format_kind: str
    output_format_block: str = ""
    model_endpoint: Mapping[str, Any] | None = None
    memory: MemoryConfig = field(default_factory=MemoryConfig)
    policy: str | None = None
    policy_args: Mapping[str, Any] = field(default_factory=dict)
    latency_ms: int = 0

    def __post_init__(self) -> None:
        if self.interface_kind not in ("computer_use", "generalist"):
            raise ValueError(f"unknown interface kind {self.interface_kind!r}")
        if self.output_format_kind not in FORMAT_KINDS:
            raise ValueError(f"unknown output format {self.output_format_kind!r}")
        if self.is_scripted and self.model_endpoint is not None:
            raise ValueError("scripted profiles have no endpoint")
        if not self.is_scripted and self.model_endpoint is None:
            raise ValueError(f"{self.agent_id}: remote profile needs an endpoint")

    @property
    def is_scripted(self) -> bool:
        return self.policy is not None


@dataclass(frozen=True)
class MemoryRound:
    user_prompt: str
    screenshot: bytes | None
    reasoning: str
    action: str


class MemoryStore:
    """Append-only round log; slicing happens at prompt-build time."""

    def __init__(self) -> None:
        self.rounds: list[MemoryRound] = []

    def record_round(self, round_: MemoryRound) -> None:
        self.rounds.append(round_)


ContextItem = tuple[str, Any]  # ("text", str) | ("image", bytes)


def build_context(store: MemoryStore, cfg: MemoryConfig) -> list[ContextItem]:
    """Render the most recent rounds as interleaved text and image items.

    Only the configured fields appear, in their fixed order; text_only
    format drops screenshots even when the field is included. Absolute
    step numbers keep context(k) a suffix of context(k+1).
    """
    if cfg.memory_rounds == 0 or not store.rounds:
        return []
    start = max(0, len(store.rounds) - cfg.memory_rounds)
    items: list[ContextItem] = [("text", "Action History")]
    for index in range(start, len(store.rounds)):
        round_ = store.rounds[index]
        lines = [f"Step {index + 1}:"]
        for field_name in MEMORY_FIELDS:
            if field_name not in cfg.memory_include_fields:
                continue
            if field_name == "screenshot":
                if cfg.memory_format == "full" and round_.screenshot is not None:
                    items.append(("text", "\n".join(lines)))
                    lines = []
                    items.append(("image", round_.screenshot))
                continue
            value = getattr(round_, field_name)
            if value:
                lines.append(f"  {field_name}: {value}")
        if lines:
            items.append(("text", "\n".join(lines)))
    return items


_PREAMBLE_COMMON = (
    "You are an expert game agent. Observe the current game screen, follow the "
    "game rules, and work toward the task goal one step at a time."
)
_PREAMBLE_GENERALIST = (
    _PREAMBLE_COMMON
    + "\nYou do NOT have direct keyboard or mouse access; act only through the "
    "registered semantic control list."
)


@dataclass(frozen=True)
class PromptBundle:
    """Structured prompt with an invariant block order."""

    preamble: str
    game_rules: str
    role_and_controls: str
    task_instruction: str
    output_format: str
    history: tuple[ContextItem, ...]
    observation_text: str
    observation_image: bytes | None = None

    def render_text(self) -> str:
        sections = [
            self.preamble,
            "# Game Rules\n" + self.game_rules.rstrip(),
            "# Role and Controls\n" + self.role_and_controls.rstrip(),
            "# Task Instruction\n" + self.task_instruction.rstrip(),
            "# Output Format\n" + self.output_format.rstrip(),
        ]
        for kind, payload in self.history:
            if kind == "text":
                sections.append(payload)
            else:
                sections.append("[image attachment]")
        sections.append("# Current Observation\n" + self.observation_text.rstrip())
        return "\n\n".join(sections) + "\n"

    def estimate_tokens(self) -> int:
        total = len(self.render_text()) // 4 + 1
        total += sum(IMAGE_TOKEN_ESTIMATE for kind, _ in self.history if kind == "image")
        if self.observation_image is not None:
            total += IMAGE_TOKEN_ESTIMATE
        return total


def assemble_prompt(
    profile: AgentProfile,
    game_rules: str,
    role_prompt: str,
    cua_controls_text: str,
    semantic_map: SemanticControlMap,
    task_instruction: str,
    store: MemoryStore,
    observation_text: str,
    observation_image: bytes | None = None,
) -> PromptBundle:
    """Compose the structured prompt for one step.

    Generalist profiles embed the rendered semantic action list in the
    role block; computer-use profiles embed the textual control spec.
    """
    if profile.interface_kind == "generalist":
        role_block = role_prompt.rstrip() + "\n\n" + render_action_list(semantic_map)
        preamble = _PREAMBLE_GENERALIST
    else:
        role_block = role_prompt.rstrip() + "\n\n" + cua_controls_text.rstrip() + "\n"
        preamble = _PREAMBLE_COMMON
    return PromptBundle(
        preamble=preamble,
        game_rules=game_rules,
        role_and_controls=role_block,
        task_instruction=task_instruction,
        output_format=profile.output_format_block or "Return exactly one tool call per step.",
        history=tuple(build_context(store, profile.memory)),
        observation_text=observation_text,
        observation_image=observation_image if profile.memory.memory_format == "full" else None,
    )


@dataclass
class Decision:
    payload: Any  # text or structured payload, format-dependent
    latency_ms: float
    input_tokens: int


PolicyFn = Callable[[StateSnapshot, int], tuple[str, dict]]


class Agent:
    """One profile bound to one run: policy state, memory, step counter."""

    def __init__(self, profile: AgentProfile, policy: PolicyFn | None = None, seed: int = 0) -> None:
        self.profile = profile
        self.memory = MemoryStore()
        self.steps = 0
        self._policy = policy
        self.rng = Rng(mix64(seed, 0xA9E17))
        if profile.is_scripted and policy is None:
            raise ValueError(f"scripted profile {profile.agent_id} needs a bound policy")

    def decide(self, bundle: PromptBundle, snapshot: StateSnapshot) -> Decision:
        self.steps += 1
        tokens = bundle.estimate_tokens()
        if self.profile.is_scripted:
            name, args = self._policy(snapshot, self.steps)
            call = ToolCall(name=name, arguments=args, reasoning=f"scripted step {self.steps}")
            payload = render_output(self.profile.output_format_kind, call)
            return Decision(payload=payload, latency_ms=float(self.profile.latency_ms), input_tokens=tokens)
        started = time.monotonic()
        payload = self._decide_remote(bundle)
        latency = (time.monotonic() - started) * 1000.0
        return Decision(payload=payload, latency_ms=latency, input_tokens=tokens)

    def _decide_remote(self, bundle: PromptBundle) -> Any:
        import os

        endpoint = self.profile.model_endpoint or {}
        url = endpoint.get("url") or os.environ.get(endpoint.get("url_env", ""), "")
        if not url:
            raise DecideError("no endpoint url configured")
        timeout = float(endpoint.get("timeout_s", 120))
        body = {
            "model": endpoint.get("model") or os.environ.get(endpoint.get("model_env", ""), "default"),
            "messages": [
                {"role": "system", "content": bundle.preamble},
                {"role": "user", "content": bundle.render_text()},
            ],
        }
        headers = {"Content-Type": "application/json"}
        key_env = endpoint.get("api_key_env")
        if key_env and os.environ.get(key_env):
            headers["Authorization"] = f"Bearer {os.environ[key_env]}"
        request = urllib.request.Request(
            url, data=json.dumps(body).encode("utf-8"), headers=headers, method="POST"
        )
        last_error: Exception | None = None
        for _ in range(2):  # one retry, nothing fancier
            try:
                with urllib.request.urlopen(request, timeout=timeout) as response:
                    reply = json.loads(response.read().decode("utf-8"))
                return _extract_reply(reply)
            except (urllib.error.URLError, TimeoutError, json.JSONDecodeError, OSError) as exc:
                last_error = exc
        raise DecideError(f"endpoint failed: {last_error}")


def _extract_reply(reply: Mapping[str, Any]) -> Any:
    """Pull the model output out of a chat-completions style response."""
    choices = reply.get("choices")
    if not choices:
        return reply
    message = choices[0].get("message", {})
    tool_calls = message.get("tool_calls")
    if tool_calls:
        return tool_calls
    return message.get("content", "")


# -- scripted policies -------------------------------------------------------

def oracle_policy(oracle_fn) -> PolicyFn:
    def policy(snapshot: StateSnapshot, step: int) -> tuple[str, dict]:
        return oracle_fn(snapshot)

    return policy


def random_policy(semantic_map: SemanticControlMap, seed: int) -> PolicyFn:
    """Uniform over the registry, with uniformly chosen required args."""
    rng = Rng(mix64(seed, 0x7A11D0))

    def policy(snapshot: StateSnapshot, step: int) -> tuple[str, dict]:
        control = semantic_map.controls[rng.randrange(len(semantic_map.controls))]
        args: dict[str, Any] = {}
        for name in sorted(control.required_args):
            if name == "cell" and control.cell_bindings:
                cells = sorted(control.cell_bindings)
                args["cell"] = cells[rng.randrange(len(cells))]
            else:
                args[name] = ""
        return control.id, args

    return policy


def cycle_keys_policy(keys: list[str]) -> PolicyFn:
    def policy(snapshot: StateSnapshot, step: int) -> tuple[str, dict]:
        return "press_key", {"key": keys[(step - 1) % len(keys)]}

    return policy


def sequence_policy(actions: list[tuple[str, dict]]) -> PolicyFn:
    """Replay a fixed action schedule, cycling when exhausted."""

    def policy(snapshot: StateSnapshot, step: int) -> tuple[str, dict]:
        name, args = actions[(step - 1) % len(actions)]
        return name, dict(args)

    return policy
