"""Verifiable game-state contract.

Every environment tick is summarised by a :class:`StateSnapshot`, a pure
value that the evaluator (and nothing else) reads scores from.  Snapshots
serialize to a canonical JSON document: UTF-8, lexicographically sorted
keys, no insignificant whitespace, and numbers normalised so that equal
snapshots always produce byte-identical documents.  That canonical byte
form is what trajectory hash chains are built over.

Top-level document keys are fixed: ``gameId``, ``seed``, ``timestampMs``,
``gameTimeMs``, ``status``, ``terminal``, ``game_state``, ``metrics``,
``raw``.  The mixed camel/snake casing is deliberate and load-bearing.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

MAX_EXACT_INT = 2**53


class LifecycleStatus(str, enum.Enum):
    LOADING = "loading"
    MENU = "menu"
    READY = "ready"
    PLAYING = "playing"
    PAUSED = "paused"
    TERMINAL = "terminal"


# Tick/input driven transitions. Reset additionally re-enters `loading`
# from any status; that edge is owned by Session.reset(), not the games.
STATUS_TRANSITIONS: dict[LifecycleStatus, frozenset[LifecycleStatus]] = {
    LifecycleStatus.LOADING: frozenset({LifecycleStatus.MENU, LifecycleStatus.READY}),
    LifecycleStatus.MENU: frozenset({LifecycleStatus.READY}),
    LifecycleStatus.READY: frozenset({LifecycleStatus.PLAYING}),
    LifecycleStatus.PLAYING: frozenset({LifecycleStatus.PAUSED, LifecycleStatus.TERMINAL}),
    LifecycleStatus.PAUSED: frozenset({LifecycleStatus.PLAYING}),
    LifecycleStatus.TERMINAL: frozenset(),
}

OUTCOMES = ("win", "lose", "timeout")


class MalformedDocumentError(ValueError):
    """The document is not parseable at all."""


class SchemaViolationError(ValueError):
    """The document parsed but violates the snapshot schema."""

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class MissingFieldError(KeyError):
    """A configured score/end-field path does not resolve."""

    def __init__(self, path: str) -> None:
        super().__init__(path)
        self.path = path


@dataclass(frozen=True)
class TerminalInfo:
    is_terminal: bool = False
    outcome: str | None = None
    reason: str | None = None

    def to_doc(self) -> dict[str, Any]:
        return {"isTerminal": self.is_terminal, "outcome": self.outcome, "reason": self.reason}

    @classmethod
    def from_doc(cls, doc: Mapping[str, Any]) -> "TerminalInfo":
        if not isinstance(doc, Mapping):
            raise SchemaViolationError("terminal", "must be an object")
        if not isinstance(doc.get("isTerminal"), bool):
            raise SchemaViolationError("terminal.isTerminal", "must be a boolean")
        return cls(
            is_terminal=doc["isTerminal"],
            outcome=doc.get("outcome"),
            reason=doc.get("reason"),
        )


@dataclass(frozen=True)
class StateSnapshot:
    game_id: str
    seed: int
    timestamp_ms: int
    game_time_ms: int
    status: LifecycleStatus
    terminal: TerminalInfo = field(default_factory=TerminalInfo)
    game_state: dict[str, Any] = field(default_factory=dict)
    metrics: dict[str, Any] = field(default_factory=dict)
    raw: dict[str, Any] = field(default_factory=dict)

    def to_doc(self) -> dict[str, Any]:
        return {
            "gameId": self.game_id,
            "seed": self.seed,
            "timestampMs": self.timestamp_ms,
            "gameTimeMs": self.game_time_ms,
            "status": self.status.value,
            "terminal": self.terminal.to_doc(),
            "game_state": self.game_state,
            "metrics": self.metrics,
            "raw": self.raw,
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateSnapshot):
            return NotImplemented
        return _canonical_value(self.to_doc()) == _canonical_value(other.to_doc())

    def __hash__(self) -> int:
        return hash(serialize_snapshot(self))


_TOP_KEYS = {
    "gameId", "seed", "timestampMs", "gameTimeMs",
    "status", "terminal", "game_state", "metrics", "raw",
}


def _canonical_value(value: Any) -> Any:
    """Normalise numbers so equal snapshots serialize identically.

    Floats with integral value (within 2^53) collapse to ints; NaN and
    infinities are rejected upstream by validation.
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        if value.is_integer() and abs(value) <= MAX_EXACT_INT:
            return int(value)
        return value
    if isinstance(value, dict):
        return {str(k): _canonical_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical_value(v) for v in value]
    return value


def canonical_json(value: Any) -> str:
    """Canonical textual form: sorted keys, no whitespace, UTF-8 friendly."""
    return json.dumps(
        _canonical_value(value),
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    )


def canonical_bytes(value: Any) -> bytes:
    return canonical_json(value).encode("utf-8")


def serialize_snapshot(s: StateSnapshot) -> str:
    return canonical_json(s.to_doc())


def deserialize_snapshot(doc: str) -> StateSnapshot:
    try:
        data = json.loads(doc)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedDocumentError(str(exc)) from exc
    if not isinstance(data, dict):
        raise MalformedDocumentError("top-level value must be an object")

    missing = _TOP_KEYS - set(data)
    if missing:
        raise SchemaViolationError(sorted(missing)[0], "missing top-level key")
    extra = set(data) - _TOP_KEYS
    if extra:
        raise SchemaViolationError(sorted(extra)[0], "unknown top-level key")

    if not isinstance(data["gameId"], str):
        raise SchemaViolationError("gameId", "must be a string")
    for key in ("seed", "timestampMs", "gameTimeMs"):
        if not isinstance(data[key], int) or isinstance(data[key], bool):
            raise SchemaViolationError(key, "must be an integer")
    try:
        status = LifecycleStatus(data["status"])
    except ValueError:
        raise SchemaViolationError("status", f"unknown status {data['status']!r}") from None
    for key in ("game_state", "metrics", "raw"):
        if not isinstance(data[key], dict):
            raise SchemaViolationError(key, "must be an object")

    snapshot = StateSnapshot(
        game_id=data["gameId"],
        seed=data["seed"],
        timestamp_ms=data["timestampMs"],
        game_time_ms=data["gameTimeMs"],
        status=status,
        terminal=TerminalInfo.from_doc(data["terminal"]),
        game_state=data["game_state"],
        metrics=data["metrics"],
        raw=data["raw"],
    )
    violations = validate_snapshot(snapshot)
    if violations:
        raise SchemaViolationError(violations[0].split(":", 1)[0], violations[0])
    return snapshot


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_numbers(prefix: str, value: Any, out: list[str]) -> None:
    if isinstance(value, bool):
        return
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            out.append(f"{prefix}: non-finite number")
    elif isinstance(value, int):
        if abs(value) > MAX_EXACT_INT:
            out.append(f"{prefix}: integer exceeds 2^53, not exactly representable")
    elif isinstance(value, dict):
        for k, v in value.items():
            _check_numbers(f"{prefix}.{k}", v, out)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _check_numbers(f"{prefix}[{i}]", v, out)


def validate_snapshot(s: StateSnapshot) -> list[str]:
    """Return every invariant violation; an empty list means valid."""
    out: list[str] = []
    if not s.game_id:
        out.append("gameId: must be non-empty")
    if s.game_time_ms < 0:
        out.append("gameTimeMs: must be non-negative")
    if not isinstance(s.status, LifecycleStatus):
        out.append("status: not a lifecycle status")
        return out

    term = s.terminal
    if term.is_terminal != (s.status is LifecycleStatus.TERMINAL):
        out.append("terminal.isTerminal: must agree with status == terminal")
    if not term.is_terminal and (term.outcome is not None or term.reason is not None):
        out.append("terminal.outcome: outcome/reason must be absent unless terminal")
    if term.outcome is not None and term.outcome not in OUTCOMES:
        out.append(f"terminal.outcome: unknown outcome {term.outcome!r}")

    progress = s.game_state.get("progress")
    if progress is not None:
        if not _is_number(progress):
            out.append("game_state.progress: must be numeric")
        elif not (0.0 <= float(progress) <= 1.0):
            out.append("game_state.progress: must lie in [0, 1]")
    score = s.game_state.get("score")
    if score is not None and not _is_number(score):
        out.append("game_state.score: must be numeric")
    for name, value in s.metrics.items():
        if not _is_number(value):
            out.append(f"metrics.{name}: must be numeric")

    _check_numbers("game_state", s.game_state, out)
    _check_numbers("metrics", s.metrics, out)
    _check_numbers("raw", s.raw, out)
    return out


_SECTIONS = ("game_state", "metrics", "raw")


def resolve_path(s: StateSnapshot, path: str) -> Any:
    """Resolve a dotted field path against a snapshot.

    Explicit section prefixes (``metrics.lives``) are preferred; bare paths
    search ``game_state``, then ``metrics``, then ``raw``.
    """
    parts = path.split(".")
    if parts[0] in _SECTIONS:
        value = _walk(getattr(s, parts[0]), parts[1:])
        if value is not _MISSING:
            return value
        raise MissingFieldError(path)
    for section in _SECTIONS:
        value = _walk(getattr(s, section), parts)
        if value is not _MISSING:
            return value
    raise MissingFieldError(path)


_MISSING = object()


def _walk(node: Any, parts: Iterable[str]) -> Any:
    for part in parts:
        if not isinstance(node, Mapping) or part not in node:
            return _MISSING
        node = node[part]
    return node


@dataclass(frozen=True)
class ScoreResolver:
    mode: str  # "scalar" | "aggregate"
    fields: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.mode not in ("scalar", "aggregate"):
            raise ValueError(f"unknown resolver mode {self.mode!r}")
        if self.mode == "scalar" and len(self.fields) != 1:
            raise ValueError("scalar resolver needs exactly one field path")
        if self.mode == "aggregate" and len(self.fields) < 1:
            raise ValueError("aggregate resolver needs at least one field path")


def resolve_task_score(s: StateSnapshot, r: ScoreResolver) -> float:
    """Scalar mode returns the field value; aggregate mode sums all fields."""
    values = []
    for path in r.fields:
        value = resolve_path(s, path)
        if not _is_number(value):
            raise MissingFieldError(path)
        values.append(value)
    if r.mode == "scalar":
        return values[0]
    total = 0
    for v in values:
        total += v
    return total


@dataclass(frozen=True)
class EndFieldRule:
    path: str
    comparator: str  # eq | ne | ge | le
    value: Any
    effect: str  # stop_success | stop_fail

    def __post_init__(self) -> None:
        if self.comparator not in ("eq", "ne", "ge", "le"):
            raise ValueError(f"unknown comparator {self.comparator!r}")
        if self.effect not in ("stop_success", "stop_fail"):
            raise ValueError(f"unknown effect {self.effect!r}")

    def matches(self, s: StateSnapshot) -> bool:
        actual = resolve_path(s, self.path)
        if self.comparator == "eq":
            return actual == self.value
        if self.comparator == "ne":
            return actual != self.value
        if not _is_number(actual) or not _is_number(self.value):
            raise MissingFieldError(self.path)
        if self.comparator == "ge":
            return actual >= self.value
        return actual <= self.value
