"""Unified executable control space.

Two layers: :class:`NormalizedAction` is the runtime action schema every
agent output is normalised into (one per model step), and
:class:`AtomicEvent` is the executor-level primitive stream an action
lowers to (key/mouse down-up, move, scroll, wait).  Legality is role-aware
and checked against :class:`RoleControls` before lowering; invalid actions
reduce to no-ops that still consume a step.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

import yaml

MOUSE_KINDS = frozenset({"click", "click_hold", "drag", "mouse_move", "scroll"})
KEY_KINDS = frozenset({"type", "press_key", "press_keys"})
ACTION_KINDS = MOUSE_KINDS | KEY_KINDS | {"wait"}

DEFAULT_HOLD_MS = 200
MIN_DURATION_MS = 1
MAX_DURATION_MS = 10_000


def _load_key_table() -> tuple[frozenset[str], dict[str, str]]:
    text = importlib.resources.files("gamebench.configs").joinpath("keys.yaml").read_text()
    data = yaml.safe_load(text)
    return frozenset(data["canonical_keys"]), dict(data["aliases"])


CANONICAL_KEYS, KEY_ALIASES = _load_key_table()


def normalize_key_alias(key: str) -> str:
    """Map a raw key name onto its canonical form.

    Case-insensitive alias lookup; single letters lowercase; anything
    unknown passes through unchanged.
    """
    if not key:
        raise ValueError("key must be non-empty")
    if key in CANONICAL_KEYS:
        return key
    low = key.lower()
    if low in KEY_ALIASES:
        return KEY_ALIASES[low]
    if len(key) == 1 and key.isalpha():
        return key.lower()
    return key


@dataclass(frozen=True)
class AtomicEvent:
    """One executor-level primitive. `kind` selects which fields apply."""

    kind: str
    x: int | None = None
    y: int | None = None
    button: str | None = None
    amount: int | None = None
    key: str | None = None
    duration_ms: int | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        for name in ("x", "y", "button", "amount", "key", "duration_ms"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    @classmethod
    def mouse_move(cls, x: int, y: int) -> "AtomicEvent":
        return cls("mouse_move", x=x, y=y)

    @classmethod
    def mouse_down(cls, button: str = "left") -> "AtomicEvent":
        return cls("mouse_down", button=button)

    @classmethod
    def mouse_up(cls, button: str = "left") -> "AtomicEvent":
        return cls("mouse_up", button=button)

    @classmethod
    def scroll(cls, amount: int) -> "AtomicEvent":
        return cls("scroll", amount=amount)

    @classmethod
    def key_down(cls, key: str) -> "AtomicEvent":
        return cls("key_down", key=key)

    @classmethod
    def key_up(cls, key: str) -> "AtomicEvent":
        return cls("key_up", key=key)

    @classmethod
    def wait(cls, duration_ms: int) -> "AtomicEvent":
        return cls("wait", duration_ms=duration_ms)

    @classmethod
    def idle(cls) -> "AtomicEvent":
        return cls("idle")


class ActionShapeError(ValueError):
    """The action payload is structurally unusable (bad kind/fields)."""


@dataclass(frozen=True)
class NormalizedAction:
    """Exactly one runtime action variant, selected by `kind`."""

    kind: str
    x: int | None = None
    y: int | None = None
    x2: int | None = None
    y2: int | None = None
    button: str = "left"
    amount: int | None = None
    text: str | None = None
    key: str | None = None
    keys: tuple[str, ...] | None = None
    duration_ms: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ACTION_KINDS:
            raise ActionShapeError(f"unknown action kind {self.kind!r}")
        if self.kind in ("click", "click_hold", "mouse_move") and (self.x is None or self.y is None):
            raise ActionShapeError(f"{self.kind} requires x and y")
        if self.kind == "drag" and None in (self.x, self.y, self.x2, self.y2):
            raise ActionShapeError("drag requires x, y, x2, y2")
        if self.kind == "scroll" and self.amount is None:
            raise ActionShapeError("scroll requires amount")
        if self.kind == "type" and not self.text:
            raise ActionShapeError("type requires non-empty text")
        if self.kind == "press_key" and not self.key:
            raise ActionShapeError("press_key requires key")
        if self.kind == "press_keys":
            keys = self.keys or ()
            if not (2 <= len(keys) <= 3) or len(set(keys)) != len(keys):
                raise ActionShapeError("press_keys requires 2-3 distinct keys")
        if self.duration_ms is not None and self.duration_ms < 0:
            raise ActionShapeError("duration must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        for name in ("x", "y", "x2", "y2", "amount", "text", "key", "duration_ms"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.kind in ("click", "click_hold"):
            out["button"] = self.button
        if self.keys is not None:
            out["keys"] = list(self.keys)
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "NormalizedAction":
        if not isinstance(data, Mapping) or "kind" not in data:
            raise ActionShapeError("action payload must be an object with a kind")
        keys = data.get("keys")
        return cls(
            kind=str(data["kind"]),
            x=_opt_int(data.get("x"), "x"),
            y=_opt_int(data.get("y"), "y"),
            x2=_opt_int(data.get("x2"), "x2"),
            y2=_opt_int(data.get("y2"), "y2"),
            button=str(data.get("button", "left")),
            amount=_opt_int(data.get("amount"), "amount"),
            text=data.get("text"),
            key=data.get("key"),
            keys=tuple(keys) if keys is not None else None,
            duration_ms=_opt_int(data.get("duration_ms"), "duration_ms"),
        )

    def describe(self) -> str:
        """Compact human-readable rendering, used in memory/action history."""
        k = self.kind
        if k == "press_key":
            return f"press_key({self.key})"
        if k == "press_keys":
            return f"press_keys({'+'.join(self.keys or ())})"
        if k in ("click", "click_hold"):
            return f"{k}({self.x},{self.y},{self.button})"
        if k == "drag":
            return f"drag({self.x},{self.y}->{self.x2},{self.y2})"
        if k == "mouse_move":
            return f"mouse_move({self.x},{self.y})"
        if k == "scroll":
            return f"scroll({self.amount})"
        if k == "type":
            return f"type({self.text})"
        return f"wait({self.duration_ms if self.duration_ms is not None else DEFAULT_HOLD_MS})"


def _opt_int(value: Any, name: str) -> int | None:
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ActionShapeError(f"{name} must be a number")
    return int(value)


@dataclass(frozen=True)
class RoleControls:
    """Role-declared legality: which keys/clicks a role may use."""

    allowed_keys: frozenset[str] = frozenset()
    allow_clicks: bool = False
    hold_duration_ms: int = DEFAULT_HOLD_MS
    key_durations: Mapping[str, int] = field(default_factory=dict)
    alias_groups: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key, dur in self.key_durations.items():
            if key not in self.allowed_keys:
                raise ValueError(f"key_durations key {key!r} not in allowed_keys")
            if not (MIN_DURATION_MS <= dur <= MAX_DURATION_MS):
                raise ValueError(f"duration for {key!r} outside [1, 10000] ms")
        if not (MIN_DURATION_MS <= self.hold_duration_ms <= MAX_DURATION_MS):
            raise ValueError("hold_duration outside [1, 10000] ms")


@dataclass(frozen=True)
class ValidityVerdict:
    valid: bool
    category: str | None = None  # NTC | OOS, present iff invalid
    reason: str = ""
    substituted_key: str | None = None

    def __post_init__(self) -> None:
        if self.valid and self.category is not None:
            raise ValueError("valid verdicts carry no category")
        if not self.valid and self.category not in ("NTC", "OOS"):
            raise ValueError("invalid verdicts need category NTC or OOS")


def _effective_key(key: str, rc: RoleControls) -> tuple[str | None, str | None]:
    """(usable key, substitution) or (None, None) when the key is illegal."""
    canon = normalize_key_alias(key)
    if canon in rc.allowed_keys:
        return canon, None
    fallback = rc.alias_groups.get(canon)
    if fallback is not None and fallback in rc.allowed_keys:
        return fallback, fallback
    return None, None


def validate_action(a: NormalizedAction, rc: RoleControls) -> ValidityVerdict:
    """Role-aware legality check. Pure function of (action, role)."""
    if a.kind == "wait":
        return ValidityVerdict(valid=True)
    if a.kind in MOUSE_KINDS:
        if rc.allow_clicks:
            return ValidityVerdict(valid=True)
        return ValidityVerdict(
            valid=False, category="OOS",
            reason=f"{a.kind}: mouse control is outside the allowed control space",
        )
    # keyboard variants
    requested = list(a.keys) if a.kind == "press_keys" else (
        list(a.text) if a.kind == "type" else [a.key]
    )
    substituted = None
    for key in requested:
        usable, sub = _effective_key(key, rc)
        if usable is None:
            return ValidityVerdict(
                valid=False, category="OOS",
                reason=f"key {key!r} is not in the allowed key set",
            )
        if sub is not None and substituted is None:
            substituted = sub
    return ValidityVerdict(valid=True, substituted_key=substituted)


def lower_to_atomic_events(a: NormalizedAction, rc: RoleControls) -> list[AtomicEvent]:
    """Deterministic expansion of a valid action into atomic events.

    Key holds wait for the role's configured duration between down and up;
    multi-key combos release in last-in-first-out order so no key is ever
    left held.
    """
    kind = a.kind
    if kind == "wait":
        return [AtomicEvent.wait(a.duration_ms if a.duration_ms is not None else rc.hold_duration_ms)]
    if kind == "mouse_move":
        return [AtomicEvent.mouse_move(a.x, a.y)]
    if kind == "scroll":
        return [AtomicEvent.scroll(a.amount)]
    if kind == "click":
        return [
            AtomicEvent.mouse_move(a.x, a.y),
            AtomicEvent.mouse_down(a.button),
            AtomicEvent.mouse_up(a.button),
        ]
    if kind == "click_hold":
        return [
            AtomicEvent.mouse_move(a.x, a.y),
            AtomicEvent.mouse_down(a.button),
            AtomicEvent.wait(a.duration_ms if a.duration_ms is not None else rc.hold_duration_ms),
            AtomicEvent.mouse_up(a.button),
        ]
    if kind == "drag":
        return [
            AtomicEvent.mouse_move(a.x, a.y),
            AtomicEvent.mouse_down(a.button),
            AtomicEvent.mouse_move(a.x2, a.y2),
            AtomicEvent.mouse_up(a.button),
        ]
    if kind == "type":
        events: list[AtomicEvent] = []
        for ch in a.text:
            usable, _ = _effective_key(ch, rc)
            events.append(AtomicEvent.key_down(usable or ch))
            events.append(AtomicEvent.key_up(usable or ch))
        return events
    if kind == "press_key":
        usable, _ = _effective_key(a.key, rc)
        key = usable if usable is not None else normalize_key_alias(a.key)
        duration = a.duration_ms if a.duration_ms is not None else rc.key_durations.get(key, rc.hold_duration_ms)
        return [AtomicEvent.key_down(key), AtomicEvent.wait(duration), AtomicEvent.key_up(key)]
    if kind == "press_keys":
        resolved = []
        for raw in a.keys:
            usable, _ = _effective_key(raw, rc)
            resolved.append(usable if usable is not None else normalize_key_alias(raw))
        duration = a.duration_ms if a.duration_ms is not None else rc.hold_duration_ms
        events = [AtomicEvent.key_down(k) for k in resolved]
        events.append(AtomicEvent.wait(duration))
        events.extend(AtomicEvent.key_up(k) for k in reversed(resolved))
        return events
    raise ActionShapeError(f"cannot lower action kind {kind!r}")


def execution_window_ms(events: list[AtomicEvent], default_ms: int = DEFAULT_HOLD_MS) -> tuple[int, int]:
    """(total wait already inside events, remainder to reach the window).

    Every step advances the environment by at least the default execution
    window; actions with longer holds define their own window.
    """
    consumed = sum(e.duration_ms or 0 for e in events if e.kind == "wait")
    return consumed, max(0, default_ms - consumed)


@dataclass
class ValidityCounters:
    proposed: int = 0
    valid: int = 0
    ntc: int = 0
    oos: int = 0

    def as_dict(self) -> dict[str, int]:
        return {"proposed": self.proposed, "valid": self.valid, "ntc": self.ntc, "oos": self.oos}

    @classmethod
    def from_dict(cls, data: Mapping[str, int]) -> "ValidityCounters":
        return cls(
            proposed=int(data.get("proposed", 0)),
            valid=int(data.get("valid", 0)),
            ntc=int(data.get("ntc", 0)),
            oos=int(data.get("oos", 0)),
        )


def record_validity(c: ValidityCounters, v: ValidityVerdict) -> ValidityCounters:
    """Bump proposed plus exactly one of valid/ntc/oos."""
    c.proposed += 1
    if v.valid:
        c.valid += 1
    elif v.category == "NTC":
        c.ntc += 1
    else:
        c.oos += 1
    assert c.proposed == c.valid + c.ntc + c.oos
    return c


# Computer-use tool-call names and how they map onto the normalized schema.
_CUA_CLICKS = {
    "click": "left", "left_click": "left", "right_click": "right",
    "double_click": "left", "middle_click": "middle",
}


class UnknownCuaActionError(ValueError):
    pass


class MissingArgumentError(ValueError):
    def __init__(self, name: str) -> None:
        super().__init__(f"missing required argument {name!r}")
        self.argument = name


def normalize_cua_call(name: str, arguments: Mapping[str, Any]) -> NormalizedAction:
    """Normalise a computer-use tool call into a NormalizedAction.

    Raises UnknownCuaActionError / MissingArgumentError / ActionShapeError
    for calls outside the schema; callers classify those as OOS.
    """
    name = name.lower()
    args = dict(arguments or {})
    if name in _CUA_CLICKS:
        return NormalizedAction(
            kind="click", x=_require_int(args, "x"), y=_require_int(args, "y"),
            button=str(args.get("button", _CUA_CLICKS[name])),
        )
    if name in ("click_hold", "left_click_hold"):
        return NormalizedAction(
            kind="click_hold", x=_require_int(args, "x"), y=_require_int(args, "y"),
            button=str(args.get("button", "left")),
            duration_ms=_opt_int(args.get("duration_ms"), "duration_ms"),
        )
    if name == "drag":
        return NormalizedAction(
            kind="drag", x=_require_int(args, "x"), y=_require_int(args, "y"),
            x2=_require_int(args, "x2"), y2=_require_int(args, "y2"),
        )
    if name == "mouse_move":
        return NormalizedAction(kind="mouse_move", x=_require_int(args, "x"), y=_require_int(args, "y"))
    if name in ("scroll", "scroll_up", "scroll_down"):
        amount = _opt_int(args.get("amount", args.get("n", 1)), "amount")
        if amount is None:
            raise MissingArgumentError("amount")
        if name == "scroll_down":
            amount = -abs(amount)
        elif name == "scroll_up":
            amount = abs(amount)
        return NormalizedAction(kind="scroll", amount=amount)
    if name == "type":
        text = args.get("text")
        if not text:
            raise MissingArgumentError("text")
        return NormalizedAction(kind="type", text=str(text))
    if name in ("press_key", "key", "keypress"):
        key = args.get("key")
        if not key:
            raise MissingArgumentError("key")
        return NormalizedAction(
            kind="press_key", key=str(key),
            duration_ms=_opt_int(args.get("duration_ms"), "duration_ms"),
        )
    if name in ("press_keys", "hotkey"):
        keys = args.get("keys") or args.get("key")
        if isinstance(keys, str):
            keys = keys.split()
        if not keys:
            raise MissingArgumentError("keys")
        if len(keys) == 1:
            return NormalizedAction(kind="press_key", key=str(keys[0]))
        return NormalizedAction(
            kind="press_keys", keys=tuple(str(k) for k in keys),
            duration_ms=_opt_int(args.get("duration_ms"), "duration_ms"),
        )
    if name == "wait":
        return NormalizedAction(kind="wait", duration_ms=_opt_int(args.get("duration_ms"), "duration_ms"))
    raise UnknownCuaActionError(f"{name!r} is not a computer-use action")


def _require_int(args: Mapping[str, Any], name: str) -> int:
    value = args.get(name)
    if value is None:
        raise MissingArgumentError(name)
    converted = _opt_int(value, name)
    assert converted is not None
    return converted


def with_substitution(a: NormalizedAction, rc: RoleControls) -> NormalizedAction:
    """Rewrite keys through alias-group fallback so lowering sees legal keys."""
    if a.kind == "press_key":
        usable, _ = _effective_key(a.key, rc)
        if usable is not None and usable != a.key:
            return replace(a, key=usable)
    elif a.kind == "press_keys":
        resolved = []
        changed = False
        for raw in a.keys:
            usable, _ = _effective_key(raw, rc)
            resolved.append(usable if usable is not None else raw)
            changed = changed or (usable is not None and usable != raw)
        if changed:
            return replace(a, keys=tuple(resolved))
    return a
