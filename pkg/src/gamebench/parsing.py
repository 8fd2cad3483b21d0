"""Parsers for raw model output.

Three observed output shapes are supported, one per agent profile:
structured provider function-call records, ``<tool_call>`` tagged text
blocks, and a small action DSL (``hotkey(key='w d')`` style).  All parsers
are total: any input yields exactly one :class:`ParseOutcome`, never an
exception.  Output that contains no executable call is a no-tool-call
(NTC); a parsed call can still fail downstream resolution or legality and
be classified out-of-space (OOS).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Mapping

FORMAT_KINDS = ("structured_call", "tagged_blocks", "action_dsl", "scripted")


@dataclass(frozen=True)
class ToolCall:
    name: str
    arguments: dict[str, Any] = field(default_factory=dict)
    reasoning: str | None = None
    raw_text: str = ""


@dataclass(frozen=True)
class ParseOutcome:
    """Either a call or a no-tool-call reason; exactly one is set."""

    call: ToolCall | None = None
    reason: str | None = None

    def __post_init__(self) -> None:
        if (self.call is None) == (self.reason is None):
            raise ValueError("outcome must be exactly one of call / no_tool_call")

    @property
    def ok(self) -> bool:
        return self.call is not None

    @classmethod
    def of(cls, call: ToolCall) -> "ParseOutcome":
        return cls(call=call)

    @classmethod
    def no_tool_call(cls, reason: str) -> "ParseOutcome":
        return cls(reason=reason)


def parse_structured_call(payload: Any) -> ParseOutcome:
    """Parse a provider function-call record.

    Accepts a single record ``{"name": ..., "arguments": {...}}`` (also the
    OpenAI-style ``{"function": {...}}`` wrapper). A list is accepted only
    when it holds exactly one record: bundling several calls in one step
    violates action atomicity and is a no-tool-call.
    """
    if isinstance(payload, (list, tuple)):
        if len(payload) != 1:
            return ParseOutcome.no_tool_call(
                f"{len(payload)} tool calls in one step; exactly one is allowed"
            )
        payload = payload[0]
    if not isinstance(payload, Mapping):
        return ParseOutcome.no_tool_call("payload is not a function-call record")
    record = payload.get("function") if isinstance(payload.get("function"), Mapping) else payload
    name = record.get("name")
    if not isinstance(name, str) or not name:
        return ParseOutcome.no_tool_call("function-call record has no name")
    arguments = record.get("arguments", {})
    if isinstance(arguments, str):
        try:
            arguments = json.loads(arguments) if arguments.strip() else {}
        except json.JSONDecodeError:
            return ParseOutcome.no_tool_call("arguments string is not valid JSON")
    if arguments is None:
        arguments = {}
    if not isinstance(arguments, Mapping):
        return ParseOutcome.no_tool_call("arguments must be an object")
    reasoning = payload.get("reasoning") if isinstance(payload.get("reasoning"), str) else None
    return ParseOutcome.of(ToolCall(
        name=name,
        arguments=dict(arguments),
        reasoning=reasoning,
        raw_text=json.dumps({"name": name, "arguments": dict(arguments)}, sort_keys=True),
    ))


_TOOL_CALL_RE = re.compile(r"<tool_call>(.*?)</tool_call>", re.DOTALL)
_THINK_RE = re.compile(r"<think>(.*?)</think>", re.DOTALL)


def parse_tagged_blocks(text: str) -> ParseOutcome:
    """Parse the last complete ``<tool_call>`` block out of raw model text.

    The block body must be JSON of the shape ``{"name": ..., "arguments":
    {...}}``. An unterminated or absent block (truncated reasoning is the
    common cause) is a no-tool-call.
    """
    if not isinstance(text, str):
        return ParseOutcome.no_tool_call("output is not text")
    blocks = _TOOL_CALL_RE.findall(text)
    if not blocks:
        if "<tool_call>" in text:
            return ParseOutcome.no_tool_call("tool_call block is never closed (truncated output)")
        return ParseOutcome.no_tool_call("no tool_call block in output")
    body = blocks[-1].strip()
    try:
        data = json.loads(body)
    except json.JSONDecodeError:
        return ParseOutcome.no_tool_call("tool_call body is not valid JSON")
    if not isinstance(data, Mapping):
        return ParseOutcome.no_tool_call("tool_call body must be a JSON object")
    name = data.get("name")
    if not isinstance(name, str) or not name:
        return ParseOutcome.no_tool_call("tool_call body has no name")
    arguments = data.get("arguments", {})
    if arguments is None:
        arguments = {}
    if not isinstance(arguments, Mapping):
        return ParseOutcome.no_tool_call("tool_call arguments must be an object")
    thinks = _THINK_RE.findall(text)
    reasoning = thinks[-1].strip() if thinks else None
    return ParseOutcome.of(ToolCall(
        name=name, arguments=dict(arguments), reasoning=reasoning, raw_text=text,
    ))


_DSL_HOTKEY_RE = re.compile(r"hotkey\(\s*key\s*=\s*['\"]([^'\"]+)['\"]\s*\)")
_DSL_POINT_RE = re.compile(
    r"(click|right_single)\(\s*point\s*=\s*['\"]<point>(-?\d+)\s+(-?\d+)</point>['\"]\s*\)"
)
_DSL_WAIT_RE = re.compile(r"\bwait\(\s*\)")


def parse_action_dsl(text: str) -> ParseOutcome:
    """Parse the key/click action DSL.

    Recognised commands: ``hotkey(key='<k1> [k2]')``, ``click(point=
    '<point>x y</point>')``, ``right_single(point=...)`` and ``wait()``.
    Exactly one command per step; several recognisable commands form a
    macro and are rejected.
    """
    if not isinstance(text, str):
        return ParseOutcome.no_tool_call("output is not text")
    found: list[tuple[int, ToolCall]] = []
    for m in _DSL_HOTKEY_RE.finditer(text):
        keys = m.group(1).split(" ")
        keys = [k for k in keys if k]
        if len(keys) == 1:
            call = ToolCall("press_key", {"key": keys[0]}, raw_text=text)
        else:
            call = ToolCall("press_keys", {"keys": keys}, raw_text=text)
        found.append((m.start(), call))
    for m in _DSL_POINT_RE.finditer(text):
        button = "left" if m.group(1) == "click" else "right"
        found.append((m.start(), ToolCall(
            "click", {"x": int(m.group(2)), "y": int(m.group(3)), "button": button},
            raw_text=text,
        )))
    for m in _DSL_WAIT_RE.finditer(text):
        found.append((m.start(), ToolCall("wait", {}, raw_text=text)))
    if not found:
        return ParseOutcome.no_tool_call("no recognisable action command in output")
    if len(found) > 1:
        return ParseOutcome.no_tool_call(
            f"{len(found)} action commands in one step; exactly one is allowed"
        )
    return ParseOutcome.of(found[0][1])


def parse_output(kind: str, payload: Any) -> ParseOutcome:
    """Dispatch on a profile's declared output format (no cross-format guessing)."""
    if kind in ("structured_call", "scripted"):
        return parse_structured_call(payload)
    if kind == "tagged_blocks":
        return parse_tagged_blocks(payload)
    if kind == "action_dsl":
        return parse_action_dsl(payload)
    raise ValueError(f"unknown output format {kind!r}")


def classify_invalid(outcome: ParseOutcome, resolution_valid: bool | None) -> str:
    """Final validity category for one model step.

    `resolution_valid` is the downstream verdict: True when the call
    resolved and passed role validation, False when it failed either,
    None when no call existed to resolve.
    """
    if not outcome.ok:
        return "NTC"
    if not resolution_valid:
        return "OOS"
    return "valid"


# --- Renderers (inverse of the parsers; used by scripted agents) ---------

def render_structured(call: ToolCall) -> dict[str, Any]:
    payload: dict[str, Any] = {"name": call.name, "arguments": dict(call.arguments)}
    if call.reasoning:
        payload["reasoning"] = call.reasoning
    return payload


def render_tagged(call: ToolCall) -> str:
    think = f"<think>{call.reasoning or 'act'}</think>\n"
    body = json.dumps({"name": call.name, "arguments": dict(call.arguments)})
    return f"{think}<tool_call>{body}</tool_call>"


def render_dsl(call: ToolCall) -> str:
    """Render a call in the action DSL. Only key/click/wait calls fit."""
    if call.name == "press_key":
        return f"hotkey(key='{call.arguments['key']}')"
    if call.name == "press_keys":
        return f"hotkey(key='{' '.join(call.arguments['keys'])}')"
    if call.name == "click":
        fn = "right_single" if call.arguments.get("button") == "right" else "click"
        return f"{fn}(point='<point>{call.arguments['x']} {call.arguments['y']}</point>')"
    if call.name == "wait":
        return "wait()"
    raise ValueError(f"call {call.name!r} is not expressible in the action DSL")


def render_output(kind: str, call: ToolCall) -> Any:
    if kind in ("structured_call", "scripted"):
        return render_structured(call)
    if kind == "tagged_blocks":
        return render_tagged(call)
    if kind == "action_dsl":
        return render_dsl(call)
    raise ValueError(f"unknown output format {kind!r}")
