"""Semantic action registry and deterministic control resolution.

A generalist agent emits semantic control ids ("move_left", "flag_cell"),
not raw keys or coordinates.  Each game role declares its registry; the
resolver folds case, honours aliases, merges runtime arguments into the
declared binding (expanding cell references through ``cell_bindings``) and
yields a fully concrete :class:`~gamebench.controls.NormalizedAction`.
Fixed (call, registry) input always yields the same action.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .controls import NormalizedAction
from .parsing import ToolCall


class UnknownControlError(KeyError):
    def __init__(self, identifier: str) -> None:
        super().__init__(identifier)
        self.identifier = identifier


class MissingArgumentError(ValueError):
    def __init__(self, name: str) -> None:
        super().__init__(f"missing required argument {name!r}")
        self.argument = name


class UnknownCellError(ValueError):
    def __init__(self, cell: str) -> None:
        super().__init__(f"unknown cell id {cell!r}")
        self.cell = cell


@dataclass(frozen=True)
class SemanticControl:
    id: str
    description: str
    binding: Mapping[str, Any]
    aliases: tuple[str, ...] = ()
    required_args: frozenset[str] = frozenset()
    cell_bindings: Mapping[str, tuple[int, int]] | None = None

    def __post_init__(self) -> None:
        placeholders = {
            str(v)[1:] for v in self.binding.values()
            if isinstance(v, str) and v.startswith("$")
        }
        allowed = set(self.required_args) | {"cell"}
        if not placeholders <= allowed:
            raise ValueError(
                f"{self.id}: binding placeholders {sorted(placeholders - allowed)} "
                "not covered by required_args"
            )


class SemanticControlMap:
    """Registry for one game role; lookup is case-folded and alias-aware."""

    def __init__(self, controls: list[SemanticControl]) -> None:
        self.controls = list(controls)
        self._lookup: dict[str, SemanticControl] = {}
        for control in self.controls:
            for key in (control.id, *control.aliases):
                folded = key.casefold()
                if folded in self._lookup:
                    raise ValueError(f"duplicate control key {key!r} after case folding")
                self._lookup[folded] = control

    def __len__(self) -> int:
        return len(self.controls)

    def get(self, identifier: str) -> SemanticControl | None:
        return self._lookup.get(identifier.casefold())


def resolve_control(call: ToolCall, m: SemanticControlMap) -> SemanticControl:
    """Resolve the control a call names.

    Candidate identifiers are taken from the call name, then the
    ``action`` / ``tool_name`` / ``tool_id`` arguments, in that order; the
    first that resolves wins.
    """
    candidates = [call.name]
    for arg in ("action", "tool_name", "tool_id"):
        value = call.arguments.get(arg)
        if isinstance(value, str) and value:
            candidates.append(value)
    for candidate in candidates:
        if not candidate:
            continue
        control = m.get(candidate)
        if control is not None:
            return control
    raise UnknownControlError(candidates[0])


def bind_arguments(c: SemanticControl, call: ToolCall) -> NormalizedAction:
    """Merge runtime arguments into the declared binding.

    Missing required arguments and unresolvable cell ids raise; extra
    arguments are ignored.
    """
    for name in sorted(c.required_args):
        if name not in call.arguments:
            raise MissingArgumentError(name)
    fields: dict[str, Any] = {}
    for key, value in c.binding.items():
        if isinstance(value, str) and value.startswith("$"):
            arg_name = value[1:]
            if arg_name == "cell" and "cell" in c.required_args:
                cell_id = str(call.arguments["cell"])
                if not c.cell_bindings or cell_id not in c.cell_bindings:
                    raise UnknownCellError(cell_id)
                x, y = c.cell_bindings[cell_id]
                fields["x"], fields["y"] = int(x), int(y)
                continue
            fields[key] = call.arguments[arg_name]
        else:
            fields[key] = value
    return NormalizedAction.from_dict(fields)


ACTION_LIST_HEADER = "REGISTERED ACTIONS (Semantic Controls).\nChoose exactly one action per step:\n"


def render_action_list(m: SemanticControlMap) -> str:
    """Prompt block listing the registry, in declaration order.

    The rendered list is built from the same registry the executor
    resolves against, so the prompt can never drift from the executable
    action space.
    """
    if not len(m):
        raise ValueError("cannot render an empty registry")
    lines = [ACTION_LIST_HEADER]
    for control in m.controls:
        line = f"- {control.id}: {control.description}"
        if control.required_args:
            line += f" (required: {', '.join(sorted(control.required_args))})"
        lines.append(line)
    return "\n".join(lines) + "\n"
