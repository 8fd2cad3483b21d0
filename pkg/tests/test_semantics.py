from __future__ import annotations

import pytest

from gamebench.parsing import ToolCall
from gamebench.semantics import (
    MissingArgumentError,
    SemanticControl,
    SemanticControlMap,
    UnknownCellError,
    UnknownControlError,
    bind_arguments,
    render_action_list,
    resolve_control,
)


def small_map() -> SemanticControlMap:
    return SemanticControlMap([
        SemanticControl(id="wait", description="Do nothing.",
                        binding={"kind": "wait", "duration_ms": 200}),
        SemanticControl(id="move_left", description="Slide all tiles left.",
                        aliases=("left",),
                        binding={"kind": "press_key", "key": "ArrowLeft"}),
        SemanticControl(id="flag_cell", description='Flag a cell by id (cell="a1".."i9").',
                        required_args=frozenset({"cell"}),
                        binding={"kind": "click", "button": "right", "at": "$cell"},
                        cell_bindings={"a1": (120, 120), "b1": (136, 120)}),
    ])


class TestResolve:
    def test_case_insensitive(self):
        control = resolve_control(ToolCall("MOVE_LEFT", {}), small_map())
        assert control.id == "move_left"

    def test_alias(self):
        assert resolve_control(ToolCall("LEFT", {}), small_map()).id == "move_left"

    def test_wait(self):
        assert resolve_control(ToolCall("wait", {}), small_map()).id == "wait"

    def test_identifier_fallback_order(self):
        call = ToolCall("computer_use", {"action": "move_left"})
        assert resolve_control(call, small_map()).id == "move_left"
        call = ToolCall("tooling", {"tool_name": "wait"})
        assert resolve_control(call, small_map()).id == "wait"
        call = ToolCall("tooling", {"tool_id": "flag_cell"})
        assert resolve_control(call, small_map()).id == "flag_cell"

    def test_unknown_control(self):
        with pytest.raises(UnknownControlError):
            resolve_control(ToolCall("craft_a_workbench", {}), small_map())

    def test_duplicate_keys_rejected(self):
        with pytest.raises(ValueError):
            SemanticControlMap([
                SemanticControl(id="jump", description="x", binding={"kind": "wait"}),
                SemanticControl(id="JUMP", description="y", binding={"kind": "wait"}),
            ])


class TestBind:
    def test_cell_expansion(self):
        control = small_map().get("flag_cell")
        action = bind_arguments(control, ToolCall("flag_cell", {"cell": "a1"}))
        assert action.kind == "click"
        assert (action.x, action.y, action.button) == (120, 120, "right")

    def test_constant_binding(self):
        control = small_map().get("move_left")
        action = bind_arguments(control, ToolCall("move_left", {}))
        assert action.kind == "press_key" and action.key == "ArrowLeft"

    def test_unknown_cell(self):
        control = small_map().get("flag_cell")
        with pytest.raises(UnknownCellError):
            bind_arguments(control, ToolCall("flag_cell", {"cell": "z9"}))

    def test_missing_argument(self):
        control = small_map().get("flag_cell")
        with pytest.raises(MissingArgumentError):
            bind_arguments(control, ToolCall("flag_cell", {}))

    def test_extra_arguments_ignored(self):
        control = small_map().get("move_left")
        action = bind_arguments(control, ToolCall("move_left", {"speed": "fast"}))
        assert action.key == "ArrowLeft"

    def test_determinism(self):
        control = small_map().get("flag_cell")
        call = ToolCall("flag_cell", {"cell": "b1"})
        assert bind_arguments(control, call) == bind_arguments(control, call)

    def test_placeholder_coverage_checked(self):
        with pytest.raises(ValueError):
            SemanticControl(id="bad", description="x",
                            binding={"kind": "press_key", "key": "$direction"})


class TestRenderActionList:
    def test_paper_2048_block(self, registry):
        block = render_action_list(registry.game("g2048").definition.role().semantic_map)
        assert block == (
            "REGISTERED ACTIONS (Semantic Controls).\n"
            "Choose exactly one action per step:\n"
            "\n"
            "- wait: Do nothing.\n"
            "- move_up: Slide all tiles up.\n"
            "- move_down: Slide all tiles down.\n"
            "- move_left: Slide all tiles left.\n"
            "- move_right: Slide all tiles right.\n"
        )

    def test_paper_minesweeper_lines(self, registry):
        block = render_action_list(registry.game("minesweeper").definition.role().semantic_map)
        assert '- reveal_cell: Reveal a cell by id (cell="a1".."i9"). (required: cell)' in block
        assert '- flag_cell: Flag a cell by id (cell="a1".."i9"). (required: cell)' in block

    def test_single_control_list(self):
        m = SemanticControlMap([
            SemanticControl(id="wait", description="Do nothing.",
                            binding={"kind": "wait", "duration_ms": 200}),
        ])
        lines = [l for l in render_action_list(m).splitlines() if l.startswith("- ")]
        assert lines == ["- wait: Do nothing."]

    def test_registry_and_list_never_diverge(self, registry):
        for bundle in registry.games.values():
            for role in bundle.definition.roles:
                block = render_action_list(role.semantic_map)
                listed = {l.split(":", 1)[0][2:] for l in block.splitlines() if l.startswith("- ")}
                registered = {c.id for c in role.semantic_map.controls}
                assert listed == registered
                for control_id in registered:
                    assert role.semantic_map.get(control_id) is not None

    def test_empty_registry_rejected(self):
        with pytest.raises(ValueError):
            render_action_list(SemanticControlMap([]))
