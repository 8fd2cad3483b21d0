from __future__ import annotations

import json
from pathlib import Path

from hypothesis import given, strategies as st

from gamebench.parsing import (
    ParseOutcome,
    ToolCall,
    classify_invalid,
    parse_action_dsl,
    parse_structured_call,
    parse_tagged_blocks,
    render_dsl,
    render_structured,
    render_tagged,
)

CORPUS = Path(__file__).parent / "data" / "parser_corpus.jsonl"


class TestStructured:
    def test_plain_record(self):
        outcome = parse_structured_call({"name": "move_left", "arguments": {}})
        assert outcome.ok and outcome.call.name == "move_left"

    def test_required_argument(self):
        outcome = parse_structured_call({"name": "flag_cell", "arguments": {"cell": "a1"}})
        assert outcome.ok and outcome.call.arguments == {"cell": "a1"}

    def test_missing_name(self):
        outcome = parse_structured_call({"arguments": {}})
        assert not outcome.ok

    def test_openai_wrapper_and_json_string_args(self):
        outcome = parse_structured_call(
            {"function": {"name": "jump", "arguments": '{"height": 2}'}}
        )
        assert outcome.ok and outcome.call.arguments == {"height": 2}

    def test_single_item_list(self):
        assert parse_structured_call([{"name": "jump", "arguments": {}}]).ok

    def test_multiple_calls_rejected(self):
        outcome = parse_structured_call(
            [{"name": "jump", "arguments": {}}, {"name": "duck", "arguments": {}}]
        )
        assert not outcome.ok and "exactly one" in outcome.reason


class TestTaggedBlocks:
    def test_think_and_call(self):
        text = '<think>jump now</think><tool_call>{"name":"jump","arguments":{}}</tool_call>'
        outcome = parse_tagged_blocks(text)
        assert outcome.ok
        assert outcome.call.name == "jump"
        assert outcome.call.reasoning == "jump now"

    def test_truncated_block(self):
        text = '<think> I should first inspect the scene carefully before acting... </think> <tool_call> {"name": " '
        outcome = parse_tagged_blocks(text)
        assert not outcome.ok and "closed" in outcome.reason

    def test_plain_prose(self):
        outcome = parse_tagged_blocks(
            "The obstacle is coming from the left, so I should move left first."
        )
        assert not outcome.ok

    def test_last_block_wins(self):
        text = (
            '<tool_call>{"name":"move_left","arguments":{}}</tool_call>'
            '<tool_call>{"name":"move_right","arguments":{}}</tool_call>'
        )
        outcome = parse_tagged_blocks(text)
        assert outcome.ok and outcome.call.name == "move_right"

    def test_empty_arguments_optional(self):
        assert parse_tagged_blocks('<tool_call>{"name":"wait"}</tool_call>').ok
        assert parse_tagged_blocks('<tool_call>{"name":"wait","arguments":{}}</tool_call>').ok

    def test_invalid_json_body(self):
        assert not parse_tagged_blocks("<tool_call>{oops}</tool_call>").ok


class TestActionDsl:
    def test_multi_key_hotkey(self):
        outcome = parse_action_dsl("hotkey(key='w d')")
        assert outcome.ok
        assert outcome.call.name == "press_keys"
        assert outcome.call.arguments == {"keys": ["w", "d"]}

    def test_single_key_hotkey(self):
        outcome = parse_action_dsl("hotkey(key='arrowup')")
        assert outcome.ok and outcome.call.name == "press_key"

    def test_click_point(self):
        outcome = parse_action_dsl("click(point='<point>640 360</point>')")
        assert outcome.ok
        assert outcome.call.arguments == {"x": 640, "y": 360, "button": "left"}

    def test_right_single(self):
        outcome = parse_action_dsl("right_single(point='<point>10 20</point>')")
        assert outcome.ok and outcome.call.arguments["button"] == "right"

    def test_wait(self):
        assert parse_action_dsl("wait()").ok

    def test_unrecognized_grammar(self):
        assert not parse_action_dsl("fly_to_moon(now)").ok

    def test_macro_rejected(self):
        outcome = parse_action_dsl("hotkey(key='w')\nhotkey(key='d')")
        assert not outcome.ok and "exactly one" in outcome.reason


class TestClassify:
    def test_no_tool_call_is_ntc(self):
        assert classify_invalid(ParseOutcome.no_tool_call("prose"), None) == "NTC"

    def test_failed_resolution_is_oos(self):
        outcome = ParseOutcome.of(ToolCall("craft_a_workbench", {}))
        assert classify_invalid(outcome, False) == "OOS"

    def test_valid(self):
        outcome = ParseOutcome.of(ToolCall("move_left", {}))
        assert classify_invalid(outcome, True) == "valid"


class TestTotality:
    @given(st.text(max_size=300))
    def test_tagged_never_raises(self, text):
        assert isinstance(parse_tagged_blocks(text), ParseOutcome)

    @given(st.text(max_size=300))
    def test_dsl_never_raises(self, text):
        assert isinstance(parse_action_dsl(text), ParseOutcome)

    @given(st.dictionaries(st.text(max_size=8), st.text(max_size=8), max_size=4))
    def test_structured_never_raises(self, payload):
        assert isinstance(parse_structured_call(payload), ParseOutcome)


_calls = st.one_of(
    st.builds(ToolCall, name=st.sampled_from(["jump", "move_left", "wait", "serve"]),
              arguments=st.dictionaries(st.sampled_from(["cell", "n"]),
                                        st.text(alphabet="ab12", max_size=4), max_size=2)),
)


class TestRoundTrip:
    @given(_calls)
    def test_tagged_round_trip(self, call):
        outcome = parse_tagged_blocks(render_tagged(call))
        assert outcome.ok
        assert outcome.call.name == call.name
        assert outcome.call.arguments == call.arguments

    @given(_calls)
    def test_structured_round_trip(self, call):
        outcome = parse_structured_call(render_structured(call))
        assert outcome.ok
        assert (outcome.call.name, outcome.call.arguments) == (call.name, call.arguments)

    def test_dsl_round_trip(self):
        for call in (
            ToolCall("press_key", {"key": "w"}),
            ToolCall("press_keys", {"keys": ["w", "d"]}),
            ToolCall("click", {"x": 640, "y": 360, "button": "left"}),
            ToolCall("click", {"x": 1, "y": 2, "button": "right"}),
            ToolCall("wait", {}),
        ):
            outcome = parse_action_dsl(render_dsl(call))
            assert outcome.ok
            assert outcome.call.name == call.name
            assert outcome.call.arguments == call.arguments


class TestCorpus:
    def test_corpus_is_large_and_exact(self):
        records = [json.loads(line) for line in CORPUS.read_text().splitlines() if line.strip()]
        assert len(records) >= 60
        formats = {r["format"] for r in records}
        assert formats == {"structured_call", "tagged_blocks", "action_dsl"}
        for record in records:
            if record["format"] == "structured_call":
                outcome = parse_structured_call(record["payload"])
            elif record["format"] == "tagged_blocks":
                outcome = parse_tagged_blocks(record["payload"])
            else:
                outcome = parse_action_dsl(record["payload"])
            expected = record["expected"]
            assert outcome.ok == (expected["outcome"] == "call"), record["id"]
            if outcome.ok:
                assert outcome.call.name == expected["name"], record["id"]
