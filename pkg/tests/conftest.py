from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).resolve().parent))

from gamebench.registry import Registry, load_registry
from gamebench.state import LifecycleStatus, StateSnapshot, TerminalInfo


@pytest.fixture(scope="session")
def registry() -> Registry:
    return load_registry()


# -- snapshot strategies ------------------------------------------------------

_safe_int = st.integers(min_value=-(2**53), max_value=2**53)
_safe_float = st.floats(allow_nan=False, allow_infinity=False, width=32)
_number = st.one_of(_safe_int, _safe_float)
_key = st.text(alphabet="abcdefghij_", min_size=1, max_size=8)


def _value(depth: int = 0):
    scalars = st.one_of(_number, st.booleans(), st.text(max_size=12), st.none())
    if depth >= 2:
        return scalars
    return st.one_of(
        scalars,
        st.lists(_value(depth + 1), max_size=3),
        st.dictionaries(_key, _value(depth + 1), max_size=3),
    )


@st.composite
def snapshots(draw) -> StateSnapshot:
    """Random valid snapshots (terminal metadata kept consistent)."""
    status = draw(st.sampled_from(list(LifecycleStatus)))
    if status is LifecycleStatus.TERMINAL:
        terminal = TerminalInfo(
            is_terminal=True,
            outcome=draw(st.sampled_from(["win", "lose", "timeout"])),
            reason=draw(st.one_of(st.none(), st.text(max_size=20))),
        )
    else:
        terminal = TerminalInfo()
    game_state = {
        "score": draw(_number),
        "level": draw(st.text(max_size=6)),
        "progress": draw(st.one_of(st.none(), st.floats(min_value=0.0, max_value=1.0, allow_nan=False))),
    }
    if draw(st.booleans()):
        game_state["board"] = draw(st.lists(st.lists(_safe_int, max_size=4), max_size=4))
    return StateSnapshot(
        game_id=draw(st.text(alphabet="abcz0-9_", min_size=1, max_size=16)),
        seed=draw(st.integers(min_value=0, max_value=2**31)),
        timestamp_ms=draw(st.integers(min_value=0, max_value=2**52)),
        game_time_ms=draw(st.integers(min_value=0, max_value=2**40)),
        status=status,
        terminal=terminal,
        game_state=game_state,
        metrics=draw(st.dictionaries(_key, _number, max_size=4)),
        raw=draw(st.dictionaries(_key, _value(), max_size=4)),
    )
