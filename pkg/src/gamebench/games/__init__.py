"""Reference game engines, keyed by game id."""

from __future__ import annotations

from .base import (
    GameDefinition,
    InvalidConfigError,
    InvalidTransitionError,
    NotActionableError,
    Observation,
    RoleDefinition,
    Session,
)
from .g2048 import G2048Session
from .grid_hop import GridHopSession
from .lane_runner import LaneRunnerSession
from .mini_mart import MiniMartSession
from .minesweeper import MinesweeperSession
from .snake import SnakeSession
from . import g2048, grid_hop, lane_runner, mini_mart, minesweeper, snake

ENGINES: dict[str, type[Session]] = {
    "g2048": G2048Session,
    "minesweeper": MinesweeperSession,
    "snake": SnakeSession,
    "lane-runner": LaneRunnerSession,
    "grid-hop": GridHopSession,
    "mini-mart": MiniMartSession,
}

ORACLES = {
    "g2048": g2048.oracle,
    "minesweeper": minesweeper.oracle,
    "snake": snake.oracle,
    "lane-runner": lane_runner.oracle,
    "grid-hop": grid_hop.oracle,
    "mini-mart": mini_mart.oracle,
}

__all__ = [
    "ENGINES",
    "ORACLES",
    "GameDefinition",
    "InvalidConfigError",
    "InvalidTransitionError",
    "NotActionableError",
    "Observation",
    "RoleDefinition",
    "Session",
]
