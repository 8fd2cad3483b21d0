"""4x4 sliding-merge puzzle.

Pure puzzle dynamics: the board changes only on input. A move slides all
tiles in the pressed direction; equal neighbours merge once into their
doubled value and the merged value is added to the score. After every
move that changed the board one new tile spawns (2 with p=0.9, 4 with
p=0.1) in a uniformly random empty cell. The episode is lost when the
board is full and no merge exists.
"""

from __future__ import annotations

from typing import Any

from .base import PALETTE, Session, render_cell_frame

SIZE = 4

_KEY_DIRS = {"ArrowLeft": "left", "ArrowRight": "right", "ArrowUp": "up", "ArrowDown": "down"}


def slide_row_left(row: list[int]) -> tuple[list[int], int]:
    """Slide one row towards index 0, merging equal neighbours once."""
    tiles = [v for v in row if v]
    out: list[int] = []
    gain = 0
    i = 0
    while i < len(tiles):
        if i + 1 < len(tiles) and tiles[i] == tiles[i + 1]:
            out.append(tiles[i] * 2)
            gain += tiles[i] * 2
            i += 2
        else:
            out.append(tiles[i])
            i += 1
    out.extend([0] * (len(row) - len(out)))
    return out, gain


def apply_move(board: list[list[int]], direction: str) -> tuple[list[list[int]], int, bool]:
    """Return (new board, merge gain, whether anything moved)."""
    rows: list[list[int]]
    if direction in ("left", "right"):
        rows = [list(r) for r in board]
    else:
        rows = [list(col) for col in zip(*board)]
    flip = direction in ("right", "down")
    new_rows = []
    gain = 0
    for row in rows:
        work = row[::-1] if flip else row
        slid, g = slide_row_left(work)
        gain += g
        new_rows.append(slid[::-1] if flip else slid)
    if direction in ("up", "down"):
        new_board = [list(r) for r in zip(*new_rows)]
    else:
        new_board = new_rows
    moved = new_board != [list(r) for r in board]
    return new_board, gain, moved


def has_any_move(board: list[list[int]]) -> bool:
    for r in range(SIZE):
        for c in range(SIZE):
            v = board[r][c]
            if v == 0:
                return True
            if r + 1 < SIZE and board[r + 1][c] == v:
                return True
            if c + 1 < SIZE and board[r][c + 1] == v:
                return True
    return False


class G2048Session(Session):
    def _setup_episode(self) -> None:
        self.board = [[0] * SIZE for _ in range(SIZE)]
        self.score = 0
        self.moves = 0
        self._spawn_tile()
        self._spawn_tile()

    def _spawn_tile(self) -> None:
        empties = [(r, c) for r in range(SIZE) for c in range(SIZE) if self.board[r][c] == 0]
        if not empties:
            return
        value = 4 if self.rng.chance(0.1) else 2
        r, c = empties[self.rng.randrange(len(empties))]
        self.board[r][c] = value

    def on_key_down(self, key: str) -> None:
        direction = _KEY_DIRS.get(key)
        if direction is None:
            return
        new_board, gain, moved = apply_move(self.board, direction)
        if not moved:
            return
        self.board = new_board
        self.score += gain
        self.moves += 1
        self._spawn_tile()
        if not has_any_move(self.board):
            self._end_episode("lose", "no moves left")

    def _score(self) -> float:
        return self.score

    def _game_state(self) -> dict[str, Any]:
        return {"board": [list(r) for r in self.board]}

    def _metrics(self) -> dict[str, Any]:
        flat = [v for row in self.board for v in row]
        return {
            "moves": self.moves,
            "max_tile": max(flat),
            "empty_cells": flat.count(0),
        }

    def _raw(self) -> dict[str, Any]:
        return {"size": SIZE}

    def render_text(self) -> str:
        lines = [f"2048  score={self.score}  moves={self.moves}"]
        sep = "+" + "+".join(["------"] * SIZE) + "+"
        for row in self.board:
            lines.append(sep)
            lines.append("|" + "|".join(f"{v or '':>6}" for v in row) + "|")
        lines.append(sep)
        return "\n".join(lines) + "\n"

    _TILE_COLORS = {
        0: PALETTE["bg"], 2: (238, 228, 218), 4: (237, 224, 200),
        8: (242, 177, 121), 16: (245, 149, 99), 32: (246, 124, 95),
        64: (246, 94, 59), 128: (237, 207, 114), 256: (237, 204, 97),
        512: (237, 200, 80), 1024: (237, 197, 63), 2048: (237, 194, 46),
    }

    def render_frame(self) -> bytes:
        cells = [[self._TILE_COLORS.get(v, PALETTE["accent"]) for v in row] for row in self.board]
        return render_cell_frame(cells, cell_px=16)


def oracle(snapshot) -> tuple[str, dict]:
    """One-ply greedy: pick the moving direction with the best merge gain."""
    board = snapshot.game_state.get("board")
    if board is None:
        return "wait", {}
    order = [("move_left", "left"), ("move_up", "up"), ("move_right", "right"), ("move_down", "down")]
    best: tuple[str, int] | None = None
    for control, direction in order:
        _, gain, moved = apply_move(board, direction)
        if not moved:
            continue
        if best is None or gain > best[1]:
            best = (control, gain)
    if best is None:
        return "wait", {}
    return best[0], {}
