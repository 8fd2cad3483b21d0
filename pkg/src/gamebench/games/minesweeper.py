"""9x9 minesweeper, 10 mines, board-clicking controls.

Cells are addressed ``a1``..``i9`` (column letter, row digit). Mines are
placed on the first reveal, which is therefore always safe; revealing a
zero-adjacency cell flood-fills its region. Left click reveals, right
click flags. The full mine layout is part of the verifiable state (under
``raw``) once generated.
"""

from __future__ import annotations

from typing import Any

from .base import PALETTE, Session, render_cell_frame

COLS = 9
ROWS = 9
MINES = 10
CELL_PX = 16
SAFE_CELLS = COLS * ROWS - MINES


def cell_id(c: int, r: int) -> str:
    return f"{chr(ord('a') + c)}{r + 1}"


def parse_cell(cell: str) -> tuple[int, int] | None:
    if len(cell) < 2:
        return None
    c = ord(cell[0].lower()) - ord("a")
    try:
        r = int(cell[1:]) - 1
    except ValueError:
        return None
    if 0 <= c < COLS and 0 <= r < ROWS:
        return c, r
    return None


def cell_center(c: int, r: int) -> tuple[int, int]:
    return c * CELL_PX + CELL_PX // 2, r * CELL_PX + CELL_PX // 2


def all_cell_bindings() -> dict[str, tuple[int, int]]:
    return {cell_id(c, r): cell_center(c, r) for r in range(ROWS) for c in range(COLS)}


def _neighbors(c: int, r: int):
    for dc in (-1, 0, 1):
        for dr in (-1, 0, 1):
            if dc == 0 and dr == 0:
                continue
            nc, nr = c + dc, r + dr
            if 0 <= nc < COLS and 0 <= nr < ROWS:
                yield nc, nr


class MinesweeperSession(Session):
    def _setup_episode(self) -> None:
        self.mines: set[tuple[int, int]] = set()
        self.revealed: set[tuple[int, int]] = set()
        self.flags: set[tuple[int, int]] = set()
        self.mines_placed = False

    def _place_mines(self, first: tuple[int, int]) -> None:
        candidates = [(c, r) for r in range(ROWS) for c in range(COLS) if (c, r) != first]
        self.rng.shuffle(candidates)
        self.mines = set(candidates[:MINES])
        self.mines_placed = True

    def _adjacency(self, c: int, r: int) -> int:
        return sum(1 for n in _neighbors(c, r) if n in self.mines)

    def _cell_at_cursor(self) -> tuple[int, int] | None:
        x, y = self.cursor
        c, r = x // CELL_PX, y // CELL_PX
        if 0 <= c < COLS and 0 <= r < ROWS:
            return c, r
        return None

    def on_mouse_down(self, button: str) -> None:
        cell = self._cell_at_cursor()
        if cell is None:
            return
        if button == "right":
            self._toggle_flag(cell)
        else:
            self._reveal(cell)

    def _toggle_flag(self, cell: tuple[int, int]) -> None:
        if cell in self.revealed:
            return
        if cell in self.flags:
            self.flags.discard(cell)
        else:
            self.flags.add(cell)

    def _reveal(self, cell: tuple[int, int]) -> None:
        if cell in self.flags or cell in self.revealed:
            return
        if not self.mines_placed:
            self._place_mines(cell)
        if cell in self.mines:
            self.revealed.add(cell)
            self._end_episode("lose", f"revealed a mine at {cell_id(*cell)}")
            return
        stack = [cell]
        while stack:
            cur = stack.pop()
            if cur in self.revealed:
                continue
            self.revealed.add(cur)
            if self._adjacency(*cur) == 0:
                for n in _neighbors(*cur):
                    if n not in self.revealed and n not in self.mines:
                        stack.append(n)
        if len(self.revealed) >= SAFE_CELLS:
            self._end_episode("win", "all safe cells revealed")

    def _score(self) -> float:
        return len(self.revealed - self.mines)

    def _game_state(self) -> dict[str, Any]:
        return {"board": self._board_rows()}

    def _board_rows(self) -> list[str]:
        rows = []
        terminal = self.status.value == "terminal"
        for r in range(ROWS):
            chars = []
            for c in range(COLS):
                cell = (c, r)
                if cell in self.revealed:
                    chars.append("*" if cell in self.mines else str(self._adjacency(c, r)))
                elif cell in self.flags:
                    chars.append("F")
                elif terminal and cell in self.mines:
                    chars.append("m")
                else:
                    chars.append("#")
            rows.append("".join(chars))
        return rows

    def _metrics(self) -> dict[str, Any]:
        return {
            "revealed": len(self.revealed - self.mines),
            "flags": len(self.flags),
            "correct_flags": len(self.flags & self.mines),
            "mines": MINES,
        }

    def _raw(self) -> dict[str, Any]:
        return {
            "mines": sorted(cell_id(*m) for m in self.mines) if self.mines_placed else None,
            "mines_placed": self.mines_placed,
        }

    def render_text(self) -> str:
        lines = [f"minesweeper  revealed={len(self.revealed - self.mines)}/{SAFE_CELLS}  flags={len(self.flags)}"]
        lines.append("   " + " ".join(chr(ord("a") + c) for c in range(COLS)))
        for r, row in enumerate(self._board_rows()):
            lines.append(f"{r + 1:>2} " + " ".join(row))
        return "\n".join(lines) + "\n"

    def render_frame(self) -> bytes:
        colors = []
        for r in range(ROWS):
            row = []
            for c in range(COLS):
                cell = (c, r)
                if cell in self.revealed:
                    row.append(PALETTE["bad"] if cell in self.mines else PALETTE["fg"])
                elif cell in self.flags:
                    row.append(PALETTE["accent"])
                else:
                    row.append(PALETTE["grid"])
            colors.append(row)
        return render_cell_frame(colors, cell_px=CELL_PX)


def oracle(snapshot) -> tuple[str, dict]:
    """Flag every mine, then reveal the safe cells in row-major order.

    Reads the mine layout from the verifiable raw state, which exists
    once the first (always safe) reveal has placed the mines.
    """
    board = snapshot.game_state.get("board")
    raw = snapshot.raw
    if board is None:
        return "wait", {}
    if not raw.get("mines_placed"):
        return "reveal_cell", {"cell": "e5"}
    mines = set(raw.get("mines") or ())
    for cid in sorted(mines):
        parsed = parse_cell(cid)
        if parsed is not None and board[parsed[1]][parsed[0]] == "#":
            return "flag_cell", {"cell": cid}
    for r in range(ROWS):
        for c in range(COLS):
            cid = cell_id(c, r)
            if board[r][c] == "#" and cid not in mines:
                return "reveal_cell", {"cell": cid}
    return "wait", {}
