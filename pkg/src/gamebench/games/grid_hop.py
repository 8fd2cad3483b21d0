"""Side-view grid platformer with coins and a flag exit.

The terrain is a seeded column-height profile with single-column pits;
the player hops cell by cell. Walking moves onto equal-or-lower ground,
a jump clears a one-step rise or a single pit, and a vertical hop grabs
a coin floating one cell overhead. Falling into a pit loses the episode;
touching the flag column wins it. The generator keeps every level
traversable by construction (rises of one, pits of width one with a
landable far edge).
"""

from __future__ import annotations

from typing import Any

from .base import PALETTE, Session, render_cell_frame

WIDTH = 64
MAX_H = 4


def generate_terrain(rng, width: int) -> list[int]:
    heights = [2, 2]
    x = 2
    while x < width:
        prev = heights[-1]
        r = rng.randrange(10)
        if r < 2 and prev < MAX_H:
            heights.append(prev + 1)
        elif r < 4 and prev > 1:
            heights.append(prev - 1)
        elif r == 4 and x < width - 4 and prev > 0:
            heights.append(0)       # pit of width one...
            heights.append(prev)    # ...with a landable far edge
            x += 2
            continue
        else:
            heights.append(prev)
        x += 1
    heights = heights[:width]
    while len(heights) < width:
        heights.append(heights[-1])
    for i in (width - 1, width - 2):
        if heights[i] == 0:
            heights[i] = heights[width - 3] or 2
    return heights


def place_coins(rng, heights: list[int]) -> tuple[set[tuple[int, int]], set[tuple[int, int]]]:
    ground, floating = set(), set()
    for x in range(3, len(heights) - 3):
        h = heights[x]
        if h == 0:
            continue
        if rng.chance(0.25):
            ground.add((x, h))
        elif rng.chance(0.12):
            floating.add((x, h + 1))
    return ground, floating


class GridHopSession(Session):
    def _setup_episode(self) -> None:
        self.heights = generate_terrain(self.rng, WIDTH)
        self.ground_coins, self.float_coins = place_coins(self.rng, self.heights)
        self.x = 1
        self.coins = 0
        self.flag_x = WIDTH - 2
        self.at_flag = False
        self._up_held = False
        self._up_consumed = False

    def on_key_down(self, key: str) -> None:
        if key in ("ArrowUp", "Space"):
            self._up_held = True
            self._up_consumed = False
        elif key == "ArrowRight":
            self._move(1, jump=self._up_held)
        elif key == "ArrowLeft":
            self._move(-1, jump=self._up_held)

    def on_key_up(self, key: str) -> None:
        if key in ("ArrowUp", "Space"):
            if self._up_held and not self._up_consumed:
                self._hop_vertical()
            self._up_held = False

    def _hop_vertical(self) -> None:
        coin = (self.x, self.heights[self.x] + 1)
        if coin in self.float_coins:
            self.float_coins.discard(coin)
            self.coins += 1

    def _move(self, dx: int, jump: bool) -> None:
        if jump:
            self._up_consumed = True
        nx = self.x + dx
        if not (0 <= nx < WIDTH):
            return
        here = self.heights[self.x]
        there = self.heights[nx]
        if there == 0:
            if not jump:
                self._end_episode("lose", f"fell into the pit at column {nx}")
                return
            far = nx + dx
            if 0 <= far < WIDTH and 1 <= self.heights[far] <= here + 1:
                self._land(far)
            else:
                self._end_episode("lose", f"jumped into the pit at column {nx}")
            return
        if there <= here + (1 if jump else 0):
            self._land(nx)
        # a rise too tall (or a step up without a jump) blocks the move

    def _land(self, nx: int) -> None:
        self.x = nx
        coin = (nx, self.heights[nx])
        if coin in self.ground_coins:
            self.ground_coins.discard(coin)
            self.coins += 1
        if nx >= self.flag_x:
            self.at_flag = True
            self._end_episode("win", "reached the flag")

    def _score(self) -> float:
        return self.coins

    def _game_state(self) -> dict[str, Any]:
        return {
            "player": {"x": self.x, "y": self.heights[self.x],
                       "alive": self._outcome != "lose"},
        }

    def _metrics(self) -> dict[str, Any]:
        return {
            "coins": self.coins,
            "x": self.x,
            "flag_reached": 1 if self.at_flag else 0,
        }

    def _raw(self) -> dict[str, Any]:
        return {
            "heights": list(self.heights),
            "ground_coins": sorted([x, y] for x, y in self.ground_coins),
            "float_coins": sorted([x, y] for x, y in self.float_coins),
            "flag_x": self.flag_x,
            "at_flag": 1 if self.at_flag else 0,
        }

    def render_text(self) -> str:
        window = 24
        x0 = max(0, min(self.x - 4, WIDTH - window))
        rows = []
        for y in range(MAX_H + 1, 0, -1):
            chars = []
            for x in range(x0, x0 + window):
                if x == self.x and y == self.heights[self.x]:
                    chars.append("P")
                elif (x, y) in self.ground_coins or (x, y) in self.float_coins:
                    chars.append("c")
                elif x == self.flag_x and y == self.heights[x]:
                    chars.append("F")
                elif self.heights[x] >= y:
                    chars.append("=")
                else:
                    chars.append(".")
            rows.append("".join(chars))
        head = f"grid-hop  x={self.x}  coins={self.coins}  flag@{self.flag_x}"
        return head + "\n" + "\n".join(rows) + "\n"

    def render_frame(self) -> bytes:
        window = 24
        x0 = max(0, min(self.x - 4, WIDTH - window))
        colors = []
        for y in range(MAX_H + 1, 0, -1):
            row = []
            for x in range(x0, x0 + window):
                if x == self.x and y == self.heights[self.x]:
                    row.append(PALETTE["fg"])
                elif (x, y) in self.ground_coins or (x, y) in self.float_coins:
                    row.append(PALETTE["accent"])
                elif x == self.flag_x and y == self.heights[x]:
                    row.append(PALETTE["good"])
                elif self.heights[x] >= y:
                    row.append(PALETTE["dim"])
                else:
                    row.append(PALETTE["bg"])
            colors.append(row)
        return render_cell_frame(colors, cell_px=8)


def oracle(snapshot) -> tuple[str, dict]:
    """Run right, jumping over rises and pits, hopping for overhead coins."""
    raw = snapshot.raw
    heights = raw.get("heights")
    player = snapshot.game_state.get("player")
    if not heights or player is None:
        return "wait", {}
    x = player["x"]
    floats = {tuple(c) for c in raw.get("float_coins", ())}
    if (x, heights[x] + 1) in floats:
        return "jump", {}
    if x + 1 >= len(heights):
        return "wait", {}
    nxt = heights[x + 1]
    if nxt == 0 or nxt == heights[x] + 1:
        return "jump_right", {}
    if nxt > heights[x] + 1:
        return "wait", {}  # generator never produces this
    return "move_right", {}
