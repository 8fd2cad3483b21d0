"""Grid snake on a 12x12 board.

The snake advances one cell per tick (200 ms tick period, so exactly one
move per standard action window); arrow keys set the pending direction
and exact reversals are ignored. Food spawns uniformly over free cells
from the session stream; hitting a wall or the snake's own body ends the
episode.
"""

from __future__ import annotations

from typing import Any

from .base import PALETTE, Session, render_cell_frame

SIZE = 12
START_LEN = 3

_DIRS = {"ArrowUp": (0, -1), "ArrowDown": (0, 1), "ArrowLeft": (-1, 0), "ArrowRight": (1, 0)}


class SnakeSession(Session):
    def _setup_episode(self) -> None:
        cx, cy = SIZE // 2, SIZE // 2
        self.body: list[tuple[int, int]] = [(cx - i, cy) for i in range(START_LEN)]
        self.direction = (1, 0)
        self.pending = (1, 0)
        self.food_eaten = 0
        self.food = self._spawn_food()

    def _spawn_food(self) -> tuple[int, int]:
        free = [(x, y) for y in range(SIZE) for x in range(SIZE) if (x, y) not in self.body]
        return free[self.rng.randrange(len(free))]

    def on_key_down(self, key: str) -> None:
        d = _DIRS.get(key)
        if d is None:
            return
        if (d[0] == -self.direction[0] and d[1] == -self.direction[1]):
            return  # reversing onto the neck is ignored, as usual
        self.pending = d

    def _tick_playing(self) -> None:
        self.direction = self.pending
        hx, hy = self.body[0]
        nx, ny = hx + self.direction[0], hy + self.direction[1]
        if not (0 <= nx < SIZE and 0 <= ny < SIZE):
            self._end_episode("lose", "hit a wall")
            return
        grows = (nx, ny) == self.food
        blocked = self.body[:-1] if not grows else self.body
        if (nx, ny) in blocked:
            self._end_episode("lose", "ran into itself")
            return
        self.body.insert(0, (nx, ny))
        if grows:
            self.food_eaten += 1
            self.food = self._spawn_food()
        else:
            self.body.pop()

    def _score(self) -> float:
        return self.food_eaten

    def _game_state(self) -> dict[str, Any]:
        return {
            "player": {"x": self.body[0][0], "y": self.body[0][1], "alive": self.status.value != "terminal"},
            "entities": [{"kind": "food", "x": self.food[0], "y": self.food[1]}],
        }

    def _metrics(self) -> dict[str, Any]:
        return {"food": self.food_eaten, "length": len(self.body)}

    def _raw(self) -> dict[str, Any]:
        return {
            "body": [[x, y] for x, y in self.body],
            "direction": list(self.direction),
            "size": SIZE,
        }

    def render_text(self) -> str:
        grid = [["." for _ in range(SIZE)] for _ in range(SIZE)]
        for x, y in self.body[1:]:
            grid[y][x] = "o"
        hx, hy = self.body[0]
        grid[hy][hx] = "S"
        fx, fy = self.food
        if grid[fy][fx] == ".":
            grid[fy][fx] = "@"
        lines = [f"snake  food={self.food_eaten}  len={len(self.body)}"]
        lines.extend("".join(row) for row in grid)
        return "\n".join(lines) + "\n"

    def render_frame(self) -> bytes:
        colors = [[PALETTE["bg"]] * SIZE for _ in range(SIZE)]
        for x, y in self.body[1:]:
            colors[y][x] = PALETTE["good"]
        hx, hy = self.body[0]
        colors[hy][hx] = PALETTE["fg"]
        fx, fy = self.food
        if colors[fy][fx] == PALETTE["bg"]:
            colors[fy][fx] = PALETTE["accent"]
        return render_cell_frame(colors, cell_px=16)


_STEPS = {(0, -1): "move_up", (0, 1): "move_down", (-1, 0): "move_left", (1, 0): "move_right"}


def oracle(snapshot) -> tuple[str, dict]:
    """Breadth-first path to the food, falling back to any safe move."""
    raw = snapshot.raw
    body = [tuple(p) for p in raw.get("body", [])]
    if not body:
        return "wait", {}
    entities = snapshot.game_state.get("entities") or []
    food = next(((e["x"], e["y"]) for e in entities if e.get("kind") == "food"), None)
    head = body[0]
    blocked = set(body[:-1])  # the tail cell vacates on the next move
    if food is not None:
        step = _bfs_step(head, food, blocked)
        if step is not None:
            return _STEPS[step], {}
    direction = tuple(raw.get("direction", (1, 0)))
    for d in (direction, (1, 0), (0, 1), (-1, 0), (0, -1)):
        nx, ny = head[0] + d[0], head[1] + d[1]
        if 0 <= nx < SIZE and 0 <= ny < SIZE and (nx, ny) not in blocked:
            return _STEPS[tuple(d)], {}
    return "wait", {}


def _bfs_step(head, food, blocked):
    from collections import deque

    queue = deque([head])
    came: dict[tuple[int, int], tuple[int, int] | None] = {head: None}
    while queue:
        cur = queue.popleft()
        if cur == food:
            step = cur
            while came[step] != head and came[step] is not None:
                step = came[step]
            dx, dy = step[0] - head[0], step[1] - head[1]
            return (dx, dy)
        for d in ((1, 0), (0, 1), (-1, 0), (0, -1)):
            nxt = (cur[0] + d[0], cur[1] + d[1])
            if not (0 <= nxt[0] < SIZE and 0 <= nxt[1] < SIZE):
                continue
            if nxt in blocked or nxt in came:
                continue
            came[nxt] = cur
            queue.append(nxt)
    return None
