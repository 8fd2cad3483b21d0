"""Store-management loop: harvest, stock, serve.

The player walks a 10x8 store one cell per key press. Standing on the
tree harvests one item per 200 ms tick (up to a carry limit of four), on
the shelf deposits one per tick, and on the counter serves one waiting
customer per tick while the shelf has stock. Customers arrive on a
seeded schedule whether or not anyone serves them; every served customer
pays five money.
"""

from __future__ import annotations

from typing import Any

from .base import PALETTE, Session, render_cell_frame

GRID_W = 10
GRID_H = 8
CARRY_CAP = 4
SHELF_CAP = 8
QUEUE_CAP = 6
PAY = 5

TREE = (2, 5)
SHELF = (4, 3)
COUNTER = (2, 1)

_MOVES = {"ArrowUp": (0, -1), "ArrowDown": (0, 1), "ArrowLeft": (-1, 0), "ArrowRight": (1, 0)}


class MiniMartSession(Session):
    def _setup_episode(self) -> None:
        self.pos = (4, 4)
        self.carrying = 0
        self.stock = 0
        self.queue = 0
        self.money = 0
        self.served = 0
        self.arrived = 0
        self.next_arrival = 5 + self.rng.randrange(4)

    def on_key_down(self, key: str) -> None:
        d = _MOVES.get(key)
        if d is None:
            return
        nx = min(GRID_W - 1, max(0, self.pos[0] + d[0]))
        ny = min(GRID_H - 1, max(0, self.pos[1] + d[1]))
        self.pos = (nx, ny)

    def _tick_playing(self) -> None:
        if self.tick_count >= self.next_arrival:
            if self.queue < QUEUE_CAP:
                self.queue += 1
                self.arrived += 1
            self.next_arrival = self.tick_count + 5 + self.rng.randrange(4)
        if self.pos == TREE and self.carrying < CARRY_CAP:
            self.carrying += 1
        elif self.pos == SHELF and self.carrying > 0 and self.stock < SHELF_CAP:
            self.carrying -= 1
            self.stock += 1
        elif self.pos == COUNTER and self.queue > 0 and self.stock > 0:
            self.queue -= 1
            self.stock -= 1
            self.money += PAY
            self.served += 1

    def _score(self) -> float:
        return self.money

    def _game_state(self) -> dict[str, Any]:
        return {"player": {"x": self.pos[0], "y": self.pos[1], "alive": True}}

    def _metrics(self) -> dict[str, Any]:
        return {
            "money": self.money,
            "served": self.served,
            "stock": self.stock,
            "carrying": self.carrying,
            "queue": self.queue,
        }

    def _raw(self) -> dict[str, Any]:
        return {
            "tree": list(TREE),
            "shelf": list(SHELF),
            "counter": list(COUNTER),
            "arrived": self.arrived,
        }

    def render_text(self) -> str:
        grid = [["." for _ in range(GRID_W)] for _ in range(GRID_H)]
        grid[TREE[1]][TREE[0]] = "T"
        grid[SHELF[1]][SHELF[0]] = "S"
        grid[COUNTER[1]][COUNTER[0]] = "C"
        grid[self.pos[1]][self.pos[0]] = "P"
        head = (f"mini-mart  money={self.money}  carrying={self.carrying}/{CARRY_CAP}"
                f"  stock={self.stock}/{SHELF_CAP}  queue={self.queue}")
        return head + "\n" + "\n".join("".join(row) for row in grid) + "\n"

    def render_frame(self) -> bytes:
        colors = [[PALETTE["bg"]] * GRID_W for _ in range(GRID_H)]
        colors[TREE[1]][TREE[0]] = PALETTE["good"]
        colors[SHELF[1]][SHELF[0]] = PALETTE["info"]
        colors[COUNTER[1]][COUNTER[0]] = PALETTE["accent"]
        colors[self.pos[1]][self.pos[0]] = PALETTE["fg"]
        return render_cell_frame(colors, cell_px=16)


def _step_toward(pos, goal) -> tuple[str, dict] | None:
    px, py = pos
    gx, gy = goal
    if px < gx:
        return "move_right", {}
    if px > gx:
        return "move_left", {}
    if py < gy:
        return "move_down", {}
    if py > gy:
        return "move_up", {}
    return None


def oracle(snapshot) -> tuple[str, dict]:
    """Harvest to capacity, deposit the full load, then serve the queue."""
    m = snapshot.metrics
    player = snapshot.game_state.get("player")
    if player is None:
        return "wait", {}
    pos = (player["x"], player["y"])
    carrying = m.get("carrying", 0)
    stock = m.get("stock", 0)
    queue = m.get("queue", 0)
    if carrying >= CARRY_CAP:
        goal = SHELF
    elif carrying > 0 and pos == SHELF and stock < SHELF_CAP:
        goal = SHELF  # finish the deposit before running off
    elif carrying > 0 and pos == TREE and carrying < CARRY_CAP and queue == 0:
        goal = TREE  # top up while nobody is waiting
    elif queue > 0 and stock > 0:
        goal = COUNTER
    elif carrying > 0:
        goal = SHELF
    else:
        goal = TREE
    step = _step_toward(pos, goal)
    if step is None:
        return "wait", {}
    return step
