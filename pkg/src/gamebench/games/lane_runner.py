"""Three-lane endless runner with a seeded obstacle schedule.

Distance increases one unit per 100 ms tick while the run is live. The
track is generated up front from the episode stream: obstacles appear
every 8-14 ticks, each either a low barrier (jump over it), a high bar
(duck under it) or a single-lane block (be in another lane). Jumps and
ducks stay active for the four ticks after the key press, which makes
the reaction window shorter than a 500 ms inference delay: in real-time
mode a slow agent physically cannot clear the first obstacle.
"""

from __future__ import annotations

from typing import Any

from .base import PALETTE, Session, render_cell_frame

LANES = 3
EVADE_TICKS = 4
TRACK_LIMIT = 4000
_KINDS = ("low", "high", "block")


def generate_track(rng) -> list[tuple[int, int, str]]:
    """(position, lane, kind) triples; first at 8-12, gaps of 8-14 ticks."""
    track = []
    pos = 8 + rng.randrange(5)
    while pos < TRACK_LIMIT:
        kind = _KINDS[rng.randrange(3)]
        lane = rng.randrange(LANES)
        track.append((pos, lane, kind))
        pos += 8 + rng.randrange(7)
    return track


class LaneRunnerSession(Session):
    def _setup_episode(self) -> None:
        self.track = generate_track(self.rng)
        self.next_idx = 0
        self.distance = 0
        self.lane = 1
        self.air_until = -1
        self.duck_until = -1

    def on_key_down(self, key: str) -> None:
        if key == "ArrowUp":
            self.air_until = self.tick_count + EVADE_TICKS
        elif key == "ArrowDown":
            self.duck_until = self.tick_count + EVADE_TICKS
        elif key == "ArrowLeft":
            self.lane = max(0, self.lane - 1)
        elif key == "ArrowRight":
            self.lane = min(LANES - 1, self.lane + 1)

    def _tick_playing(self) -> None:
        self.distance += 1
        while self.next_idx < len(self.track) and self.track[self.next_idx][0] < self.distance:
            self.next_idx += 1
        if self.next_idx >= len(self.track):
            return
        pos, lane, kind = self.track[self.next_idx]
        if pos != self.distance:
            return
        airborne = self.tick_count <= self.air_until
        ducking = self.tick_count <= self.duck_until
        survived = (
            (kind == "low" and airborne)
            or (kind == "high" and ducking)
            or (kind == "block" and self.lane != lane)
        )
        if survived:
            self.next_idx += 1
        else:
            self._end_episode("lose", f"hit a {kind} obstacle at distance {pos}")

    def _score(self) -> float:
        return self.distance

    def _game_state(self) -> dict[str, Any]:
        airborne = self.tick_count <= self.air_until
        ducking = self.tick_count <= self.duck_until
        upcoming = []
        for pos, lane, kind in self.track[self.next_idx:self.next_idx + 3]:
            upcoming.append({"kind": kind, "lane": lane, "at": pos, "dist": pos - self.distance})
        return {
            "player": {"lane": self.lane, "airborne": airborne, "ducking": ducking,
                       "alive": self.status.value != "terminal"},
            "entities": upcoming,
        }

    def _metrics(self) -> dict[str, Any]:
        return {"distance": self.distance, "obstacles_cleared": self.next_idx}

    def _raw(self) -> dict[str, Any]:
        return {"lane": self.lane, "air_until": self.air_until, "duck_until": self.duck_until}

    def render_text(self) -> str:
        horizon = 16
        rows = []
        for lane in range(LANES):
            cells = []
            for d in range(horizon):
                pos = self.distance + d
                ch = "."
                for opos, olane, okind in self.track[self.next_idx:self.next_idx + 4]:
                    if opos == pos and (okind != "block" or olane == lane):
                        ch = {"low": "_", "high": "^", "block": "#"}[okind]
                cells.append(ch)
            marker = ">" if lane == self.lane else " "
            rows.append(f"{marker}|{''.join(cells)}|")
        state = []
        if self.tick_count <= self.air_until:
            state.append("airborne")
        if self.tick_count <= self.duck_until:
            state.append("ducking")
        head = f"lane-runner  distance={self.distance}  lane={self.lane}"
        if state:
            head += "  " + "+".join(state)
        return head + "\n" + "\n".join(rows) + "\n"

    def render_frame(self) -> bytes:
        horizon = 16
        colors = []
        for lane in range(LANES):
            row = []
            for d in range(horizon):
                pos = self.distance + d
                color = PALETTE["bg"]
                for opos, olane, okind in self.track[self.next_idx:self.next_idx + 4]:
                    if opos == pos and (okind != "block" or olane == lane):
                        color = {"low": PALETTE["accent"], "high": PALETTE["info"],
                                 "block": PALETTE["bad"]}[okind]
                if d == 0 and lane == self.lane:
                    color = PALETTE["fg"]
                row.append(color)
            colors.append(row)
        return render_cell_frame(colors, cell_px=12)


def oracle(snapshot) -> tuple[str, dict]:
    """Evade the nearest obstacle once it enters the 4-tick action window."""
    player = snapshot.game_state.get("player")
    if player is None:
        return "jump", {}  # also the trusted start action
    if snapshot.status.value == "ready":
        return "jump", {}
    entities = snapshot.game_state.get("entities") or []
    if not entities:
        return "wait", {}
    nearest = entities[0]
    if nearest["dist"] > EVADE_TICKS:
        return "wait", {}
    kind = nearest["kind"]
    if kind == "low":
        return "jump", {}
    if kind == "high":
        return "duck", {}
    if player["lane"] == nearest["lane"]:
        return ("move_left", {}) if player["lane"] > 0 else ("move_right", {})
    return "wait", {}
