"""Headless deterministic game kernel.

A :class:`Session` owns one seeded game instance and exposes the state
contract: ``init`` / ``reset`` / ``get_state`` plus event application,
time advancement, pause/resume and deterministic observations (text grid
and a raster frame in binary P6 pixmap form).

Determinism rules every subclass must follow:
  * all randomness comes from ``self.rng`` (splitmix64, reseeded per
    episode as ``mix64(seed, episode_index)``),
  * dynamics advance only inside ``_tick_playing``; input handlers may
    mutate state only in response to events,
  * wall-clock time is simulated: ``timestamp_ms`` is a fixed base plus
    total simulated milliseconds, so equal schedules give equal bytes.

Loading takes exactly three ticks before a session reports ``ready``; a
ready session starts playing on its first key or mouse press.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from ..controls import AtomicEvent, RoleControls
from ..rng import Rng, mix64
from ..semantics import SemanticControlMap
from ..state import LifecycleStatus, StateSnapshot, TerminalInfo

LOADING_TICKS = 3
TIMESTAMP_BASE_MS = 1_760_000_000_000


class InvalidConfigError(ValueError):
    pass


class NotActionableError(RuntimeError):
    pass


class InvalidTransitionError(RuntimeError):
    pass


@dataclass(frozen=True)
class RoleDefinition:
    name: str
    controls: RoleControls
    semantic_map: SemanticControlMap
    role_prompt: str
    cua_controls_text: str


@dataclass(frozen=True)
class GameDefinition:
    game_id: str
    genre: str  # arcade | platformer | puzzle | runner | simulation
    tick_period_ms: int
    roles: tuple[RoleDefinition, ...]
    rules_text: str
    viewport: tuple[int, int] = (192, 192)

    def __post_init__(self) -> None:
        if self.tick_period_ms <= 0:
            raise InvalidConfigError("tick_period must be positive")
        if not self.roles:
            raise InvalidConfigError("a game needs at least one role")

    def role(self, name: str | None = None) -> RoleDefinition:
        if name is None:
            return self.roles[0]
        for role in self.roles:
            if role.name == name:
                return role
        raise KeyError(name)


@dataclass(frozen=True)
class Observation:
    text_grid: str
    frame: bytes


class Session:
    """One live, single-owner game instance."""

    def __init__(self, definition: GameDefinition, seed: int, speed: float = 1.0,
                 params: Mapping[str, Any] | None = None) -> None:
        if speed <= 0:
            raise InvalidConfigError("speed must be a positive multiplier")
        if not isinstance(seed, int):
            raise InvalidConfigError("seed must be an integer")
        self.definition = definition
        self.seed = seed
        self.speed = speed
        self.params = dict(params or {})
        self.episode_index = 0
        self.status = LifecycleStatus.LOADING
        self.game_time_ms = 0
        self.total_sim_ms = 0
        self._pending_ms = 0
        self._loading_left = LOADING_TICKS
        self.tick_count = 0
        self._outcome: str | None = None
        self._reason: str | None = None
        self.rng = Rng(mix64(seed, self.episode_index))
        self._setup_episode()

    # -- lifecycle ---------------------------------------------------------

    def reset(self, reseed: int | None = None) -> None:
        """Begin a fresh episode; ready again after the loading phase."""
        self.episode_index += 1
        self.status = LifecycleStatus.LOADING
        self.game_time_ms = 0
        self._pending_ms = 0
        self._loading_left = LOADING_TICKS
        self.tick_count = 0
        self._outcome = None
        self._reason = None
        self.rng = Rng((reseed & (2**64 - 1)) if reseed is not None else mix64(self.seed, self.episode_index))
        self._setup_episode()

    def pause(self) -> None:
        if self.status is not LifecycleStatus.PLAYING:
            raise InvalidTransitionError(f"cannot pause from {self.status.value}")
        self.status = LifecycleStatus.PAUSED

    def resume(self) -> None:
        if self.status is not LifecycleStatus.PAUSED:
            raise InvalidTransitionError(f"cannot resume from {self.status.value}")
        self.status = LifecycleStatus.PLAYING

    def _end_episode(self, outcome: str, reason: str) -> None:
        self._outcome = outcome
        self._reason = reason
        self.status = LifecycleStatus.TERMINAL

    # -- time --------------------------------------------------------------

    def advance(self, dt_ms: int) -> None:
        """Simulate `floor(dt * speed)` milliseconds of game time.

        Paused sessions ignore advancement entirely; sub-tick remainders
        carry over to the next call.
        """
        if dt_ms < 0:
            raise ValueError("dt must be non-negative")
        if self.status is LifecycleStatus.PAUSED:
            return
        sim_ms = int(dt_ms * self.speed)
        self.total_sim_ms += sim_ms
        if self.status is LifecycleStatus.PLAYING:
            self.game_time_ms += sim_ms
        self._pending_ms += sim_ms
        period = self.definition.tick_period_ms
        while self._pending_ms >= period:
            self._pending_ms -= period
            self._tick()

    def _tick(self) -> None:
        if self.status is LifecycleStatus.LOADING:
            self._loading_left -= 1
            if self._loading_left <= 0:
                self.status = LifecycleStatus.READY
        elif self.status is LifecycleStatus.PLAYING:
            self.tick_count += 1
            self._tick_playing()

    # -- input -------------------------------------------------------------

    _START_EVENTS = frozenset({"key_down", "mouse_down"})

    def apply_events(self, events: Sequence[AtomicEvent]) -> None:
        """Consume atomic events in order.

        Waits advance the clock; key and mouse events feed the game's
        input handlers. The first press on a ready session starts play.
        """
        if self.status not in (LifecycleStatus.READY, LifecycleStatus.PLAYING):
            raise NotActionableError(f"session is {self.status.value}, not actionable")
        for event in events:
            if event.kind == "wait":
                self.advance(event.duration_ms or 0)
                continue
            if event.kind == "idle":
                continue
            if event.kind == "mouse_move":
                # cursor state tracks even before play starts
                self.on_mouse_move(event.x or 0, event.y or 0)
                continue
            if self.status is LifecycleStatus.READY and event.kind in self._START_EVENTS:
                self.status = LifecycleStatus.PLAYING
            if self.status is not LifecycleStatus.PLAYING:
                continue
            if event.kind == "key_down":
                self.on_key_down(event.key)
            elif event.kind == "key_up":
                self.on_key_up(event.key)
            elif event.kind == "mouse_down":
                self.on_mouse_down(event.button or "left")
            elif event.kind == "mouse_up":
                self.on_mouse_up(event.button or "left")
            elif event.kind == "scroll":
                self.on_scroll(event.amount or 0)

    # -- state -------------------------------------------------------------

    def get_state(self) -> StateSnapshot:
        game_state = {"score": self._score(), "level": self._level(),
                      "progress": self._progress()}
        game_state.update(self._game_state())
        return StateSnapshot(
            game_id=self.definition.game_id,
            seed=self.seed,
            timestamp_ms=TIMESTAMP_BASE_MS + self.total_sim_ms,
            game_time_ms=self.game_time_ms,
            status=self.status,
            terminal=TerminalInfo(
                is_terminal=self.status is LifecycleStatus.TERMINAL,
                outcome=self._outcome,
                reason=self._reason,
            ),
            game_state=game_state,
            metrics=self._metrics(),
            raw=self._raw(),
        )

    def render_observation(self) -> Observation:
        return Observation(text_grid=self.render_text(), frame=self.render_frame())

    # -- game hooks (override per game) -------------------------------------

    def _setup_episode(self) -> None:
        raise NotImplementedError

    def _tick_playing(self) -> None:
        pass

    def on_key_down(self, key: str) -> None:
        pass

    def on_key_up(self, key: str) -> None:
        pass

    def on_mouse_down(self, button: str) -> None:
        pass

    def on_mouse_up(self, button: str) -> None:
        pass

    def on_mouse_move(self, x: int, y: int) -> None:
        self.cursor = (x, y)

    def on_scroll(self, amount: int) -> None:
        pass

    def _score(self) -> float:
        return 0

    def _level(self) -> str:
        return "1"

    def _progress(self) -> float | None:
        return None

    def _game_state(self) -> dict[str, Any]:
        return {}

    def _metrics(self) -> dict[str, Any]:
        return {}

    def _raw(self) -> dict[str, Any]:
        return {}

    def render_text(self) -> str:
        raise NotImplementedError

    def render_frame(self) -> bytes:
        raise NotImplementedError

    cursor: tuple[int, int] = (0, 0)


# -- frame helpers ----------------------------------------------------------

Color = tuple[int, int, int]

PALETTE: dict[str, Color] = {
    "bg": (24, 24, 32),
    "grid": (48, 48, 60),
    "fg": (220, 220, 220),
    "accent": (255, 180, 40),
    "good": (80, 200, 120),
    "bad": (220, 70, 70),
    "info": (90, 140, 240),
    "dim": (110, 110, 120),
}


def render_p6(width: int, height: int, pixel_rows: Sequence[bytes]) -> bytes:
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    return header + b"".join(pixel_rows)


def render_cell_frame(cells: Sequence[Sequence[Color]], cell_px: int = 8) -> bytes:
    """Rasterise a colour grid into a P6 pixmap, one block per cell."""
    rows = len(cells)
    cols = len(cells[0]) if rows else 0
    width, height = cols * cell_px, rows * cell_px
    out: list[bytes] = []
    for row in cells:
        scan = b"".join(bytes(color) * cell_px for color in row)
        out.extend([scan] * cell_px)
    return render_p6(width, height, out)
