"""Bundled toy environments that write canonical logs.

The gridworld is an ASCII-map lava world traversed by a uniformly random
agent; its logged features are the (x, y) offsets from the start cell, chosen
so that risk explanations over them are easy to eyeball. The cliff world is a
continuous random walk on the unit square with a fatal band at high x.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .logmodel import FeatureSchema, TransitionLog, TransitionRecord

TILE_WALL = "#"
TILE_FLOOR = "."
TILE_START = "S"
TILE_LAVA = "L"
TILE_GOAL = "G"

_TILES = {TILE_WALL, TILE_FLOOR, TILE_START, TILE_LAVA, TILE_GOAL}

# Facing deltas as (drow, dcol); the agent starts facing down the map.
_HEADINGS = ("N", "E", "S", "W")
_DELTAS = {"N": (-1, 0), "E": (0, 1), "S": (1, 0), "W": (0, -1)}


@dataclass(frozen=True)
class GridMap:
    """An ASCII lava-world map: '#' wall, '.' floor, 'S' start, 'L' lava, 'G' goal."""

    tiles: tuple[str, ...]
    start: tuple[int, int]

    @staticmethod
    def parse(text: str) -> "GridMap":
        rows = [line for line in text.splitlines() if line.strip()]
        if not rows:
            raise ValueError("map text is empty")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("map rows must all have the same width")
        bad = sorted(set("".join(rows)) - _TILES)
        if bad:
            raise ValueError(f"unknown map tiles: {bad}")
        starts = [
            (r, c)
            for r, row in enumerate(rows)
            for c, t in enumerate(row)
            if t == TILE_START
        ]
        if len(starts) != 1:
            raise ValueError(f"map must have exactly one start tile, found {len(starts)}")
        return GridMap(tuple(rows), starts[0])

    @staticmethod
    def from_file(path: str | Path) -> "GridMap":
        return GridMap.parse(Path(path).read_text(encoding="utf-8"))

    @property
    def n_rows(self) -> int:
        return len(self.tiles)

    @property
    def n_cols(self) -> int:
        return len(self.tiles[0])

    def tile(self, r: int, c: int) -> str | None:
        """Tile at (row, col), or None off the map."""
        if 0 <= r < self.n_rows and 0 <= c < self.n_cols:
            return self.tiles[r][c]
        return None

    def tile_at_offset(self, x: float, y: float) -> str | None:
        """Tile at integer feature offsets (x, y) from the start cell."""
        r0, c0 = self.start
        return self.tile(r0 + int(round(y)), c0 + int(round(x)))


def grid_generate(
    grid: GridMap,
    episodes: int,
    max_steps: int,
    seed: int,
) -> TransitionLog:
    """Roll out a uniformly random agent and log (x, y) offsets from start.

    Actions are forward / rotate-left / rotate-right with equal probability;
    the agent starts at the start tile facing down the map. Forward into a
    wall (or off the map) is a no-op, so rotations and blocked moves show up
    as self-loop transitions. Entering lava logs a fatal terminal record;
    entering the goal logs a non-fatal terminal one. Episodes cut off at
    max_steps are truncated, not terminal.
    """
    if episodes < 1 or max_steps < 1:
        raise ValueError("episodes and max_steps must be at least 1")
    schema = FeatureSchema(("x", "y"))
    rng = np.random.default_rng(seed)
    r0, c0 = grid.start
    out: list[list[TransitionRecord]] = []
    for e in range(episodes):
        eid = f"grid-{e:05d}"
        r, c = grid.start
        heading = 2  # index into _HEADINGS, start facing S
        records = [TransitionRecord(eid, 0, (0.0, 0.0), False, False)]
        for step in range(1, max_steps + 1):
            action = int(rng.integers(3))
            if action == 1:
                heading = (heading - 1) % 4
            elif action == 2:
                heading = (heading + 1) % 4
            else:
                dr, dc = _DELTAS[_HEADINGS[heading]]
                tile = grid.tile(r + dr, c + dc)
                if tile is not None and tile != TILE_WALL:
                    r, c = r + dr, c + dc
            here = grid.tile(r, c)
            fatal = here == TILE_LAVA
            terminal = fatal or here == TILE_GOAL
            records.append(
                TransitionRecord(eid, step, (float(c - c0), float(r - r0)), fatal, terminal)
            )
            if terminal:
                break
        out.append(records)
    return TransitionLog(schema, out)


def cliff_generate(
    episodes: int,
    max_steps: int,
    seed: int,
    step_size: float = 0.08,
    fatal_x: float = 0.9,
) -> TransitionLog:
    """Random walk on [0, 1]^2 where crossing x > fatal_x is fatal.

    Starts uniformly in the safe region, steps uniformly in
    [-step_size, step_size]^2, clipped to the square. An episode ends when it
    enters the fatal band (fatal, terminal) or at max_steps (truncated).
    """
    if episodes < 1 or max_steps < 1:
        raise ValueError("episodes and max_steps must be at least 1")
    if not (0.0 < fatal_x < 1.0):
        raise ValueError("fatal_x must lie strictly inside (0, 1)")
    schema = FeatureSchema(("x", "y"))
    rng = np.random.default_rng(seed)
    out: list[list[TransitionRecord]] = []
    for e in range(episodes):
        eid = f"cliff-{e:05d}"
        start = rng.uniform((0.0, 0.0), (fatal_x, 1.0))
        # scalar arithmetic in the hot loop; the rng call sequence stays the
        # same as drawing one 2-vector per step
        x, y = float(start[0]), float(start[1])
        records = [TransitionRecord(eid, 0, (x, y), False, False)]
        for step in range(1, max_steps + 1):
            dx, dy = rng.uniform(-step_size, step_size, size=2)
            x = min(1.0, max(0.0, x + float(dx)))
            y = min(1.0, max(0.0, y + float(dy)))
            fatal = x > fatal_x
            records.append(TransitionRecord(eid, step, (x, y), fatal, fatal))
            if fatal:
                break
        out.append(records)
    return TransitionLog(schema, out)


def bundled_map_text(name: str) -> str:
    """Text of a map shipped with the package (see bundled_map_names())."""
    res = resources.files("risklens").joinpath("maps", f"{name}.txt")
    try:
        return res.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValueError(
            f"no bundled map {name!r}; available: {bundled_map_names()}"
        ) from None


def bundled_map(name: str) -> GridMap:
    return GridMap.parse(bundled_map_text(name))


def bundled_map_names() -> list[str]:
    maps_dir = resources.files("risklens").joinpath("maps")
    return sorted(p.name[: -len(".txt")] for p in maps_dir.iterdir() if p.name.endswith(".txt"))
