"""Building world: grid dimensions, target height map, border ring, neighborhoods."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator

# Off-grid sentinel coordinates. Kept integral so actions sort and hash cheaply;
# file formats spell them "S" / "E".
S = -1
E = -2
START = (S, S, S)
END = (E, E, E)


class InstanceError(ValueError):
    """Raised for malformed or infeasible instance descriptions."""


@dataclass(frozen=True)
class GridDims:
    X: int
    Y: int
    Z: int

    def __post_init__(self):
        if self.X < 3 or self.Y < 3:
            raise InstanceError(f"grid must be at least 3x3, got {self.X}x{self.Y}")
        if self.Z < 1:
            raise InstanceError(f"Z must be positive, got {self.Z}")


@dataclass(frozen=True)
class Instance:
    dims: GridDims
    heightmap: tuple[tuple[int, ...], ...]  # heightmap[y][x]
    agent_limit: int
    name: str = ""

    def __post_init__(self):
        X, Y, Z = self.dims.X, self.dims.Y, self.dims.Z
        if len(self.heightmap) != Y or any(len(row) != X for row in self.heightmap):
            raise InstanceError(f"heightmap must be {Y} rows of {X} columns")
        if self.agent_limit < 1:
            raise InstanceError("agent_limit must be >= 1")
        for y, row in enumerate(self.heightmap):
            for x, h in enumerate(row):
                if h < 0 or h > Z - 1:
                    raise InstanceError(f"target height {h} at ({x},{y}) outside [0, {Z - 1}]")
                if h > 0 and self.is_border(x, y):
                    raise InstanceError(f"border target: nonzero height {h} at border cell ({x},{y})")

    @property
    def X(self) -> int:
        return self.dims.X

    @property
    def Y(self) -> int:
        return self.dims.Y

    @property
    def Z(self) -> int:
        return self.dims.Z

    def target(self, x: int, y: int) -> int:
        return self.heightmap[y][x]

    def is_border(self, x: int, y: int) -> bool:
        return x == 0 or y == 0 or x == self.dims.X - 1 or y == self.dims.Y - 1

    def columns(self) -> Iterator[tuple[int, int]]:
        for x in range(self.dims.X):
            for y in range(self.dims.Y):
                yield x, y

    def cells(self) -> Iterator[tuple[int, int, int]]:
        for x, y in self.columns():
            for z in range(self.dims.Z):
                yield x, y, z

    @cached_property
    def total_blocks(self) -> int:
        return sum(map(sum, self.heightmap))

    def to_dict(self) -> dict:
        return {
            "x": self.X,
            "y": self.Y,
            "z": self.Z,
            "agent_limit": self.agent_limit,
            "heightmap": [list(row) for row in self.heightmap],
        }


def make_instance(heightmap, z: int | None = None, agent_limit: int = 1, name: str = "") -> Instance:
    """Build an instance from a row-major ``heightmap[y][x]``; Z defaults to max height + 1."""
    rows = tuple(tuple(int(h) for h in row) for row in heightmap)
    if not rows:
        raise InstanceError("empty heightmap")
    if z is None:
        z = max(max(row) for row in rows) + 1
        z = max(z, 2)
    return Instance(GridDims(len(rows[0]), len(rows), z), rows, agent_limit, name)


def parse_instance(text: str, name: str = "") -> Instance:
    """Parse the JSON instance format.

    ``{"x": int, "y": int, "z": int, "agent_limit": int, "heightmap": [[...], ...]}``
    with ``heightmap[y][x]`` the target height of column (x, y). Extra keys
    (e.g. a ``durations`` section) are ignored here.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed instance file: {exc}") from None
    if not isinstance(doc, dict):
        raise InstanceError("instance file must hold a JSON object")
    missing = [k for k in ("x", "y", "z", "agent_limit", "heightmap") if k not in doc]
    if missing:
        raise InstanceError(f"instance file missing keys: {', '.join(missing)}")
    hm = doc["heightmap"]
    if not isinstance(hm, list) or not all(isinstance(r, list) for r in hm):
        raise InstanceError("heightmap must be a list of rows")
    try:
        X, Y, Z, A = (int(doc[k]) for k in ("x", "y", "z", "agent_limit"))
        rows = tuple(tuple(int(h) for h in row) for row in hm)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"non-integer field: {exc}") from None
    if len(rows) != Y or any(len(r) != X for r in rows):
        raise InstanceError(f"heightmap shape does not match x={X}, y={Y}")
    return Instance(GridDims(X, Y, Z), rows, A, name or str(doc.get("name", "")))


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    return parse_instance(path.read_text(encoding="utf-8"), name=path.stem)


def border_cells(inst: Instance) -> frozenset[tuple[int, int, int]]:
    return frozenset((x, y, 0) for x, y in inst.columns() if inst.is_border(x, y))


def neighbors(inst: Instance, x: int, y: int) -> list[tuple[int, int]]:
    cand = ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1))
    return [(a, b) for a, b in cand if 0 <= a < inst.X and 0 <= b < inst.Y]


def min_border_distance(inst: Instance, x: int, y: int) -> int:
    """Smallest L1 distance between a neighbor of (x, y) and any border cell."""
    best = None
    for nx, ny in neighbors(inst, x, y):
        # nearest border cell to (nx, ny) lies straight toward the closest edge
        d = min(nx, ny, inst.X - 1 - nx, inst.Y - 1 - ny)
        best = d if best is None else min(best, d)
    if best is None:
        raise InstanceError(f"({x},{y}) has no neighbors")
    return best


# Desk-scale instances used throughout the tests and the CLI demos.
E1 = make_instance([[0, 0, 0], [0, 1, 0], [0, 0, 0]], z=2, agent_limit=1, name="E1")
E2 = make_instance(
    [[0, 0, 0, 0], [0, 2, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0]], z=3, agent_limit=2, name="E2"
)
# A lone two-block tower: the second block needs a temporary ramp block.
E3 = make_instance(
    [[0, 0, 0, 0], [0, 2, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]], z=3, agent_limit=2, name="E3"
)
