"""Wired L x L lattice, sandpile configurations and the elementary operators.

Vertices are addressed by 1-based ``(row, col)`` in the public API and by a
0-based row-major index internally: ``index = (row - 1) * L + (col - 1)``.
The sink is implicit; grains sent to it vanish.
"""

import logging
from collections import deque
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

logger = logging.getLogger(__name__)

CRITICAL_HEIGHT = 3
TOPPLE_THRESHOLD = 4


class SandpileError(Exception):
    def __init__(self, message: str, exit_code: int = 3) -> None:
        super().__init__(message)
        self.exit_code = exit_code


class DomainError(SandpileError):
    """Argument outside the domain of an operation (vertex outside the box, bad size)."""


class PreconditionError(SandpileError):
    """Operation called on a configuration or generator it is not defined for."""


@dataclass(frozen=True, order=True)
class Vertex:
    row: int
    col: int

    def __str__(self) -> str:
        return f"({self.row},{self.col})"

    def shifted(self, d_row: int, d_col: int) -> "Vertex":
        return Vertex(self.row + d_row, self.col + d_col)


def check_vertex(v: Vertex, side: int) -> None:
    if not (1 <= v.row <= side and 1 <= v.col <= side):
        raise DomainError(f"Vertex {v} lies outside the {side}x{side} box")


def index_of(v: Vertex, side: int) -> int:
    check_vertex(v, side)
    return (v.row - 1) * side + (v.col - 1)


def vertex_at(index: int, side: int) -> Vertex:
    row, col = divmod(index, side)
    return Vertex(row + 1, col + 1)


@lru_cache(maxsize=64)
def neighbor_table(side: int) -> tuple[tuple[int, ...], ...]:
    """In-box neighbour indices per vertex, ordered up, down, left, right."""
    table = []
    for i in range(side * side):
        row, col = divmod(i, side)
        nbrs = []
        if row > 0:
            nbrs.append(i - side)
        if row < side - 1:
            nbrs.append(i + side)
        if col > 0:
            nbrs.append(i - 1)
        if col < side - 1:
            nbrs.append(i + 1)
        table.append(tuple(nbrs))
    return tuple(table)


def neighbors(v: Vertex, side: int) -> list[Vertex]:
    return [vertex_at(j, side) for j in neighbor_table(side)[index_of(v, side)]]


def sink_degree(v: Vertex, side: int) -> int:
    """Number of edges from ``v`` to the sink (4 minus the in-box degree)."""
    return 4 - len(neighbor_table(side)[index_of(v, side)])


@dataclass(frozen=True)
class GridConfig:
    side: int
    heights: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.side < 1:
            raise DomainError(f"Lattice side must be positive, got {self.side}")
        heights = tuple(int(h) for h in self.heights)
        if len(heights) != self.side * self.side:
            raise DomainError(
                f"Expected {self.side * self.side} heights for L={self.side}, got {len(heights)}"
            )
        object.__setattr__(self, "heights", heights)

    @classmethod
    def filled(cls, side: int, value: int = 0) -> "GridConfig":
        return cls(side, (value,) * (side * side))

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "GridConfig":
        grid = [list(r) for r in rows]
        side = len(grid)
        if any(len(r) != side for r in grid):
            raise DomainError("Grid rows must form a square")
        return cls(side, tuple(h for r in grid for h in r))

    @classmethod
    def from_array(cls, array: np.ndarray) -> "GridConfig":
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise DomainError(f"Expected a square 2-D array, got shape {array.shape}")
        return cls(int(array.shape[0]), tuple(int(h) for h in array.ravel()))

    def to_array(self) -> np.ndarray:
        return np.array(self.heights, dtype=np.int64).reshape(self.side, self.side)

    def rows(self) -> list[list[int]]:
        s = self.side
        return [list(self.heights[r * s:(r + 1) * s]) for r in range(s)]

    def height(self, v: Vertex) -> int:
        return self.heights[index_of(v, self.side)]

    def vertices(self) -> Iterator[Vertex]:
        for i in range(self.side * self.side):
            yield vertex_at(i, self.side)

    def replace(self, heights: Iterable[int]) -> "GridConfig":
        return GridConfig(self.side, tuple(heights))

    @property
    def is_stable(self) -> bool:
        return all(0 <= h <= CRITICAL_HEIGHT for h in self.heights)

    def __str__(self) -> str:
        return "\n".join(" ".join(str(h) for h in row) for row in self.rows())


@dataclass(frozen=True)
class ToppleCounts:
    side: int
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def at(self, v: Vertex) -> int:
        return self.counts[index_of(v, self.side)]


class Avalanche(NamedTuple):
    config: GridConfig
    counts: ToppleCounts
    size: int


def require_stable(cfg: GridConfig, operation: str) -> None:
    if not cfg.is_stable:
        raise PreconditionError(f"{operation} requires a stable configuration")


def mass(cfg: GridConfig) -> int:
    return sum(cfg.heights)


def add_grain(cfg: GridConfig, v: Vertex) -> GridConfig:
    heights = list(cfg.heights)
    heights[index_of(v, cfg.side)] += 1
    return cfg.replace(heights)


def remove_grains(cfg: GridConfig, v: Vertex) -> GridConfig:
    heights = list(cfg.heights)
    heights[index_of(v, cfg.side)] = 0
    return cfg.replace(heights)


def topple(cfg: GridConfig, v: Vertex) -> GridConfig:
    """Apply the toppling operator at ``v``, legal or not."""
    i = index_of(v, cfg.side)
    heights = list(cfg.heights)
    heights[i] -= TOPPLE_THRESHOLD
    for j in neighbor_table(cfg.side)[i]:
        heights[j] += 1
    return cfg.replace(heights)


def is_legal_topple(cfg: GridConfig, v: Vertex) -> bool:
    return cfg.height(v) > CRITICAL_HEIGHT


def toppling_matrix(side: int) -> np.ndarray:
    """Dense L^2 x L^2 matrix: 4 on the diagonal, -1 between in-box neighbours."""
    n = side * side
    delta = 4 * np.eye(n, dtype=np.int64)
    for i, nbrs in enumerate(neighbor_table(side)):
        delta[i, list(nbrs)] = -1
    return delta


def stabilize(heights: list[int], side: int, rng: np.random.Generator | None = None) -> list[int]:
    """Topple unstable vertices of ``heights`` in place until stable.

    Returns per-vertex topple counts. Without ``rng`` a FIFO worklist is used and
    a vertex holding ``h`` grains fires ``h // 4`` times at once; with ``rng``
    the next vertex is drawn uniformly from the unstable ones and fires once.
    """
    table = neighbor_table(side)
    counts = [0] * len(heights)

    if rng is None:
        pending = deque(i for i, h in enumerate(heights) if h >= TOPPLE_THRESHOLD)
        while pending:
            i = pending.popleft()
            times = heights[i] // TOPPLE_THRESHOLD
            if times <= 0:
                continue
            heights[i] -= TOPPLE_THRESHOLD * times
            counts[i] += times
            for j in table[i]:
                heights[j] += times
                if heights[j] >= TOPPLE_THRESHOLD:
                    pending.append(j)
        return counts

    unstable = [i for i, h in enumerate(heights) if h >= TOPPLE_THRESHOLD]
    while unstable:
        k = int(rng.integers(len(unstable)))
        i = unstable[k]
        heights[i] -= TOPPLE_THRESHOLD
        counts[i] += 1
        if heights[i] < TOPPLE_THRESHOLD:
            unstable[k] = unstable[-1]
            unstable.pop()
        for j in table[i]:
            heights[j] += 1
            if heights[j] == TOPPLE_THRESHOLD:
                unstable.append(j)
    return counts


def relax(cfg: GridConfig, rng: np.random.Generator | None = None) -> tuple[GridConfig, ToppleCounts]:
    heights = list(cfg.heights)
    counts = stabilize(heights, cfg.side, rng)
    return cfg.replace(heights), ToppleCounts(cfg.side, tuple(counts))


def avalanche_from_drop(
    cfg: GridConfig, v: Vertex, rng: np.random.Generator | None = None
) -> Avalanche:
    require_stable(cfg, "avalanche_from_drop")
    final, counts = relax(add_grain(cfg, v), rng)
    return Avalanche(final, counts, counts.total)


def avalanche_size(cfg: GridConfig, v: Vertex) -> int:
    """x(cfg, v) without building the result objects; ``cfg`` must be stable."""
    heights = list(cfg.heights)
    heights[index_of(v, cfg.side)] += 1
    return sum(stabilize(heights, cfg.side))
