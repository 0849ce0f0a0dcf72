"""Generators, the first wave of an avalanche and full wave decompositions."""

import logging
from collections import deque
from collections.abc import Iterable, Iterator
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from lattice import (
    CRITICAL_HEIGHT,
    TOPPLE_THRESHOLD,
    GridConfig,
    PreconditionError,
    Vertex,
    check_vertex,
    index_of,
    neighbor_table,
    require_stable,
    vertex_at,
)

logger = logging.getLogger(__name__)

_FOUR_NEIGHBOUR = ndimage.generate_binary_structure(2, 1)


def is_connected(vertices: Iterable[Vertex]) -> bool:
    vertices = set(vertices)
    if not vertices:
        return False
    top = min(v.row for v in vertices)
    left = min(v.col for v in vertices)
    mask = np.zeros(
        (max(v.row for v in vertices) - top + 1, max(v.col for v in vertices) - left + 1), dtype=bool
    )
    for v in vertices:
        mask[v.row - top, v.col - left] = True
    _, count = ndimage.label(mask, structure=_FOUR_NEIGHBOUR)
    return count == 1


@dataclass(frozen=True)
class Generator:
    """Connected set of critical vertices; maximality is not required."""

    vertices: frozenset[Vertex]

    def __post_init__(self) -> None:
        vertices = frozenset(self.vertices)
        if not vertices:
            raise PreconditionError("A generator must contain at least one vertex")
        if not is_connected(vertices):
            raise PreconditionError(f"Generator anchored at {min(vertices)} is not connected")
        object.__setattr__(self, "vertices", vertices)

    @classmethod
    def within(cls, cfg: GridConfig, vertices: Iterable[Vertex]) -> "Generator":
        generator = vertices if isinstance(vertices, Generator) else cls(frozenset(vertices))
        for v in generator.vertices:
            check_vertex(v, cfg.side)
            if cfg.height(v) != CRITICAL_HEIGHT:
                raise PreconditionError(
                    f"Vertex {v} has height {cfg.height(v)}, generators need height {CRITICAL_HEIGHT}"
                )
        return generator

    @property
    def members(self) -> tuple[Vertex, ...]:
        return tuple(sorted(self.vertices))

    @property
    def anchor(self) -> Vertex:
        return min(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self) -> Iterator[Vertex]:
        return iter(self.members)

    def __contains__(self, v: object) -> bool:
        return v in self.vertices


@dataclass(frozen=True)
class WaveTrace:
    toppled: tuple[Vertex, ...]

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.toppled))
        if len(set(ordered)) != len(ordered):
            raise PreconditionError("A wave topples every vertex at most once")
        object.__setattr__(self, "toppled", ordered)

    @classmethod
    def from_indices(cls, indices: Iterable[int], side: int) -> "WaveTrace":
        return cls(tuple(vertex_at(i, side) for i in indices))

    @property
    def size(self) -> int:
        return len(self.toppled)

    def __contains__(self, v: object) -> bool:
        return v in self.toppled


@dataclass(frozen=True)
class WaveOutcome:
    wave: WaveTrace
    post_config: GridConfig
    quiescent_components: frozenset[Vertex]
    active_components: tuple[Generator, ...]


def _require_no_unstable(cfg: GridConfig, operation: str) -> None:
    if any(h > CRITICAL_HEIGHT for h in cfg.heights):
        raise PreconditionError(f"{operation} requires every height to be at most {CRITICAL_HEIGHT}")


def critical_components(cfg: GridConfig, region: Iterable[Vertex] | None = None) -> list[Generator]:
    """Connected components of height-3 vertices, optionally restricted to ``region``.

    Ordered by their smallest vertex (row-major).
    """
    mask = cfg.to_array() == CRITICAL_HEIGHT
    if region is not None:
        allowed = np.zeros_like(mask)
        for v in region:
            allowed[v.row - 1, v.col - 1] = True
        mask &= allowed

    labels, count = ndimage.label(mask, structure=_FOUR_NEIGHBOUR)
    groups: dict[int, list[Vertex]] = {}
    for r, c in np.argwhere(labels):
        groups.setdefault(int(labels[r, c]), []).append(Vertex(int(r) + 1, int(c) + 1))
    components = [Generator(frozenset(vs)) for vs in groups.values()]
    components.sort(key=lambda g: g.anchor)
    logger.debug("Found %d critical components (of %d labels)", len(components), count)
    return components


def find_generators(cfg: GridConfig) -> list[Generator]:
    require_stable(cfg, "find_generators")
    return critical_components(cfg)


def first_wave(
    cfg: GridConfig,
    generator: Generator | Iterable[Vertex],
    rng: np.random.Generator | None = None,
) -> WaveOutcome:
    """First wave of an avalanche started anywhere in ``generator``.

    Follows the directed-graph construction: every generator vertex emits one
    edge per lattice neighbour (sink included in the out-degree), then any
    outside vertex with ``height + indeg - outdeg >= 4`` emits its edges too,
    until none is left. The post-wave heights are ``height + indeg - outdeg``.
    """
    generator = Generator.within(cfg, generator)
    _require_no_unstable(cfg, "first_wave")

    side = cfg.side
    heights = cfg.heights
    table = neighbor_table(side)
    n = side * side
    members = {index_of(v, side) for v in generator.vertices}
    indeg = [0] * n
    outdeg = [0] * n
    wave: list[int] = []

    def emit(i: int) -> None:
        outdeg[i] = TOPPLE_THRESHOLD
        wave.append(i)
        for j in table[i]:
            indeg[j] += 1

    def eligible(j: int) -> bool:
        return j not in members and heights[j] + indeg[j] - outdeg[j] >= TOPPLE_THRESHOLD

    for i in sorted(members):
        emit(i)

    if rng is None:
        queue = deque(j for i in wave for j in table[i])
        while queue:
            j = queue.popleft()
            if eligible(j):
                emit(j)
                queue.extend(table[j])
    else:
        while True:
            candidates = [j for j in range(n) if eligible(j)]
            if not candidates:
                break
            emit(candidates[int(rng.integers(len(candidates)))])

    post = cfg.replace(heights[i] + indeg[i] - outdeg[i] for i in range(n))
    quiescent = frozenset(v for v in generator.vertices if post.height(v) < CRITICAL_HEIGHT)
    active = tuple(critical_components(post, region=generator.vertices))
    logger.debug(
        "First wave from %s (|A|=%d): size %d, %d active components",
        generator.anchor, len(generator), len(wave), len(active),
    )
    return WaveOutcome(
        wave=WaveTrace.from_indices(wave, side),
        post_config=post,
        quiescent_components=quiescent,
        active_components=active,
    )


def _next_wave(heights: list[int], side: int, origin: int, rng: np.random.Generator | None) -> list[int]:
    """Topple ``origin`` once, then relax every other vertex with ``origin`` frozen."""
    table = neighbor_table(side)
    heights[origin] -= TOPPLE_THRESHOLD
    toppled = [origin]

    unstable: list[int] = []
    for j in table[origin]:
        heights[j] += 1
        if heights[j] >= TOPPLE_THRESHOLD:
            unstable.append(j)

    pending = deque(unstable)
    while pending:
        if rng is None:
            i = pending.popleft()
        else:
            k = int(rng.integers(len(pending)))
            pending.rotate(-k)
            i = pending.popleft()
        if heights[i] < TOPPLE_THRESHOLD:
            continue
        heights[i] -= TOPPLE_THRESHOLD
        toppled.append(i)
        for j in table[i]:
            heights[j] += 1
            if j != origin and heights[j] == TOPPLE_THRESHOLD:
                pending.append(j)
    return toppled


def decompose_avalanche(
    cfg: GridConfig, v: Vertex, rng: np.random.Generator | None = None
) -> list[WaveTrace]:
    """Waves of the avalanche caused by dropping one grain at ``v``.

    A drop on a non-critical vertex causes no toppling and yields no waves.
    """
    require_stable(cfg, "decompose_avalanche")
    origin = index_of(v, cfg.side)
    if cfg.heights[origin] < CRITICAL_HEIGHT:
        return []

    heights = list(cfg.heights)
    heights[origin] += 1
    waves = []
    while heights[origin] >= TOPPLE_THRESHOLD:
        waves.append(WaveTrace.from_indices(_next_wave(heights, cfg.side, origin, rng), cfg.side))
    return waves


def waves_confined_to(cfg: GridConfig, region: Iterable[Vertex]) -> bool:
    """True iff no wave started from a critical vertex of ``region`` leaves it."""
    region = frozenset(region)
    for v in sorted(region):
        if cfg.height(v) != CRITICAL_HEIGHT:
            continue
        for wave in decompose_avalanche(cfg, v):
            if not region.issuperset(wave.toppled):
                logger.debug("Wave from %s leaves the region", v)
                return False
    return True
