"""The sandpile Markov chain: uniform random drops followed by relaxation."""

import logging
from collections import Counter
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from lattice import DomainError, GridConfig, Vertex, avalanche_from_drop, avalanche_size, require_stable, vertex_at
from waves import find_generators

logger = logging.getLogger(__name__)

MAX_SEED = 2**64 - 1
RNG_NAME = f"numpy.{np.random.PCG64.__name__}"


def make_rng(seed: int) -> np.random.Generator:
    if not 0 <= seed <= MAX_SEED:
        raise DomainError(f"Seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    """Independent streams for concurrent chains sharing one root seed."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(count)]


@dataclass(frozen=True)
class ChainStep:
    drop_vertex: Vertex
    avalanche_size: int
    resulting_config: GridConfig


class StepSummary(NamedTuple):
    t: int
    drop: Vertex
    size: int


@dataclass(frozen=True)
class SizeProfile:
    side: int
    counts_by_size: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts_by_size.values())

    def pmf(self) -> dict[int, Fraction]:
        n = self.side * self.side
        return {k: Fraction(c, n) for k, c in sorted(self.counts_by_size.items())}


def step(cfg: GridConfig, rng: np.random.Generator) -> ChainStep:
    require_stable(cfg, "step")
    v = vertex_at(int(rng.integers(cfg.side * cfg.side)), cfg.side)
    result = avalanche_from_drop(cfg, v)
    return ChainStep(drop_vertex=v, avalanche_size=result.size, resulting_config=result.config)


def run(
    cfg: GridConfig,
    steps: int,
    rng: np.random.Generator,
    checkpoint_every: int | None = None,
    on_checkpoint: Callable[[int, GridConfig], None] | None = None,
    on_step: Callable[[StepSummary], None] | None = None,
) -> tuple[GridConfig, list[StepSummary]]:
    """Apply ``steps`` transitions; only ``(t, drop, size)`` is kept per step.

    With ``checkpoint_every=K`` the configuration after every K-th step is
    handed to ``on_checkpoint``. ``on_step`` sees each summary as it is made,
    so callers can stream records in step order.
    """
    require_stable(cfg, "run")
    if steps < 0:
        raise DomainError(f"Step count must be non-negative, got {steps}")
    if checkpoint_every is not None and checkpoint_every < 1:
        raise DomainError(f"Checkpoint interval must be positive, got {checkpoint_every}")

    summaries = []
    for t in range(1, steps + 1):
        transition = step(cfg, rng)
        cfg = transition.resulting_config
        summary = StepSummary(t, transition.drop_vertex, transition.avalanche_size)
        summaries.append(summary)
        if on_step:
            on_step(summary)
        if checkpoint_every and on_checkpoint and t % checkpoint_every == 0:
            on_checkpoint(t, cfg)
    logger.debug("Chain ran %d steps on L=%d", steps, cfg.side)
    return cfg, summaries


def drop_sizes(cfg: GridConfig, vertices: Iterable[Vertex]) -> list[int]:
    return [avalanche_size(cfg, v) for v in vertices]


def profile_from_sizes(side: int, sizes: Iterable[int]) -> SizeProfile:
    return SizeProfile(side, dict(sorted(Counter(sizes).items())))


def size_profile(cfg: GridConfig) -> SizeProfile:
    """Number of drop vertices per avalanche size, over all L^2 vertices."""
    require_stable(cfg, "size_profile")
    return profile_from_sizes(cfg.side, drop_sizes(cfg, cfg.vertices()))


def size_pmf(cfg: GridConfig) -> dict[int, Fraction]:
    return size_profile(cfg).pmf()


def generator_size_histogram(cfg: GridConfig) -> dict[int, int]:
    return dict(sorted(Counter(len(g) for g in find_generators(cfg)).items()))
