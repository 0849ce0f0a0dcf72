"""Exact expected avalanche size of a generator via its wave tree."""

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction

from lattice import GridConfig, PreconditionError, Vertex, avalanche_size, check_vertex, require_stable
from waves import Generator, first_wave

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WaveTree:
    wave_size: int
    branches: tuple["AnalysisReport", ...]


@dataclass(frozen=True)
class AnalysisReport:
    generator: Generator
    expected_size: Fraction
    depth: int
    wave_tree: WaveTree


def expected_avalanche_size(cfg: GridConfig, generator: Generator | Iterable[Vertex]) -> AnalysisReport:
    """E[X | the next grain lands uniformly in ``generator``], exactly.

    The first wave contributes its full size for every landing vertex; each
    component still critical after it contributes its own expectation in the
    post-wave configuration, weighted by its share of the generator.
    """
    generator = Generator.within(cfg, generator)
    outcome = first_wave(cfg, generator)
    branches = tuple(
        expected_avalanche_size(outcome.post_config, component)
        for component in outcome.active_components
    )
    expected = Fraction(outcome.wave.size) + sum(
        (Fraction(len(b.generator), len(generator)) * b.expected_size for b in branches),
        Fraction(0),
    )
    depth = 1 + max((b.depth for b in branches), default=0)
    logger.debug(
        "Generator at %s (|A|=%d): first wave %d, expected %s, depth %d",
        generator.anchor, len(generator), outcome.wave.size, expected, depth,
    )
    return AnalysisReport(
        generator=generator,
        expected_size=expected,
        depth=depth,
        wave_tree=WaveTree(outcome.wave.size, branches),
    )


def depth(cfg: GridConfig, generator: Generator | Iterable[Vertex]) -> int:
    return expected_avalanche_size(cfg, generator).depth


def brute_force_expected_size(cfg: GridConfig, vertices: Iterable[Vertex]) -> Fraction:
    """Average avalanche size over drops at each vertex of ``vertices``, by full relaxation."""
    require_stable(cfg, "brute_force_expected_size")
    targets = sorted(set(vertices))
    if not targets:
        raise PreconditionError("Cannot average over an empty vertex set")
    for v in targets:
        check_vertex(v, cfg.side)
    return Fraction(sum(avalanche_size(cfg, v) for v in targets), len(targets))
