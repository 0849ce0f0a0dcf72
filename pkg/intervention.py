"""Effect of emptying one generator vertex on the expected avalanche size."""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from avalanche import expected_avalanche_size
from lattice import CRITICAL_HEIGHT, GridConfig, PreconditionError, Vertex, neighbors, remove_grains, require_stable
from waves import Generator, critical_components

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InterventionResult:
    target: Vertex
    expected_size_after: Fraction
    baseline: Fraction
    ratio: Fraction


@dataclass(frozen=True)
class CornerstoneReport:
    generator: Generator
    stability_level: Fraction
    cornerstones: frozenset[Vertex]


def require_maximal_generator(cfg: GridConfig, generator: Generator | Iterable[Vertex]) -> Generator:
    require_stable(cfg, "intervention analysis")
    generator = Generator.within(cfg, generator)
    for v in generator:
        for w in neighbors(v, cfg.side):
            if w not in generator and cfg.height(w) == CRITICAL_HEIGHT:
                raise PreconditionError(
                    f"Generator at {generator.anchor} is not maximal: critical neighbour {w}"
                )
    return generator


def _remainder_total(cfg: GridConfig, generator: Generator, target: Vertex) -> Fraction:
    """Sum of avalanche sizes over drops in ``generator`` after emptying ``target``."""
    if target not in generator:
        raise PreconditionError(f"Target {target} is not part of the generator at {generator.anchor}")
    emptied = remove_grains(cfg, target)
    remainder = [v for v in generator if v != target]
    total = Fraction(0)
    for component in critical_components(emptied, region=remainder):
        total += len(component) * expected_avalanche_size(emptied, component).expected_size
    return total


def expected_size_after_removal(
    cfg: GridConfig, generator: Generator | Iterable[Vertex], target: Vertex
) -> Fraction:
    generator = require_maximal_generator(cfg, generator)
    return _remainder_total(cfg, generator, target) / len(generator)


def expected_size_given_remainder(
    cfg: GridConfig, generator: Generator | Iterable[Vertex], target: Vertex
) -> Fraction:
    """Same as :func:`expected_size_after_removal`, conditioned on the grain missing ``target``."""
    generator = require_maximal_generator(cfg, generator)
    if len(generator) == 1:
        raise PreconditionError("A single-vertex generator leaves no remainder")
    return _remainder_total(cfg, generator, target) / (len(generator) - 1)


def removal_row(cfg: GridConfig, generator: Generator, baseline: Fraction, target: Vertex) -> InterventionResult:
    after = expected_size_after_removal(cfg, generator, target)
    return InterventionResult(target=target, expected_size_after=after, baseline=baseline, ratio=after / baseline)


def baseline_size(cfg: GridConfig, generator: Generator) -> Fraction:
    baseline = expected_avalanche_size(cfg, generator).expected_size
    if baseline <= 0:
        raise PreconditionError(f"Generator at {generator.anchor} has no positive baseline")
    return baseline


def intervention_table(cfg: GridConfig, generator: Generator | Iterable[Vertex]) -> list[InterventionResult]:
    generator = require_maximal_generator(cfg, generator)
    baseline = baseline_size(cfg, generator)
    return [removal_row(cfg, generator, baseline, target) for target in generator]


def cornerstones_from_table(generator: Generator, table: Sequence[InterventionResult]) -> CornerstoneReport:
    if not table:
        raise PreconditionError("An empty intervention table has no minimum")
    level = min(row.ratio for row in table)
    cornerstones = frozenset(row.target for row in table if row.ratio == level)
    logger.debug(
        "Generator at %s: stability level %s, %d cornerstones",
        generator.anchor, level, len(cornerstones),
    )
    return CornerstoneReport(generator=generator, stability_level=level, cornerstones=cornerstones)


def stability_level(cfg: GridConfig, generator: Generator | Iterable[Vertex]) -> CornerstoneReport:
    generator = require_maximal_generator(cfg, generator)
    return cornerstones_from_table(generator, intervention_table(cfg, generator))
