from fractions import Fraction

import numpy as np
import pytest

from avalanche import brute_force_expected_size
from lattice import DomainError, GridConfig, PreconditionError, Vertex, avalanche_size
from markov_chain import (
    RNG_NAME,
    generator_size_histogram,
    make_rng,
    run,
    size_pmf,
    size_profile,
    spawn_rngs,
    step,
)
from square import embedded_square
from waves import find_generators


def test_rng_name_is_recorded():
    assert RNG_NAME == "numpy.PCG64"


def test_seed_must_fit_in_64_bits():
    with pytest.raises(DomainError):
        make_rng(-1)
    with pytest.raises(DomainError):
        make_rng(2**64)


def test_spawned_streams_differ():
    a, b = spawn_rngs(7, 2)
    assert a.integers(2**32, size=4).tolist() != b.integers(2**32, size=4).tolist()


def test_step_on_empty_lattice():
    transition = step(GridConfig.filled(4), make_rng(1))
    assert transition.avalanche_size == 0
    assert sum(transition.resulting_config.heights) == 1


def test_step_on_single_critical_vertex():
    transition = step(GridConfig.filled(1, 3), make_rng(1))
    assert transition.drop_vertex == Vertex(1, 1)
    assert transition.avalanche_size == 1
    assert transition.resulting_config.heights == (0,)


def test_step_requires_stable_input():
    with pytest.raises(PreconditionError):
        step(GridConfig.filled(2, 4), make_rng(1))


def test_zero_steps_returns_the_input():
    cfg = GridConfig.filled(5, 2)
    final, summaries = run(cfg, 0, make_rng(3))
    assert final == cfg
    assert summaries == []


def test_same_seed_same_trajectory():
    cfg = GridConfig.filled(10)
    first = run(cfg, 500, make_rng(7))
    second = run(cfg, 500, make_rng(7))
    assert first == second


def test_run_streams_steps_and_checkpoints():
    cfg = GridConfig.filled(6)
    seen = []
    checkpoints = []
    final, summaries = run(
        cfg, 25, make_rng(11),
        checkpoint_every=10,
        on_checkpoint=lambda t, c: checkpoints.append((t, c)),
        on_step=seen.append,
    )
    assert seen == summaries
    assert [s.t for s in summaries] == list(range(1, 26))
    assert [t for t, _ in checkpoints] == [10, 20]
    assert all(c.is_stable for _, c in checkpoints)
    assert final.is_stable


def test_negative_step_count_is_rejected():
    with pytest.raises(DomainError):
        run(GridConfig.filled(2), -1, make_rng(0))


@pytest.mark.slow
def test_long_run_stays_stable():
    final, summaries = run(GridConfig.filled(20), 10_000, make_rng(2024))
    assert final.is_stable
    assert len(summaries) == 10_000


@pytest.mark.slow
def test_drop_vertices_are_uniform():
    side, steps = 10, 100_000
    _, summaries = run(GridConfig.filled(side), steps, make_rng(12345))
    counts = np.zeros((side, side))
    for s in summaries:
        counts[s.drop.row - 1, s.drop.col - 1] += 1
    mean = steps / side**2
    sd = np.sqrt(steps * (1 / side**2) * (1 - 1 / side**2))
    assert np.abs(counts - mean).max() <= 5 * sd


def test_size_profile_of_empty_lattice():
    assert size_profile(GridConfig.filled(6)).counts_by_size == {0: 36}


def test_size_profile_with_one_critical_vertex():
    rows = [[0] * 5 for _ in range(5)]
    rows[2][2] = 3
    rows[1][2] = 2
    assert size_profile(GridConfig.from_rows(rows)).counts_by_size == {0: 24, 1: 1}


def test_size_profile_matches_per_vertex_relaxation():
    cfg, spec = embedded_square(3, margin=2)
    profile = size_profile(cfg)
    assert profile.total == 49
    assert profile.counts_by_size[0] == 40
    assert sum(k * c for k, c in profile.counts_by_size.items()) == sum(avalanche_size(cfg, v) for v in cfg.vertices())
    assert Fraction(sum(k * c for k, c in profile.counts_by_size.items() if k), 9) == brute_force_expected_size(
        cfg, spec.vertices()
    )


def test_size_pmf_sums_to_one():
    rng = np.random.default_rng(5)
    cfg = GridConfig.from_array(rng.integers(0, 4, size=(8, 8)))
    pmf = size_pmf(cfg)
    assert sum(pmf.values()) == 1
    assert all(isinstance(p, Fraction) for p in pmf.values())


def test_generator_size_histogram():
    cfg, _ = embedded_square(4)
    assert generator_size_histogram(cfg) == {16: 1}
    rng = np.random.default_rng(9)
    cfg = GridConfig.from_array(rng.integers(0, 4, size=(12, 12)))
    assert sum(generator_size_histogram(cfg).values()) == len(find_generators(cfg))
