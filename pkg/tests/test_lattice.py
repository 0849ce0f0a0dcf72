import numpy as np
import pytest

from conftest import random_stable_config, random_unstable_config
from lattice import (
    DomainError,
    GridConfig,
    PreconditionError,
    Vertex,
    add_grain,
    avalanche_from_drop,
    avalanche_size,
    index_of,
    is_legal_topple,
    mass,
    neighbors,
    relax,
    remove_grains,
    require_stable,
    sink_degree,
    topple,
    toppling_matrix,
    vertex_at,
)


def test_index_is_row_major():
    assert index_of(Vertex(1, 1), 5) == 0
    assert index_of(Vertex(2, 3), 5) == 7
    assert vertex_at(7, 5) == Vertex(2, 3)


@pytest.mark.parametrize("v", [Vertex(0, 1), Vertex(1, 0), Vertex(6, 1), Vertex(1, 6)])
def test_vertices_outside_the_box_are_rejected(v):
    with pytest.raises(DomainError):
        index_of(v, 5)


def test_sink_degree_depends_on_position():
    assert sink_degree(Vertex(1, 1), 5) == 2
    assert sink_degree(Vertex(1, 3), 5) == 1
    assert sink_degree(Vertex(3, 3), 5) == 0
    assert sink_degree(Vertex(1, 1), 1) == 4


def test_neighbors_are_ordered_up_down_left_right():
    assert neighbors(Vertex(2, 2), 3) == [Vertex(1, 2), Vertex(3, 2), Vertex(2, 1), Vertex(2, 3)]


def test_config_requires_side_squared_heights():
    with pytest.raises(DomainError):
        GridConfig(3, (0,) * 8)
    with pytest.raises(DomainError):
        GridConfig.from_rows([[0, 1], [2]])


def test_stability_and_mass():
    cfg = GridConfig.from_rows([[3, 0], [1, 2]])
    assert cfg.is_stable
    assert mass(cfg) == 6
    assert not add_grain(cfg, Vertex(1, 1)).is_stable
    with pytest.raises(PreconditionError):
        require_stable(add_grain(cfg, Vertex(1, 1)), "test")


def test_remove_grains_empties_one_vertex():
    cfg = GridConfig.filled(3, 3)
    emptied = remove_grains(cfg, Vertex(2, 2))
    assert emptied.height(Vertex(2, 2)) == 0
    assert mass(emptied) == 24


def test_topple_conserves_mass_in_the_interior_and_loses_it_at_the_boundary():
    cfg = GridConfig.filled(3, 4)
    assert mass(topple(cfg, Vertex(2, 2))) == mass(cfg)
    assert mass(topple(cfg, Vertex(1, 1))) == mass(cfg) - 2
    assert is_legal_topple(cfg, Vertex(2, 2))
    assert not is_legal_topple(GridConfig.filled(3, 3), Vertex(2, 2))


def test_toppling_matrix_rows():
    delta = toppling_matrix(3)
    assert delta.shape == (9, 9)
    assert (np.diag(delta) == 4).all()
    assert (delta == delta.T).all()
    # row sums are the number of edges to the sink
    assert delta.sum(axis=1).tolist() == [2, 1, 2, 1, 0, 1, 2, 1, 2]


def test_topple_matches_toppling_matrix():
    rng = np.random.default_rng(3)
    cfg = random_unstable_config(rng, 6)
    delta = toppling_matrix(6)
    v = Vertex(4, 2)
    expected = np.array(cfg.heights) - delta[index_of(v, 6)]
    assert topple(cfg, v).heights == tuple(expected.tolist())


def test_single_vertex_lattice_topples_everything_into_the_sink():
    result = avalanche_from_drop(GridConfig.filled(1, 3), Vertex(1, 1))
    assert result.size == 1
    assert result.config.heights == (0,)


def test_drop_on_empty_lattice_causes_no_avalanche():
    cfg = GridConfig.filled(5)
    for v in cfg.vertices():
        assert avalanche_size(cfg, v) == 0


def test_avalanche_from_drop_requires_stable_input():
    with pytest.raises(PreconditionError):
        avalanche_from_drop(GridConfig.filled(2, 4), Vertex(1, 1))


def test_full_lattice_drop():
    # all-3 on 3x3: the centre drop topples every vertex once, the centre twice
    result = avalanche_from_drop(GridConfig.filled(3, 3), Vertex(2, 2))
    assert result.counts.at(Vertex(2, 2)) == 2
    assert result.size == 10
    assert result.config.is_stable


@pytest.mark.parametrize("seed", range(50))
def test_relaxation_is_independent_of_toppling_order(seed):
    rng = np.random.default_rng(seed)
    side = int(rng.integers(1, 21))
    cfg = random_unstable_config(rng, side)

    final, counts = relax(cfg)
    shuffled_final, shuffled_counts = relax(cfg, rng=np.random.default_rng(seed + 1000))

    assert final.is_stable
    assert shuffled_final == final
    assert shuffled_counts == counts

    # final = initial - Delta u
    delta = toppling_matrix(side)
    expected = np.array(cfg.heights) - delta @ np.array(counts.counts)
    assert final.heights == tuple(expected.tolist())


@pytest.mark.parametrize("seed", range(100))
def test_avalanche_size_is_monotone_in_the_configuration(seed):
    rng = np.random.default_rng(seed)
    side = 8
    upper = random_stable_config(rng, side)
    lower = GridConfig.from_array(upper.to_array() - rng.integers(0, 2, size=(side, side)).clip(0, upper.to_array()))
    v = vertex_at(int(rng.integers(side * side)), side)
    assert lower.is_stable
    assert avalanche_size(upper, v) >= avalanche_size(lower, v)


@pytest.mark.parametrize("side", [1, 2, 3, 4])
def test_adding_a_grain_commutes_with_toppling(side):
    rng = np.random.default_rng(side)
    cfg = random_unstable_config(rng, side)
    for u in cfg.vertices():
        for v in cfg.vertices():
            assert topple(add_grain(cfg, u), v) == add_grain(topple(cfg, v), u), (u, v)
