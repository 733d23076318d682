import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from agentft.errors import DimensionMismatch, InvalidCoordinate
from agentft.topology import (
    NodeStatus,
    PhysicalNode,
    build_grid,
    fit_grid,
    healthy_neighbors,
    neighbors,
    parse_grid,
    route,
)


def brute_neighbors(rows, cols, at):
    return {
        (r, c)
        for r in range(rows)
        for c in range(cols)
        if (r, c) != at and abs(r - at[0]) <= 1 and abs(c - at[1]) <= 1
    }


def test_nine_nodes_map_row_major_onto_3x3():
    grid = build_grid(9, 3, 3)
    assert [grid.cells[c].physical for c in grid.coords()] == list(range(9))
    assert grid.cells[(1, 2)].physical == 5


def test_single_cell_grid_has_no_neighbors():
    grid = build_grid(1, 1, 1)
    assert neighbors(grid, (0, 0)) == set()


def test_4x5_bijection_and_neighbors_match_brute_force():
    grid = build_grid(20, 4, 5)
    coords = [(r, c) for r in range(4) for c in range(5)]
    ids = [grid.cells[c].physical for c in coords]
    assert sorted(ids) == list(range(20))
    for c in coords:
        assert grid.coord_of(grid.cells[c].physical) == c
        assert neighbors(grid, c) == brute_neighbors(4, 5, c)


@pytest.mark.parametrize("args", [(8, 3, 3), (10, 2, 4), (0, 0, 0)])
def test_dimension_mismatch(args):
    with pytest.raises(DimensionMismatch):
        build_grid(*args)


def test_neighbor_examples():
    g33 = build_grid(9, 3, 3)
    assert len(neighbors(g33, (1, 1))) == 8
    assert neighbors(g33, (0, 0)) == {(0, 1), (1, 0), (1, 1)}
    assert len(neighbors(build_grid(20, 4, 5), (0, 2))) == 5


def test_invalid_coordinate():
    with pytest.raises(InvalidCoordinate):
        neighbors(build_grid(9, 3, 3), (3, 0))


def test_healthy_neighbor_filter():
    grid = build_grid(9, 3, 3)
    assert healthy_neighbors(grid, (1, 1)) == neighbors(grid, (1, 1))
    grid.set_status((0, 0), NodeStatus.PREDICTED_FAILING)
    assert healthy_neighbors(grid, (1, 1)) == neighbors(grid, (1, 1)) - {(0, 0)}
    assert len(healthy_neighbors(grid, (1, 1))) == 7
    for c in neighbors(grid, (1, 1)):
        grid.set_status(c, NodeStatus.FAILED)
    assert healthy_neighbors(grid, (1, 1)) == set()


def test_status_never_goes_backwards():
    node = PhysicalNode(0)
    node.transition(NodeStatus.PREDICTED_FAILING)
    with pytest.raises(ValueError):
        node.transition(NodeStatus.HEALTHY)
    node.transition(NodeStatus.FAILED)
    with pytest.raises(ValueError):
        node.transition(NodeStatus.PREDICTED_FAILING)
    direct = PhysicalNode(1)
    direct.transition(NodeStatus.FAILED)
    assert direct.status is NodeStatus.FAILED


def test_exhaustive_properties_up_to_10x10():
    for rows, cols in itertools.product(range(1, 11), repeat=2):
        grid = build_grid(rows * cols, rows, cols)
        for a in grid.coords():
            assert grid.coord_of(grid.cells[a].physical) == a
            na = neighbors(grid, a)
            assert a not in na
            for b in na:
                assert a in neighbors(grid, b)
            if rows >= 3 and cols >= 3:
                assert len(na) in (3, 5, 8)


@given(
    st.integers(1, 12), st.integers(1, 12), st.data(),
)
def test_route_hops_are_adjacent_and_shortest(rows, cols, data):
    src = (data.draw(st.integers(0, rows - 1)), data.draw(st.integers(0, cols - 1)))
    dst = (data.draw(st.integers(0, rows - 1)), data.draw(st.integers(0, cols - 1)))
    path = route(src, dst)
    assert path[0] == src and path[-1] == dst
    assert len(path) - 1 == max(abs(src[0] - dst[0]), abs(src[1] - dst[1]))
    grid = build_grid(rows * cols, rows, cols)
    for a, b in zip(path, path[1:]):
        assert b in neighbors(grid, a)


def test_parse_and_fit_grid():
    assert parse_grid("4x5") == (4, 5)
    assert parse_grid(" 2X2 ") == (2, 2)
    with pytest.raises(DimensionMismatch):
        parse_grid("4by5")
    for capacity in range(1, 200):
        rows, cols = fit_grid(capacity)
        assert rows * cols >= capacity
        assert rows * (cols - 1) < capacity
