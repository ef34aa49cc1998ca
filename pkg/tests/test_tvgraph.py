import itertools
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from polywell.budget import BudgetExceeded
from polywell.pwl import enumerate_complexes, tv
from polywell.tvgraph import (
    Graph,
    Orientation,
    all_orientations,
    complete_graph,
    ct_axis_instance,
    ct_axis_matrix,
    cycle_graph,
    default_ct_residual,
    difference_matrix,
    format_graph,
    grid_graph,
    is_acyclic,
    nn_tv_vertices,
    orientation_for_point,
    orientation_vertex,
    parse_graph,
    path_graph,
    tv_polytope_vertices,
)

F = Fraction
triangle = complete_graph(3)


def test_difference_matrices():
    assert difference_matrix(path_graph(2)).rows == ((1, -1),)
    assert difference_matrix(path_graph(3)).rows == ((1, -1, 0), (0, 1, -1))
    assert difference_matrix(triangle).rows == ((1, -1, 0), (1, 0, -1), (0, 1, -1))


def test_orientation_vertices():
    assert orientation_vertex(path_graph(2), (1,)) == (1, -1)
    assert orientation_vertex(path_graph(3), (1, -1)) == (1, -2, 1)
    # edges (0,1), (0,2), (1,2); cyclic 0->1->2->0
    cyc = Orientation(triangle, (-1, 1, -1))
    assert not is_acyclic(triangle, cyc)
    assert orientation_vertex(triangle, cyc) == (0, 0, 0)
    assert is_acyclic(triangle, (-1, 1, 1))


def test_arcs_direction():
    u = Orientation(path_graph(2), (1,))
    assert u.arcs() == [(1, 0)]  # points into node 0


def test_vertex_sets():
    assert tv_polytope_vertices(path_graph(2)) == [(-1, 1), (1, -1)]
    assert tv_polytope_vertices(path_graph(3)) == sorted([(1, 0, -1), (-1, 0, 1), (1, -2, 1), (-1, 2, -1)])
    assert len(tv_polytope_vertices(triangle)) == 6
    assert nn_tv_vertices(Graph(1)) == [(0,)]


def test_nn_equals_tv_examples():
    for g in (path_graph(2), path_graph(3), triangle, cycle_graph(4)):
        assert nn_tv_vertices(g) == tv_polytope_vertices(g)


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(2, ((0, 0),))
    with pytest.raises(ValueError):
        Graph(2, ((0, 1), (1, 0)))
    with pytest.raises(ValueError):
        Graph(2, ((0, 2),))


def test_graph_text_round_trip():
    g = grid_graph(2)
    assert parse_graph(format_graph(g)) == g
    with pytest.raises(ValueError):
        parse_graph("3 2\n0 1\n")


def test_orientation_budget():
    with pytest.raises(BudgetExceeded):
        list(all_orientations(complete_graph(5), budget=100))


def test_ct_matrix_layout():
    A = ct_axis_matrix(2)
    assert A.rows == ((1, 0, 1, 0), (0, 1, 0, 1), (1, 1, 0, 0), (0, 0, 1, 1))


def test_default_residual():
    assert default_ct_residual(3) == (-1, 2, -1)
    assert default_ct_residual(4) == (-1, 2, -2, 1)


def test_ct_n4_reproduces_pictured_block():
    cert = ct_axis_instance(4)
    block = [row[:3] for row in cert.grid[:3]]
    assert block == [[-2, 1, -3], [1, 4, 0], [-3, 0, -4]]
    assert cert.holds and cert.acyclic and cert.required_rank == 16


def test_ct_given_partial_residual_is_not_a_vertex():
    cert = ct_axis_instance(3, (-1, 2, -2, -1, 2, -2))
    assert cert.grid == [[-2, 1, -3], [1, 4, 0], [-3, 0, -4]]
    assert sum(cert.point) == -6
    assert not cert.holds


@pytest.mark.parametrize("N", [2, 3, 4, 5, 6])
def test_ct_default_certifies(N):
    cert = ct_axis_instance(N)
    assert cert.holds and cert.instance.rank == 2 * N - 1 < N * N


def test_ct_n2_against_full_enumeration():
    cert = ct_axis_instance(2)
    assert cert.point in tv_polytope_vertices(grid_graph(2))


small_graphs = st.integers(2, 5).flatmap(
    lambda k: st.lists(st.sampled_from(list(itertools.combinations(range(k), 2))), unique=True, max_size=6).map(
        lambda es: Graph(k, tuple(es))
    )
)


@given(small_graphs)
def test_acyclic_matches_networkx(g):
    for u in itertools.islice(all_orientations(g), 16):
        D = nx.DiGraph()
        D.add_nodes_from(range(g.node_count))
        D.add_edges_from(u.arcs())
        assert is_acyclic(g, u) == nx.is_directed_acyclic_graph(D)


@given(small_graphs)
def test_vertex_properties(g):
    verts = tv_polytope_vertices(g)
    assert all(sum(v) == 0 for v in verts)
    if g.is_forest():
        assert len(verts) == 2 ** g.edge_count
    else:
        assert len(verts) < 2 ** g.edge_count
    assert nn_tv_vertices(g) == verts
    for v in verts:
        u = orientation_for_point(g, v)
        assert u is not None and is_acyclic(g, u) and orientation_vertex(g, u) == v


@given(small_graphs)
def test_vertices_are_zero_dim_dual_faces(g):
    faces = enumerate_complexes(tv(g))
    # with lineality along the all-ones direction the smallest subdifferentials are the vertices
    pts = sorted(f.generators.base_point for f in faces if f.dim_subdiff == 0)
    if g.edge_count == 0:
        assert pts == [tuple(F(0) for _ in range(g.node_count))]
    else:
        assert pts == tv_polytope_vertices(g)
