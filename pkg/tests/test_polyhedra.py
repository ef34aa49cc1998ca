from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.spatial import ConvexHull

from polywell.budget import BudgetExceeded
from polywell.exact import dot, rank, sub
from polywell.polyhedra import (
    HPolyhedron,
    VPolyhedron,
    dimension,
    enumerate_faces,
    h_to_v,
    lp_feasible,
    minkowski_sum,
    normal_cone,
    prune,
    relative_interior_point,
    same_set,
    v_to_h,
)

F = Fraction


def square():
    return HPolyhedron.box(2)


def test_square_faces():
    faces = enumerate_faces(square())
    dims = [f.dim for f in faces]
    assert dims.count(0) == 4 and dims.count(1) == 4 and dims.count(2) == 1
    assert faces[-1].point == (0, 0)


def test_segment_faces():
    seg = HPolyhedron(2, (((1, 0), 1), ((-1, 0), 0)), (((0, 1), 0),))
    faces = enumerate_faces(seg)
    assert sorted(f.dim for f in faces) == [0, 0, 1]


def test_triangle_relint():
    tri = HPolyhedron(2, (((-1, 0), 0), ((0, -1), 0), ((1, 1), 1)))
    assert relative_interior_point(tri) == (F(1, 3), F(1, 3))
    assert dimension(tri) == 2


def test_empty_set_certificate():
    P = HPolyhedron(1, (((1,), 0), ((-1,), -1)))
    r = lp_feasible(P)
    assert not r.feasible
    lam, mu = r.certificate
    assert all(a >= 0 for a in lam)
    assert lam[0] - lam[1] == 0 and -lam[1] == -1


def test_normal_cone_at_corner():
    C = normal_cone(square(), (1, 1))
    assert same_set(prune(C), VPolyhedron(2, ((0, 0),), ((1, 0), (0, 1))))


def test_h_to_v_square():
    V = h_to_v(square())
    assert sorted(V.points) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    assert not V.rays


def test_h_to_v_with_lineality():
    # half-plane x >= 0 in R^2: apex (0,0), ray e1, lineality +-e2
    P = HPolyhedron(2, (((-1, 0), 0),))
    V = h_to_v(P)
    assert same_set(V, P)
    assert (0, 1) in V.rays and (0, -1) in V.rays


def test_v_to_h_round_trip():
    V = VPolyhedron(2, ((0, 0), (2, 0), (0, 2), (1, 1)))
    H = v_to_h(V)
    assert same_set(H, V)
    assert sorted(h_to_v(H).points) == [(0, 0), (0, 2), (2, 0)]


def test_nn_tv_two_node_sum():
    seg = VPolyhedron(2, ((1, -1), (-1, 1)))
    cone = VPolyhedron(2, ((0, 0),), ((-1, 0), (0, -1)))
    S = minkowski_sum(seg, cone)
    assert sorted(S.points) == [(-1, 1), (1, -1)]


def test_face_budget():
    cube = HPolyhedron.box(4)
    with pytest.raises(BudgetExceeded):
        enumerate_faces(cube, budget=10)


def test_budget_env_override(monkeypatch):
    monkeypatch.setenv("POLYWELL_BUDGET", "faces=5")
    with pytest.raises(BudgetExceeded) as exc:
        enumerate_faces(HPolyhedron.box(3))
    assert exc.value.bound == "faces" and exc.value.limit == 5


@pytest.mark.parametrize("n, expected", [(1, 3), (2, 9), (3, 27)])
def test_cube_face_counts(n, expected):
    assert len(enumerate_faces(HPolyhedron.box(n))) == expected


points = st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5)), min_size=4, max_size=9)


@given(points)
def test_vertices_match_scipy_hull(pts):
    pts = sorted(set(pts))
    assume(len(pts) >= 4 and rank([sub(p, pts[0]) for p in pts[1:]]) == 3)
    V = VPolyhedron(3, tuple(tuple(F(a) for a in p) for p in pts))
    H = v_to_h(V)
    verts = sorted(h_to_v(H).points)
    hull = ConvexHull(np.array(pts, dtype=float))
    ref = sorted(tuple(F(a) for a in pts[i]) for i in hull.vertices)
    assert verts == ref
    # every facet inequality is valid for every input point
    for a, b in H.inequalities:
        assert all(dot(a, p) <= b for p in V.points)


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=5),
       st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=5))
def test_minkowski_sum_contains_pairwise_sums(p, q):
    P = VPolyhedron(2, tuple(tuple(map(F, a)) for a in set(p)))
    Q = VPolyhedron(2, tuple(tuple(map(F, a)) for a in set(q)))
    S = minkowski_sum(P, Q)
    for a in P.points:
        for b in Q.points:
            assert S.contains(tuple(x + y for x, y in zip(a, b)))
    # every vertex of the sum is a sum of vertices
    sums = {tuple(x + y for x, y in zip(a, b)) for a in P.points for b in Q.points}
    assert set(S.points) <= sums


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=6))
def test_faces_euler_characteristic_2d(pts):
    V = VPolyhedron(2, tuple(tuple(map(F, a)) for a in set(pts)))
    faces = enumerate_faces(V)
    counts = [sum(1 for f in faces if f.dim == d) for d in range(3)]
    top = max(f.dim for f in faces)
    # bounded polytopes: alternating face count sum is 1
    assert counts[0] - counts[1] + counts[2] == 1
    assert sum(1 for f in faces if f.dim == top) == 1
