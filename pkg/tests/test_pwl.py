import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog as scipy_linprog

from polywell.budget import BudgetExceeded
from polywell.exact import dot, nullspace, rank, sub
from polywell.polyhedra import HPolyhedron
from polywell.pwl import (
    CellPattern,
    conjugate_value,
    cpwl_sum,
    enumerate_complexes,
    evaluate,
    face_containing,
    fenchel_young_check,
    in_subdifferential,
    indicator,
    l1,
    l1_norm,
    linf_ball_indicator,
    max_affine,
    nonneg_indicator,
    pattern_at,
    scaled,
    subdifferential,
    tv,
)
from polywell.tvgraph import path_graph

F = Fraction


def linf_max_one():
    pieces = [((0, 0), 1), ((1, 0), 0), ((-1, 0), 0), ((0, 1), 0), ((0, -1), 0)]
    return max_affine(pieces)


def cell_directions(face):
    rows = face.cell.equality_rows(face.cell.analysis.implicit)
    if not rows:
        return [tuple(F(int(i == j)) for j in range(face.cell.ambient_dim)) for i in range(face.cell.ambient_dim)]
    return list(nullspace(rows).basis)


def assert_duality(f):
    n = f.ambient_dim
    faces = enumerate_complexes(f)
    for face in faces:
        assert face.dim_cell + face.dim_subdiff == n
        V = face.subdiff
        diffs = [sub(p, V.points[0]) for p in V.points[1:]] + list(V.rays)
        for d in cell_directions(face):
            for e in diffs:
                assert dot(d, e) == 0
        assert pattern_at(f, face.relint_point) == face.pattern
    return faces


def test_l1_plane_complex():
    faces = assert_duality(l1_norm(2))
    assert len(faces) == 9
    assert [f.dim_subdiff for f in faces].count(0) == 4
    top = faces[-1]
    assert top.dim_subdiff == 2 and top.relint_point == (0, 0)
    assert sorted(top.subdiff.points) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]


def test_linf_max_one_complex():
    faces = assert_duality(linf_max_one())
    assert len(faces) == 17
    assert sorted(f.dim_cell for f in faces) == [0] * 4 + [1] * 8 + [2] * 5


def test_abs_diff_with_orthant():
    f = cpwl_sum(l1([[1, -1]]), nonneg_indicator(2))
    faces = assert_duality(f)
    # cells: two open wedges, the diagonal ray, two boundary rays, the origin
    assert len(faces) == 6


def test_evaluate():
    f = l1_norm(2)
    assert evaluate(f, (3, -2)) == 5
    g = cpwl_sum(f, linf_ball_indicator(2))
    assert evaluate(g, (2, 0)) == math.inf
    assert g((F(1, 2), 0)) == F(1, 2)


def test_conjugate_of_l1():
    f = l1_norm(2)
    assert conjugate_value(f, (F(1, 2), -1)) == 0
    assert conjugate_value(f, (2, 0)) == math.inf


def test_fenchel_young():
    f = l1_norm(2)
    assert fenchel_young_check(f, (1, 0), (1, F(1, 3)))
    assert not fenchel_young_check(f, (1, 0), (0, 0))


def test_subdifferential_at_kink():
    S = subdifferential(l1_norm(2), (0, 5))
    assert sorted(S.points) == [(-1, 1), (1, 1)]


def test_subdifferential_on_boundary_has_normal_rays():
    f = nonneg_indicator(2)
    assert in_subdifferential(f, (0, 1), (-7, 0))
    assert not in_subdifferential(f, (0, 1), (1, 0))


def test_pattern_string():
    p = CellPattern((frozenset({0, 1}), frozenset({1})), frozenset({2}))
    assert str(p) == "[{0 1},{1}|2]"


def test_builders_validate():
    with pytest.raises(ValueError):
        cpwl_sum(l1_norm(2), l1_norm(3))
    with pytest.raises(ValueError):
        scaled(l1_norm(2), 0)
    with pytest.raises(ValueError):
        indicator(HPolyhedron(1, (((1,), 0), ((-1,), -1))))


def test_tv_is_l1_of_differences():
    f = tv(path_graph(3), 2)
    assert evaluate(f, (1, 4, 0)) == 2 * (3 + 4)


def test_pieces_budget(monkeypatch):
    f = l1_norm(6)
    assert len(f.pieces) == 64
    monkeypatch.setenv("POLYWELL_BUDGET", "pieces=10")
    with pytest.raises(BudgetExceeded):
        f.pieces


def test_face_containing():
    face = face_containing(l1_norm(2), (0, 3))
    assert face.dim_cell == 1 and face.dim_subdiff == 1


pieces_2d = st.lists(
    st.tuples(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), st.integers(-2, 2)), min_size=1, max_size=5
)


@given(pieces_2d)
def test_random_max_affine_duality(pieces):
    f = max_affine(pieces)
    faces = assert_duality(f)
    # a piece owns a full-dimensional cell iff an LP finds slack where it strictly wins
    P = f.terms[0]
    owners = set()
    for i, (v, w) in enumerate(P):
        A_ub = [[float(u - vi) for u, vi in zip(v2, v)] + [1.0] for k, (v2, w2) in enumerate(P) if k != i]
        b_ub = [float(w - w2) for k, (v2, w2) in enumerate(P) if k != i]
        if not A_ub:
            owners.add(i)
            continue
        r = scipy_linprog([0, 0, -1], A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * 2 + [(None, 1)], method="highs")
        if r.status == 0 and -r.fun > 1e-9:
            owners.add(i)
    maximal = [fc for fc in faces if fc.dim_cell == 2]
    assert len(maximal) == len(owners)
    assert {next(iter(fc.pattern.active_pieces[0])) for fc in maximal} == owners


@given(pieces_2d, st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_evaluate_matches_expanded_pieces(pieces, x):
    f = cpwl_sum(max_affine(pieces), l1_norm(2))
    assert evaluate(f, x) == max(dot(v, x) + w for v, w in f.pieces)


@given(pieces_2d, st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_subgradients_satisfy_fenchel_young(pieces, x):
    f = max_affine(pieces)
    S = subdifferential(f, x)
    for y in S.points:
        assert fenchel_young_check(f, x, y)
    # the conjugate agrees with an independent float LP
    y = S.points[0]
    fl = [float(a) for a in y]
    A_ub = [[float(a) for a in v] + [-1.0] for v, _ in f.terms[0]]
    b_ub = [-float(w) for _, w in f.terms[0]]
    r = scipy_linprog(-np.array(fl + [-1.0]), A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * 3, method="highs")
    assert r.status == 0 and abs(-r.fun - float(conjugate_value(f, y))) < 1e-9
