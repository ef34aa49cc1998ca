from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from polywell.exact import RationalMatrix
from polywell.fileformat import ParseError, emit_l0, emit_problem, parse_problem
from polywell.polyhedra import HPolyhedron
from polywell.pwl import cpwl_sum, indicator, l1, l1_norm, max_affine, nonneg_indicator, tv
from polywell.reductions import L0Instance
from polywell.tvgraph import path_graph
from polywell.wellposed import ProblemInstance

from conftest import rationals

F = Fraction

BASE = "version 1\nmatrix A 1 2\n  1 0\n"


def err(text):
    with pytest.raises(ParseError) as exc:
        parse_problem(text).instance()
    return exc.value.line, exc.value.col, exc.value.message


def test_builders():
    text = (
        "version 1\n"
        "matrix A 1 3\n 1 1 0\n"
        "graph G 3 2\n 0 1\n 1 2\n"
        "pieces P 2 3\n 1 0 0 ; 0\n -1 0 0 ; 1/2\n"
        "polyhedron Q 2 3\n 1 0 0 <= 4\n 0 0 1 = 0\n"
        "regularizer sum(tv(G, 1/2), max_affine(P), indicator(Q), nonneg_indicator, scale(2, l1(I)))\n"
    )
    inst = parse_problem(text).instance()
    f = inst.f
    assert f.ambient_dim == 3
    assert f((1, 1, 0)) == F(1, 2) * 1 + 1 + 2 * 2


def test_linf_ball_radius():
    f = parse_problem("version 1\ndimension 2\nregularizer linf_ball_indicator(2)\n").function()
    assert f((2, -2)) == 0 and f((3, 0)) == float("inf")


def test_sigma_and_measurement():
    text = "version 1\nmatrix M 1 1\n 1\nmatrix S 1 1\n 3\nmeasurement M\nsigma S\nregularizer l1(I)\n"
    inst = parse_problem(text).instance()
    assert inst.sigma == RationalMatrix([[3]])


def test_meta_and_comments():
    pf = parse_problem("# header\nversion 1  # trailing\nmeta source made by hand\n" + "dimension 1\nregularizer l1(I)\n")
    assert pf.meta == {"source": "made by hand"}


@pytest.mark.parametrize(
    "text, pos",
    [
        ("matrix A 1 1\n 1\n", (1, 1)),
        ("version 2\n", (1, 9)),
        (BASE + "frobnicate 3\n", (4, 1)),
        (BASE.replace("1 0", "1 1/0"), (3, 5)),
        (BASE.replace("1 0", "1"), (3, 3)),
        (BASE + "regularizer l2(I)\n", (4, 13)),
        (BASE + "regularizer l1(I,, 1)\n", (4, 18)),
        (BASE + "regularizer l1(I) extra\n", (4, 19)),
        (BASE + "regularizer max_affine(P)\n", (4, 24)),
        (BASE + "matrix A 1 1\n 1\nregularizer l1(I)\n", (4, 8)),
        (BASE + "regularizer l1(I, 1/0)\n", (4, 19)),
        ("version 1\nmatrix A 2 2\n 1 0\n", (2, 1)),
    ],
)
def test_errors_are_positioned(text, pos):
    line, col, _ = err(text)
    assert (line, col) == pos


def test_dimension_mismatch():
    text = "version 1\nmatrix A 1 3\n 1 0 0\nmatrix L 1 2\n 1 0\nregularizer l1(L)\n"
    with pytest.raises(ParseError):
        parse_problem(text).instance()


def test_missing_dimension():
    with pytest.raises(ParseError):
        parse_problem("version 1\nregularizer nonneg_indicator\n").function()


def test_l0_block():
    text = "version 1\nmatrix B 1 2\n 1 1\nvector y 1\n 3\nl0 B y nonneg\n"
    inst = parse_problem(text).l0_instance()
    assert inst.nonneg and inst.y == (3,)
    again = parse_problem(emit_l0(inst)).l0_instance()
    assert again == inst


def test_round_trip_examples():
    examples = [
        ProblemInstance([[1, 0]], l1([[1, 0]])),
        ProblemInstance([[1, 2, 3]], tv(path_graph(3), F(1, 3))),
        ProblemInstance([[1, 1]], cpwl_sum(l1_norm(2), nonneg_indicator(2)), sigma=[[F(1, 2)]]),
        ProblemInstance([], l1_norm(2)),
        ProblemInstance([[1, 0], [0, 1]], indicator(HPolyhedron(2, (((1, 1), 1),), (((1, -1), 0),)))),
    ]
    for inst in examples:
        again = parse_problem(emit_problem(inst)).instance()
        assert again == inst


@st.composite
def instances(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(0, 3))
    A = [[draw(rationals) for _ in range(n)] for _ in range(m)]
    terms = []
    for _ in range(draw(st.integers(0, 2))):
        k = draw(st.integers(1, 3))
        terms.append(max_affine([(tuple(draw(rationals) for _ in range(n)), draw(rationals)) for _ in range(k)], n=n))
    box = HPolyhedron.box(n, -draw(st.integers(1, 3)), draw(st.integers(1, 3)))
    fs = terms + ([indicator(box)] if draw(st.booleans()) else [])
    f = cpwl_sum(*fs) if fs else l1_norm(n)
    return ProblemInstance(A if m else [], f)


@given(instances())
def test_round_trip_property(inst):
    text = emit_problem(inst, meta={"note": "generated"})
    pf = parse_problem(text)
    assert pf.instance() == inst
    assert pf.meta == {"note": "generated"}
    assert emit_problem(pf.instance(), meta=pf.meta) == text
