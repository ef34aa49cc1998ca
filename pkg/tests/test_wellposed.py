import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polywell.exact import RationalMatrix, dot, rank
from polywell.numeric import SmoothFidelity
from polywell.pwl import cpwl_sum, enumerate_complexes, face_containing, l1, l1_norm, nonneg_indicator
from polywell.wellposed import (
    PreconditionError,
    ProblemInstance,
    Status,
    accessibility,
    fermat_holds,
    ill_posedness_number,
    monte_carlo_wellposedness,
    non_uniqueness_witness,
    origin_subdiff_dim,
    solution_map_probe,
    solve_exact,
    solve_numeric,
    tikhonov_solve,
    tikhonov_well_posed,
    well_posedness,
)

F = Fraction


def abs_x1():
    return l1([[1, 0]])


def face_with_subdiff_point(f, point):
    for face in enumerate_complexes(f):
        if face.dim_subdiff == 0 and face.generators.base_point == point:
            return face
    raise AssertionError("no such face")


def test_accessibility_examples():
    vertex = face_with_subdiff_point(abs_x1(), (1, 0))
    assert accessibility(ProblemInstance([[1, 0]], abs_x1()), vertex) == (1,)
    assert accessibility(ProblemInstance([[1, 1]], abs_x1()), vertex) is None
    edge = face_containing(l1_norm(2), (1, 0))
    assert edge.dim_subdiff == 1
    assert accessibility(ProblemInstance([[1, 0]], l1_norm(2)), edge) == (1,)


def test_verdict_examples():
    v = well_posedness(ProblemInstance([[1, 0]], abs_x1()))
    assert v.status is Status.ILL_POSED
    assert v.offending_face.generators.base_point == (1, 0)
    assert v.certificate.verify(ProblemInstance([[1, 0]], abs_x1()))
    assert well_posedness(ProblemInstance([[1, 1]], abs_x1())).status is Status.WELL_POSED
    assert well_posedness(ProblemInstance([[1, 0]], l1_norm(2))).status is Status.WELL_POSED


def test_hypothesis_violated_for_thin_domain():
    from polywell.polyhedra import HPolyhedron
    from polywell.pwl import indicator

    f = cpwl_sum(l1_norm(2), indicator(HPolyhedron(2, (), (((0, 1), 0),))))
    assert well_posedness(ProblemInstance([[1, 0]], f)).status is Status.HYPOTHESIS_VIOLATED


def test_ill_posedness_number_examples():
    inst = ProblemInstance([[1, 1, 0]], l1_norm(3))
    assert ill_posedness_number(inst) == 1
    assert ill_posedness_number(inst, exhaustive=True) == 1
    inst = ProblemInstance([[1, -1, F(1, 2), 0, F(-1, 3)]], l1_norm(5))
    assert ill_posedness_number(inst) == 5 - 2
    inst = ProblemInstance([[1, 0], [0, 1]], l1_norm(2))
    assert ill_posedness_number(inst) == 0
    assert well_posedness(inst).status is Status.WELL_POSED


def test_witness_reproduces_worked_example():
    inst = ProblemInstance([[1, 0]], abs_x1())
    face = face_with_subdiff_point(abs_x1(), (1, 0))
    cert = non_uniqueness_witness(inst, face, (1,), x=(1, 0))
    assert cert.b == (2,) and cert.x == (1, 0) and cert.y == (1, 1) and cert.direction == (0, 1)
    assert cert.verify(inst)


def test_witness_along_null_direction():
    inst = ProblemInstance([[1, 1, 0]], l1_norm(3))
    v = well_posedness(inst)
    d = v.certificate.direction
    assert d[2] == 0 and d[0] == -d[1] and d[0] != 0
    assert v.certificate.verify(inst)


def test_witness_precondition():
    inst = ProblemInstance([[1, 0]], l1_norm(2))
    edge = face_containing(l1_norm(2), (1, 0))
    with pytest.raises(PreconditionError):
        non_uniqueness_witness(inst, edge, (1,))


def test_solve_exact_examples():
    inst = ProblemInstance([[1]], l1_norm(1))
    assert solve_exact(inst, (3,)).minimizer == (2,)
    assert solve_exact(inst, (F(1, 2),)).minimizer == (0,)
    r = solve_exact(ProblemInstance([[1, 0]], abs_x1()), (2,))
    assert not r.unique and r.minimizer[0] == 1 and r.flat_direction[0] == 0


def test_solve_numeric_examples():
    inst = ProblemInstance([[1]], l1_norm(1))
    assert abs(solve_numeric(inst, (3,)).minimizer[0] - 2) <= 1e-6
    inst = ProblemInstance([[1, 2], [0, 1]], l1_norm(2))
    assert np.abs(solve_numeric(inst, (0, 0)).minimizer).max() <= 1e-6
    ill = ProblemInstance([[1, 0]], abs_x1())
    r = solve_numeric(ill, (2,))
    assert abs(r.objective - float(solve_exact(ill, (2,)).objective)) <= 1e-6


def test_numeric_custom_fidelity():
    # D(u, b) = 1/2 (u - b)^2 written out by hand equals the quadratic case
    fid = SmoothFidelity(lambda u, b: 0.5 * float((u - b) @ (u - b)), lambda u, b: u - b, 1.0)
    inst = ProblemInstance([[1]], l1_norm(1))
    r = solve_numeric(inst, (3,), fidelity=fid, tol=1e-8)
    assert abs(r.minimizer[0] - 2) <= 1e-5


def test_solution_map_probe_examples():
    inst = ProblemInstance([[1]], l1_norm(1))
    rep = solution_map_probe(inst, (2,), (4,), F(1, 2))
    assert (rep.x1, rep.x2, rep.x_mix) == ((1,), (3,), (2,))
    assert rep.message == "affine identity holds"
    assert solution_map_probe(inst, (2,), (2,), F(1, 3)).affine
    assert solution_map_probe(inst, (2,), (-2,), F(1, 2)).message == "cells differ"


def test_solution_map_probe_requires_wellposed():
    with pytest.raises(PreconditionError):
        solution_map_probe(ProblemInstance([[1, 0]], abs_x1()), (2,), (3,), F(1, 2))


def test_monte_carlo_examples():
    f = l1_norm(3)
    rep = monte_carlo_wellposedness(f, 3, 10, seed=7)
    assert rep.fraction == 1.0 and rep.p == 3
    again = monte_carlo_wellposedness(f, 3, 10, seed=7)
    assert (again.well_posed, again.ill_posed) == (rep.well_posed, rep.ill_posed)
    with pytest.raises(PreconditionError):
        monte_carlo_wellposedness(f, 0, 5)
    empty = monte_carlo_wellposedness(f, 3, 0)
    assert empty.trials == 0 and empty.fraction is None
    below = monte_carlo_wellposedness(f, 1, 3, allow_below_threshold=True)
    assert below.below_threshold


def test_origin_subdiff_dim():
    assert origin_subdiff_dim(l1_norm(3)) == 3
    assert origin_subdiff_dim(cpwl_sum(l1([[1, -1]]), nonneg_indicator(2))) == 1


def test_tikhonov():
    assert not tikhonov_well_posed([[1, 0]], [[1, 0]])
    assert tikhonov_well_posed([[1, 0]], [[0, 1]])
    x = tikhonov_solve([[1, 0]], [[0, 1]], (2,), (3,))
    assert x == (2, 3)


def test_sigma_weights():
    inst = ProblemInstance([[1]], l1_norm(1), sigma=[[2]])
    # minimize (x - 3)^2 + |x|: x = 3 - 1/2
    assert solve_exact(inst, (3,)).minimizer == (F(5, 2),)
    with pytest.raises(ValueError):
        ProblemInstance([[1]], l1_norm(1), sigma=[[-1]])


instances = st.builds(
    lambda rows: rows,
    st.lists(st.lists(st.integers(-2, 2), min_size=3, max_size=3), min_size=1, max_size=3),
)


@given(instances, st.sampled_from(["l1", "tv"]))
def test_scan_matches_exhaustive(rows, kind):
    f = l1_norm(3) if kind == "l1" else l1([[1, -1, 0], [0, 1, -1]])
    inst = ProblemInstance(rows, f)
    assert ill_posedness_number(inst) == ill_posedness_number(inst, exhaustive=True)


@given(instances)
def test_certificates_verify(rows):
    inst = ProblemInstance(rows, l1_norm(3))
    v = well_posedness(inst)
    if v.status is Status.ILL_POSED:
        c = v.certificate
        assert c.verify(inst)
        assert inst.A.matvec(c.x) == inst.A.matvec(c.y)
        assert fermat_holds(inst, c.b, c.x) and fermat_holds(inst, c.b, c.y)
    # the verdict and the ill-posedness number agree
    k = inst.nullity
    ipn = ill_posedness_number(inst)
    assert (v.status is Status.WELL_POSED) == (ipn >= k)


@given(st.lists(st.lists(st.integers(-3, 3), min_size=2, max_size=2), min_size=2, max_size=3),
       st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_exact_solution_is_optimal(rows, b):
    inst = ProblemInstance(rows, l1_norm(2))
    b = tuple(F(a) for a in b[: inst.m])
    r = solve_exact(inst, b)
    assert fermat_holds(inst, b, r.minimizer)
    # no grid point does better
    best = r.objective
    for x0 in range(-6, 7):
        for x1 in range(-6, 7):
            assert inst.objective(b, (F(x0, 2), F(x1, 2))) >= best
