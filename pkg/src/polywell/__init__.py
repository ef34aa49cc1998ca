"""Exact well-posedness analysis for least squares with piecewise-linear regularizers."""

from .budget import BudgetExceeded
from .exact import RationalMatrix, Subspace, format_rational, parse_rational
from .fileformat import ParseError, emit_problem, parse_problem
from .polyhedra import HPolyhedron, VPolyhedron, enumerate_faces, h_to_v, minkowski_sum, v_to_h
from .pwl import (
    CpwlFunction,
    cpwl_sum,
    enumerate_complexes,
    indicator,
    l1,
    l1_norm,
    linf_ball_indicator,
    max_affine,
    nonneg_indicator,
    tv,
)
from .tvgraph import Graph, ct_axis_instance, nn_tv_vertices, tv_polytope_vertices
from .wellposed import (
    ProblemInstance,
    Status,
    ill_posedness_number,
    monte_carlo_wellposedness,
    solve_exact,
    solve_numeric,
    well_posedness,
)

__version__ = "0.1.0"
