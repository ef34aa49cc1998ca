"""Encodings of sparse recovery and number partitioning as well-posedness questions.

Each encoding comes with a brute-force oracle that answers the original
combinatorial question directly, so that the equivalence can be tested.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import budget as _budget
from .exact import (
    RationalMatrix,
    Vector,
    as_matrix,
    independent_subset,
    inverse,
    nullspace,
    primitive_integer,
    rank,
    scale,
    solve,
    unit,
    vec,
)
from .polyhedra import HPolyhedron
from .pwl import affine, cpwl_sum, indicator, l1_norm, linf_ball_indicator, nonneg_indicator, tv
from .tvgraph import path_graph
from .wellposed import ProblemInstance


class InfeasibleError(ValueError):
    """The right-hand side is not in the range of the matrix."""


@dataclass(frozen=True)
class L0Instance:
    """``min ||z||_0`` subject to ``B z = y`` (and ``z >= 0`` when ``nonneg``)."""

    B: RationalMatrix
    y: tuple
    nonneg: bool = False

    def __post_init__(self):
        B = as_matrix(self.B)
        y = vec(self.y)
        if len(y) != B.nrows:
            raise ValueError("y has the wrong length")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class PartitionInstance:
    weights: tuple

    def __post_init__(self):
        w = tuple(int(a) for a in self.weights)
        if not w:
            raise ValueError("partition instance needs at least one weight")
        if any(a <= 0 for a in w):
            raise ValueError("weights must be positive integers")
        object.__setattr__(self, "weights", w)


def least_norm_solution(B: RationalMatrix, y: Sequence) -> Vector:
    """Minimum Euclidean norm solution of ``B z = y`` (exact)."""
    y = vec(y)
    rows = independent_subset(B.rows, B.ncols)
    if not rows:
        if any(y):
            raise InfeasibleError("y is not in the range of B")
        return tuple(Fraction(0) for _ in range(B.ncols))
    Br = B.select_rows(rows)
    w = inverse(Br @ Br.T).matvec([y[i] for i in rows])
    v = Br.rmatvec(w)
    if B.matvec(v) != y:
        raise InfeasibleError("y is not in the range of B")
    return v


def _integer_rows(vectors) -> list[tuple[Fraction, ...]]:
    return [tuple(Fraction(a) for a in primitive_integer(v)) for v in vectors]


def reduce_l0(inst: L0Instance) -> ProblemInstance:
    """Problem whose ill-posedness number equals the l0 minimum.

    ``A`` has the null space of ``B`` as row space and
    ``f(x) = -v.x + indicator(box)`` (or of ``{x <= v}`` for the
    nonnegative variant), ``v`` being the least-norm solution of ``B v = y``.
    """
    B = inst.B
    n = B.ncols
    v = least_norm_solution(B, inst.y)
    rows = _integer_rows(nullspace(B).basis)
    A = RationalMatrix(rows, ncols=n)
    lin = affine(scale(-1, v))
    if inst.nonneg:
        dom = HPolyhedron(n, tuple((unit(n, i), v[i]) for i in range(n)))
        f = cpwl_sum(lin, indicator(dom))
    else:
        f = cpwl_sum(lin, linf_ball_indicator(n))
    return ProblemInstance(A, f)


def brute_force_l0(inst: L0Instance, budget: int | None = None) -> int:
    """Minimum support size by enumerating supports with independent columns."""
    B, y = inst.B, inst.y
    n = B.ncols
    _budget.check("supports", 2**n, budget)
    cols = [B.col(j) for j in range(n)]
    for s in range(n + 1):
        for S in itertools.combinations(range(n), s):
            sub_cols = [cols[j] for j in S]
            if s and rank(RationalMatrix.from_columns(sub_cols, B.nrows)) < s:
                continue
            if s == 0:
                if all(a == 0 for a in y):
                    return 0
                continue
            M = RationalMatrix.from_columns(sub_cols, B.nrows)
            z = solve(M, y)
            if z is None or M.matvec(z) != y:
                continue
            if inst.nonneg and any(a < 0 for a in z):
                continue
            return s
    raise InfeasibleError("no solution of B z = y" + (" with z >= 0" if inst.nonneg else ""))


def _complement_rows(w: Sequence) -> RationalMatrix:
    """Integer rows spanning the orthogonal complement of ``w``."""
    n = len(w)
    basis = nullspace(RationalMatrix([vec(w)])).basis
    return RationalMatrix(_integer_rows(basis), ncols=n)


def partition_to_instance(p: PartitionInstance) -> ProblemInstance:
    """l1-regularized instance that is ill-posed iff the weights split evenly."""
    w = p.weights
    if len(w) < 2:
        raise ValueError("need at least two weights")
    return ProblemInstance(_complement_rows(w), l1_norm(len(w)))


def brute_force_partition(p: PartitionInstance) -> bool:
    w = p.weights
    if len(w) > 24:
        raise ValueError("too many weights for exhaustive search")
    total = sum(w)
    if total % 2:
        return False
    # fix the first sign to halve the search
    for signs in itertools.product((1, -1), repeat=len(w) - 1):
        if w[0] + sum(s * a for s, a in zip(signs, w[1:])) == 0:
            return True
    return False


def path_potential(weights: Sequence[int]) -> Vector:
    """``q`` with ``q_0 = 0`` and ``q_i - q_{i+1} = weights_i``."""
    q = [Fraction(0)]
    for d in weights:
        q.append(q[-1] - d)
    return tuple(q)


def tv_partition_instance(p: PartitionInstance, nonneg: bool = False) -> ProblemInstance:
    """Path-graph TV instance that is ill-posed iff the weights split evenly."""
    w = p.weights
    if len(w) < 2:
        raise ValueError("need at least two weights")
    q = path_potential(w)
    g = path_graph(len(w) + 1)
    f = tv(g)
    if nonneg:
        f = cpwl_sum(f, nonneg_indicator(g.node_count))
    return ProblemInstance(_complement_rows(q), f)
