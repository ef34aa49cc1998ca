"""Well-posedness of regularized least squares with piecewise linear penalties.

The problem is ``min_x 1/2 ||A x - b||_Sigma^2 + f(x)`` with ``f`` a
:class:`~polywell.pwl.CpwlFunction`.  It is uniquely solvable for every ``b``
exactly when no cell of the complex of ``f`` whose subdifferential meets the
row space of ``A`` has a subdifferential of dimension below the nullity of
``A`` (assuming the domain of ``f`` is full-dimensional).  This module checks
that condition with exact arithmetic, builds explicit pairs of distinct
minimizers when it fails, and provides exact and floating-point solvers.
"""

from __future__ import annotations

import enum
import math
import random
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .exact import (
    RationalMatrix,
    Subspace,
    Vector,
    add,
    as_matrix,
    dot,
    inverse,
    is_positive_definite,
    is_zero,
    nullspace,
    rank,
    scale,
    solve,
    sub,
    unit,
    vec,
    zeros,
)
from . import budget as _budget
from .lp import linprog
from .numeric import SmoothFidelity, pdhg
from .polyhedra import analyze_system
from .pwl import (
    INFINITY,
    CellPattern,
    clear_cache as _clear_complexes,
    CpwlFunction,
    DualFace,
    complex_engine,
    enumerate_complexes,
    evaluate,
    find_combination,
    in_subdifferential,
    iter_dual_faces,
    pattern_at,
    subdifferential_generators,
)


class PreconditionError(ValueError):
    """An operation was called outside its documented domain."""


class WitnessConstructionError(RuntimeError):
    """No pair of distinct minimizers could be built for the given face."""


class SolverError(RuntimeError):
    """The solver found no minimizer (objective unbounded below) or diverged."""


@dataclass(frozen=True)
class ProblemInstance:
    """``min 1/2 ||A x - b||_sigma^2 + f(x)``; ``sigma`` defaults to the identity."""

    A: RationalMatrix
    f: CpwlFunction
    sigma: RationalMatrix | None = None

    def __post_init__(self):
        n = self.f.ambient_dim
        A = self.A
        if not isinstance(A, RationalMatrix):
            rows = list(A)
            A = RationalMatrix(rows, ncols=n) if not rows else RationalMatrix(rows)
        if A.ncols != n and A.nrows:
            raise ValueError(f"A has {A.ncols} columns but f lives in dimension {n}")
        if not A.nrows:
            A = RationalMatrix((), ncols=n)
        object.__setattr__(self, "A", A)
        m = A.nrows
        S = self.sigma
        if S is None:
            S = RationalMatrix.identity(m)
        else:
            S = as_matrix(S)
            if S.shape != (m, m):
                raise ValueError("sigma must be m x m")
            if m and not is_positive_definite(S):
                raise ValueError("sigma must be symmetric positive definite")
        object.__setattr__(self, "sigma", S)

    @property
    def m(self) -> int:
        return self.A.nrows

    @property
    def n(self) -> int:
        return self.f.ambient_dim

    @cached_property
    def rank(self) -> int:
        return self.A.rank() if self.m else 0

    @property
    def nullity(self) -> int:
        return self.n - self.rank

    @cached_property
    def null_space(self) -> Subspace:
        if not self.m:
            return Subspace.whole(self.n)
        return nullspace(self.A)

    @cached_property
    def sigma_inv(self) -> RationalMatrix:
        return inverse(self.sigma) if self.m else self.sigma

    def residual_gradient(self, b: Sequence, x: Sequence) -> Vector:
        """``A^T Sigma (b - A x)``."""
        r = sub(vec(b), self.A.matvec(vec(x)))
        return self.A.rmatvec(self.sigma.matvec(r))

    def objective(self, b: Sequence, x: Sequence):
        x = vec(x)
        fx = evaluate(self.f, x)
        if fx == INFINITY:
            return INFINITY
        r = sub(self.A.matvec(x), vec(b))
        return dot(r, self.sigma.matvec(r)) / 2 + fx


class Status(str, enum.Enum):
    WELL_POSED = "WellPosed"
    ILL_POSED = "IllPosed"
    HYPOTHESIS_VIOLATED = "HypothesisViolated"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class NonUniquenessCertificate:
    b: Vector
    x: Vector
    y: Vector
    direction: Vector

    def verify(self, inst: ProblemInstance) -> bool:
        if self.x == self.y or add(self.x, self.direction) != self.y:
            return False
        if not is_zero(inst.A.matvec(self.direction)):
            return False
        if not (fermat_holds(inst, self.b, self.x) and fermat_holds(inst, self.b, self.y)):
            return False
        return evaluate(inst.f, self.x) == evaluate(inst.f, self.y)


@dataclass(frozen=True)
class WellPosednessVerdict:
    status: Status
    rank_A: int
    nullity_A: int
    offending_face: DualFace | None = None
    row_space_witness: Vector | None = None
    certificate: NonUniquenessCertificate | None = None
    faces_scanned: int = 0
    scan_limit: int | None = None  # faces with dim_subdiff <= scan_limit were examined

    @property
    def is_well_posed(self) -> bool:
        return self.status is Status.WELL_POSED


@dataclass(frozen=True)
class SolveResult:
    minimizer: object
    cell: CellPattern | None
    objective: object
    optimality_residual: object
    unique: bool | None = None
    flat_direction: Vector | None = None
    method: str = "exact"
    iterations: int = 0


def fermat_holds(inst: ProblemInstance, b: Sequence, x: Sequence) -> bool:
    """Exact check of ``A^T Sigma (b - A x) in subdifferential of f at x``."""
    x = vec(x)
    if not inst.f.domain.contains(x):
        return False
    return in_subdifferential(inst.f, x, inst.residual_gradient(b, x))


# accessibility and verdicts ------------------------------------------------


def accessibility(inst: ProblemInstance, face: DualFace) -> Vector | None:
    """A vector ``z`` with ``A^T z`` in the face's subdifferential, or ``None``."""
    gens = face.generators
    if inst.m == 0:
        return () if gens.contains(zeros(inst.n)) else None
    if gens.is_point:
        return solve(inst.A.T, gens.base_point)
    sol = find_combination(gens, None, inst.A)
    if sol is None:
        return None
    return tuple(sol[: inst.m])


def well_posedness(
    inst: ProblemInstance, budget: int | None = None, certify: bool = True
) -> WellPosednessVerdict:
    """Decide unique solvability for every right-hand side.

    Faces are scanned by increasing subdifferential dimension (ties broken by
    pattern), so a reported offending face has minimal dimension.
    """
    r, k = inst.rank, inst.nullity
    if not inst.f.full_dimensional:
        return WellPosednessVerdict(Status.HYPOTHESIS_VIOLATED, r, k)
    if k == 0:
        return WellPosednessVerdict(Status.WELL_POSED, r, k, faces_scanned=0, scan_limit=-1)
    scanned = 0
    for face in iter_dual_faces(inst.f, budget, max_subdiff_dim=k - 1):
        scanned += 1
        z = accessibility(inst, face)
        if z is None:
            continue
        cert = non_uniqueness_witness(inst, face, z) if certify else None
        return WellPosednessVerdict(
            Status.ILL_POSED, r, k, face, z, cert, faces_scanned=scanned, scan_limit=k - 1
        )
    return WellPosednessVerdict(Status.WELL_POSED, r, k, faces_scanned=scanned, scan_limit=k - 1)


def ill_posedness_number(inst: ProblemInstance, budget: int | None = None, exhaustive: bool = False):
    """Smallest subdifferential dimension over accessible faces (``math.inf`` if none).

    ``exhaustive=True`` evaluates every face in reverse canonical order and
    takes the minimum; it exists to cross-check the early-stopping scan.
    """
    if not exhaustive:
        for face in iter_dual_faces(inst.f, budget):
            if accessibility(inst, face) is not None:
                return face.dim_subdiff
        return math.inf
    best = math.inf
    for face in reversed(enumerate_complexes(inst.f, budget)):
        if accessibility(inst, face) is not None:
            best = min(best, face.dim_subdiff)
    return best


def non_uniqueness_witness(
    inst: ProblemInstance, face: DualFace, z: Sequence, x: Sequence | None = None
) -> NonUniquenessCertificate:
    """Two distinct minimizers for one right-hand side, built from an accessible face."""
    z = vec(z)
    if face.dim_subdiff >= inst.nullity:
        raise PreconditionError(
            f"face subdifferential dimension {face.dim_subdiff} is not below nullity {inst.nullity}"
        )
    if len(z) != inst.m or not face.generators.contains(inst.A.rmatvec(z)):
        raise PreconditionError("A^T z is not in the face's subdifferential")
    if x is None:
        x = face.relint_point
    else:
        x = vec(x)
        if not inst.f.domain.contains(x) or pattern_at(inst.f, x) != face.pattern:
            raise PreconditionError("x is not in the relative interior of the cell")
    dirs = face.generators.directions
    ortho = Subspace.span(dirs, inst.n).orthogonal_complement() if dirs else Subspace.whole(inst.n)
    K = inst.null_space.intersect(ortho)
    if K.dim == 0:
        raise WitnessConstructionError("null(A) meets the subdifferential's orthogonal space trivially")
    d = K.basis[0]
    up, down = [], []
    for a, bound in face.cell.inequalities:
        ad = dot(a, d)
        slack = bound - dot(a, x)
        if ad > 0:
            up.append(slack / ad)
        elif ad < 0:
            down.append(slack / -ad)
    steps = up + down
    eps = min(steps) / 2 if steps else Fraction(1)
    if eps <= 0:
        raise WitnessConstructionError(f"zero-width cell along direction {d}")
    direction = scale(eps, d)
    y = add(x, direction)
    b = add(inst.A.matvec(x), inst.sigma_inv.matvec(z))
    cert = NonUniquenessCertificate(b, x, y, direction)
    if not cert.verify(inst):
        raise WitnessConstructionError("constructed pair failed verification")
    return cert


# exact solver ----------------------------------------------------------------


class _CellData:
    __slots__ = ("kind", "x0", "N", "P", "r", "H", "M1", "q")


class _ExactSolver:
    def __init__(self, inst: ProblemInstance, budget: int | None):
        self.inst = inst
        self.faces = enumerate_complexes(inst.f, budget)
        self.order = list(range(len(self.faces)))
        self.data: dict[int, _CellData] = {}
        A, S = inst.A, inst.sigma
        self.AtS = (A.T @ S) if inst.m else RationalMatrix.zeros(inst.n, 0)
        self.AtSA = (self.AtS @ A) if inst.m else RationalMatrix.zeros(inst.n, inst.n)

    def _prep(self, i: int) -> _CellData:
        d = self.data.get(i)
        if d is not None:
            return d
        face = self.faces[i]
        n = self.inst.n
        C = face.cell.E
        c = face.cell.f
        d = _CellData()
        x0 = solve(C, c) if C else zeros(n)
        basis = nullspace(C).basis if C else Subspace.whole(n).basis
        d.x0 = x0
        if not basis:
            d.kind = "point"
            self.data[i] = d
            return d
        N = RationalMatrix.from_columns(basis, n)
        va = face.generators.base_point
        NT = N.T
        M1 = NT @ self.AtS
        H = NT @ self.AtSA @ N
        q = tuple(-a for a in NT.matvec(add(self.AtSA.matvec(x0), va)))
        d.N = N
        if H.rank() == len(basis):
            Hinv = inverse(H)
            d.kind = "regular"
            d.P = Hinv @ M1
            d.r = Hinv.matvec(q)
        else:
            d.kind = "singular"
            d.H, d.M1, d.q = H, M1, q
        self.data[i] = d
        return d

    def _candidate(self, i: int, b: Vector) -> Vector | None:
        d = self._prep(i)
        cell = self.faces[i].cell
        if d.kind == "point":
            x = d.x0
        elif d.kind == "regular":
            y = add(d.P.matvec(b) if self.inst.m else zeros(len(d.r)), d.r)
            x = add(d.x0, d.N.matvec(y))
        else:
            rhs = add(d.M1.matvec(b) if self.inst.m else zeros(len(d.q)), d.q)
            yp = solve(d.H, rhs)
            if yp is None:
                return None
            base = add(d.x0, d.N.matvec(yp))
            kern = nullspace(d.H).basis
            W = [d.N.matvec(kv) for kv in kern]  # directions in x-space
            G = [tuple(dot(a, w) for w in W) for a, _ in cell.inequalities]
            h = [bd - dot(a, base) for a, bd in cell.inequalities]
            res = linprog(zeros(len(W)), G, h, n=len(W))
            if res.status != "optimal":
                return None
            x = base
            for c, w in zip(res.x, W):
                x = add(x, scale(c, w))
        return x if cell.contains(x) else None

    def solve(self, b: Vector) -> Vector:
        for pos, i in enumerate(self.order):
            x = self._candidate(i, b)
            if x is None:
                continue
            if fermat_holds(self.inst, b, x):
                if pos:
                    self.order.insert(0, self.order.pop(pos))
                return x
        raise SolverError("no cell carries a minimizer; the objective is unbounded below")


_SOLVERS: "OrderedDict[tuple, _ExactSolver]" = OrderedDict()


def _exact_solver(inst: ProblemInstance, budget: int | None) -> _ExactSolver:
    key = (inst, _budget.limit("faces", budget))
    s = _SOLVERS.get(key)
    if s is None:
        s = _ExactSolver(inst, budget)
        _SOLVERS[key] = s
        while len(_SOLVERS) > 16:
            _SOLVERS.popitem(last=False)
    else:
        _SOLVERS.move_to_end(key)
    return s


def clear_cache() -> None:
    """Drop cached exact solvers and complexes."""
    _SOLVERS.clear()
    _clear_complexes()


def flat_direction(inst: ProblemInstance, x: Sequence) -> Vector | None:
    """A nonzero ``d`` with ``A d = 0`` along which ``f`` does not increase at ``x``.

    At a minimizer such a direction exists exactly when the minimizer is not
    unique.
    """
    f = inst.f
    x = vec(x)
    p = pattern_at(f, x)
    n, J = inst.n, len(f.terms)
    nv = n + J
    pad = (Fraction(0),) * J
    E = [row + pad for row in inst.A.rows] + [a + pad for a, _ in f.domain.equalities]
    G = []
    for j, S in enumerate(p.active_pieces):
        for i in sorted(S):
            row = list(f.terms[j][i][0]) + [Fraction(0)] * J
            row[n + j] = Fraction(-1)
            G.append(tuple(row))
    G.append(zeros(n) + (Fraction(1),) * J)
    for l in sorted(p.active_domain_constraints):
        G.append(f.domain.inequalities[l][0] + pad)
    an = analyze_system(G, [Fraction(0)] * len(G), E, [Fraction(0)] * len(E), nv)
    if not is_zero(an.point[:n]):
        return an.point[:n]
    rows = E + [G[i] for i in sorted(an.implicit)]
    for v in nullspace(rows).basis:
        if not is_zero(v[:n]):
            return v[:n]
    return None


def _canonical_minimizer(inst: ProblemInstance, b: Vector, x: Vector) -> Vector:
    """Relative interior point of the (lifted) solution set containing ``x``."""
    f = inst.f
    n, J = inst.n, len(f.terms)
    nv = n + J
    pad = (Fraction(0),) * J
    fx = evaluate(f, x)
    E = [row + pad for row in inst.A.rows] + [a + pad for a, _ in f.domain.equalities]
    e = list(inst.A.matvec(x)) + [bd for _, bd in f.domain.equalities]
    G, h = [], []
    for j, t in enumerate(f.terms):
        for v, w in t:
            row = list(v) + [Fraction(0)] * J
            row[n + j] = Fraction(-1)
            G.append(tuple(row))
            h.append(-w)
    G.append(zeros(n) + (Fraction(1),) * J)
    h.append(fx)
    for a, bd in f.domain.inequalities:
        G.append(a + pad)
        h.append(bd)
    an = analyze_system(G, h, E, e, nv)
    return an.point[:n]


def solve_exact(inst: ProblemInstance, b: Sequence, budget: int | None = None) -> SolveResult:
    """Exact minimizer by cell-wise stationarity plus an exact optimality check.

    When minimizers are not unique the returned one is a canonical point of
    the solution set and ``flat_direction`` holds a direction of non-uniqueness.
    """
    b = vec(b)
    if len(b) != inst.m:
        raise ValueError("right-hand side has the wrong length")
    x = _exact_solver(inst, budget).solve(b)
    d = flat_direction(inst, x)
    if d is not None:
        x = _canonical_minimizer(inst, b, x)
        d = flat_direction(inst, x)
    return SolveResult(
        minimizer=x,
        cell=pattern_at(inst.f, x),
        objective=inst.objective(b, x),
        optimality_residual=Fraction(0),
        unique=d is None,
        flat_direction=d,
        method="exact",
    )


# numeric solver ------------------------------------------------------------------


def _float_pattern(f: CpwlFunction, x: np.ndarray, tol: float) -> CellPattern:
    active = []
    for t in f.terms:
        vals = [float(np.dot([float(a) for a in v], x)) + float(w) for v, w in t]
        top = max(vals)
        active.append(frozenset(i for i, val in enumerate(vals) if val >= top - tol))
    tight = frozenset(
        l
        for l, (a, bd) in enumerate(f.domain.inequalities)
        if float(np.dot([float(c) for c in a], x)) >= float(bd) - tol
    )
    return CellPattern(tuple(active), tight)


def _float_objective(inst, A, S, b, x) -> float:
    f = inst.f
    r = A @ x - b
    val = 0.5 * float(r @ S @ r)
    for t in f.terms:
        val += max(float(np.dot([float(a) for a in v], x)) + float(w) for v, w in t)
    return val


def _polish(inst, A, S, b, x, tol):
    """Re-solve on the cell suggested by ``x`` (quadratic fidelity only)."""
    from .pwl import _pattern_system

    f = inst.f
    best = None
    for delta in (1e-9, 1e-7, 1e-5, 1e-3):
        p = _float_pattern(f, x, delta)
        G, h, E, e, _ = _pattern_system(f, p)
        n = inst.n
        Ef = np.array([[float(a) for a in r] for r in E], dtype=float).reshape(len(E), n)
        ef = np.array([float(a) for a in e], dtype=float)
        va = np.zeros(n)
        for j, s in enumerate(p.active_pieces):
            va += np.array([float(a) for a in f.terms[j][min(s)][0]])
        Q = A.T @ S @ A
        k = Ef.shape[0]
        KKT = np.block([[Q, Ef.T], [Ef, np.zeros((k, k))]])
        rhs = np.concatenate([A.T @ S @ b - va, ef])
        sol, *_ = np.linalg.lstsq(KKT, rhs, rcond=None)
        cand = sol[:n]
        Gf = np.array([[float(a) for a in r] for r in G], dtype=float).reshape(len(G), n)
        hf = np.array([float(a) for a in h], dtype=float)
        if Gf.size and np.max(Gf @ cand - hf) > tol:
            continue
        if Ef.size and np.max(np.abs(Ef @ cand - ef)) > tol:
            continue
        val = _float_objective(inst, A, S, b, cand)
        if best is None or val < best[0]:
            best = (val, cand)
    return best


def solve_numeric(
    inst: ProblemInstance,
    b: Sequence,
    tol: float = 1e-6,
    fidelity: SmoothFidelity | None = None,
    max_iter: int = 200_000,
    polish: bool = True,
) -> SolveResult:
    """Floating-point minimizer by primal-dual splitting.

    With the default quadratic fidelity the iterate is finished by re-solving
    on the cell it identifies.  A custom ``fidelity`` replaces the quadratic
    term by ``D(Ax, b)`` and is solved without polishing.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    f = inst.f
    A = inst.A.to_float() if inst.m else np.zeros((0, inst.n))
    S = inst.sigma.to_float() if inst.m else np.zeros((0, 0))
    bf = np.array([float(a) for a in vec(b)], dtype=float)
    terms = [[([float(a) for a in v], float(w)) for v, w in t] for t in f.terms]
    G = [[float(a) for a in r] for r in f.domain.G]
    h = [float(a) for a in f.domain.h]
    E = [[float(a) for a in r] for r in f.domain.E]
    e = [float(a) for a in f.domain.f]
    res = pdhg(A, bf, S, terms, G, h, E, e, tol=min(tol, 1e-6) * 1e-4, max_iter=max_iter, fidelity=fidelity)
    x = res.x
    if not np.all(np.isfinite(x)):
        raise SolverError("iteration diverged")
    if fidelity is None:
        obj = _float_objective(inst, A, S, bf, x)
        if polish:
            best = _polish(inst, A, S, bf, x, 1e-9)
            if best is not None and best[0] <= obj + 1e-9 * max(1.0, abs(obj)):
                obj, x = best
    else:
        obj = float(fidelity.value(A @ x, bf)) + _float_objective(inst, A, S, bf, x) - (
            0.5 * float((A @ x - bf) @ S @ (A @ x - bf)) if inst.m else 0.0
        )
    if not res.converged and not polish:
        raise SolverError(f"no convergence after {res.iterations} iterations")
    return SolveResult(
        minimizer=x,
        cell=_float_pattern(f, x, 1e-7),
        objective=obj,
        optimality_residual=res.residual,
        unique=None,
        method="numeric",
        iterations=res.iterations,
    )


# solution map --------------------------------------------------------------------


@dataclass(frozen=True)
class AffinityReport:
    b1: Vector
    b2: Vector
    lam: Fraction
    x1: Vector
    x2: Vector
    x_mix: Vector
    shared_cell: CellPattern | None
    affine: bool | None

    @property
    def message(self) -> str:
        if self.shared_cell is None:
            return "cells differ"
        return "affine identity holds" if self.affine else "affine identity fails"


def solution_map_probe(
    inst: ProblemInstance, b1: Sequence, b2: Sequence, lam, check_wellposed: bool = True
) -> AffinityReport:
    lam = Fraction(lam)
    if not 0 <= lam <= 1:
        raise PreconditionError("lambda must lie in [0, 1]")
    if check_wellposed:
        v = well_posedness(inst, certify=False)
        if v.status is not Status.WELL_POSED:
            raise PreconditionError(f"instance is {v.status}")
    b1, b2 = vec(b1), vec(b2)
    bm = add(scale(lam, b1), scale(1 - lam, b2))
    r1, r2, rm = (solve_exact(inst, b) for b in (b1, b2, bm))
    pats = [r1.cell, r2.cell, rm.cell]
    meet = tuple(
        frozenset.intersection(*(p.active_pieces[j] for p in pats)) for j in range(len(pats[0].active_pieces))
    )
    shared = None
    affine = None
    if all(meet):
        dom = frozenset.intersection(*(p.active_domain_constraints for p in pats))
        shared = complex_engine(inst.f).realize(CellPattern(meet, dom))
    if shared is not None:
        # each point must lie in the closed cell and carry a dual vector in its subdifferential
        gens = subdifferential_generators(inst.f, shared)
        for b, p, r in zip((b1, b2, bm), pats, (r1, r2, rm)):
            inside = all(s <= t for s, t in zip(shared.active_pieces, p.active_pieces)) and (
                shared.active_domain_constraints <= p.active_domain_constraints
            )
            if not inside or not gens.contains(inst.residual_gradient(b, r.minimizer)):
                shared = None
                break
    if shared is not None:
        affine = rm.minimizer == add(scale(lam, r1.minimizer), scale(1 - lam, r2.minimizer))
    return AffinityReport(b1, b2, lam, r1.minimizer, r2.minimizer, rm.minimizer, shared, affine)


# random matrices -------------------------------------------------------------------

DENOMINATORS = (1, 2, 3, 5, 7)
ENTRY_RANGE = 100


def origin_subdiff_dim(f: CpwlFunction, budget: int | None = None):
    """Dimension of the smallest subdifferential containing the origin."""
    zero = zeros(f.ambient_dim)
    for face in iter_dual_faces(f, budget):
        if face.generators.contains(zero):
            return face.dim_subdiff
    return math.inf


def random_rational_matrix(rng: random.Random, m: int, n: int) -> RationalMatrix:
    return RationalMatrix(
        [
            [Fraction(rng.randint(-ENTRY_RANGE, ENTRY_RANGE), rng.choice(DENOMINATORS)) for _ in range(n)]
            for _ in range(m)
        ],
        ncols=n,
    )


@dataclass
class MonteCarloReport:
    m: int
    n: int
    p: object
    trials: int
    seed: object
    well_posed: int = 0
    ill_posed: int = 0
    hypothesis_violated: int = 0
    counterexamples: list = field(default_factory=list)  # (trial index, matrix)

    @property
    def fraction(self) -> float | None:
        return self.well_posed / self.trials if self.trials else None

    @property
    def below_threshold(self) -> bool:
        return self.m < self.p


def monte_carlo_wellposedness(
    f: CpwlFunction,
    m: int,
    trials: int,
    seed=0,
    budget: int | None = None,
    allow_below_threshold: bool = False,
) -> MonteCarloReport:
    """Fraction of random ``m``-row matrices giving a well-posed problem.

    Requires ``m >= p`` with ``p`` from :func:`origin_subdiff_dim` unless
    ``allow_below_threshold`` is set, in which case counts are reported
    without any claim attached.
    """
    if trials < 0 or m < 0:
        raise PreconditionError("m and trials must be nonnegative")
    p = origin_subdiff_dim(f, budget)
    if m < p and not allow_below_threshold:
        raise PreconditionError(f"m = {m} is below p = {p}")
    rep = MonteCarloReport(m, f.ambient_dim, p, trials, seed)
    rng = random.Random(seed)
    for t in range(trials):
        A = random_rational_matrix(rng, m, f.ambient_dim)
        v = well_posedness(ProblemInstance(A, f), budget, certify=False)
        if v.status is Status.WELL_POSED:
            rep.well_posed += 1
        elif v.status is Status.ILL_POSED:
            rep.ill_posed += 1
            rep.counterexamples.append((t, A))
        else:
            rep.hypothesis_violated += 1
    return rep


# quadratic (Tikhonov) regularization ------------------------------------------------


def tikhonov_well_posed(A, L) -> bool:
    """``1/2||Ax-b||^2 + 1/2||Lx-c||^2`` is uniquely solvable iff ``null(A) & null(L) = 0``."""
    A, L = as_matrix(A), as_matrix(L)
    n = max(A.ncols, L.ncols)
    rows = list(A.rows) + list(L.rows)
    return bool(rows) and rank(rows) == n


def tikhonov_solve(A, L, b: Sequence, c: Sequence | None = None) -> Vector:
    A, L = as_matrix(A), as_matrix(L)
    if not tikhonov_well_posed(A, L):
        raise PreconditionError("null(A) and null(L) intersect nontrivially")
    c = vec(c) if c is not None else zeros(L.nrows)
    M = (A.T @ A) if A.nrows else RationalMatrix.zeros(L.ncols, L.ncols)
    if L.nrows:
        LL = L.T @ L
        M = RationalMatrix([add(r, s) for r, s in zip(M.rows, LL.rows)])
    rhs = add(A.rmatvec(vec(b)) if A.nrows else zeros(M.ncols), L.rmatvec(c) if L.nrows else zeros(M.ncols))
    return solve(M, rhs)
