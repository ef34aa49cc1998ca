"""Convex piecewise linear functions and their primal/dual complexes.

A function is stored as a sum of max-affine terms plus the indicator of a
polyhedral domain::

    f(x) = sum_j max_i (v_ji . x + w_ji) + indicator_P(x)

A single max-affine function is the one-term case.  Keeping sums factored
avoids the exponential blow-up of expanding e.g. an l1 norm into ``2**n``
pieces; the expanded list is still available through
:attr:`CpwlFunction.pieces` (subject to the ``pieces`` budget).

The cells of the primal complex are indexed by activity patterns: for each
term the set of pieces attaining the maximum, together with the set of tight
domain inequalities.  On the relative interior of a cell the subdifferential
is constant and equals

    sum_j conv{v_ji : i in S_j} + cone{g_l : l in T} + span(domain equalities).
"""

from __future__ import annotations

import itertools
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from . import budget as _budget
from .exact import RationalMatrix, Vector, add, as_matrix, dot, rank, scale, sub, unit, vec, zeros
from .lp import linprog
from .polyhedra import HPolyhedron, VPolyhedron, analyze_system

INFINITY = math.inf


def _clean_term(pieces, n: int) -> tuple:
    out = []
    seen = set()
    for v, w in pieces:
        v = vec(v)
        if len(v) != n:
            raise ValueError(f"piece gradient has length {len(v)}, expected {n}")
        key = (v, Fraction(w))
        if key in seen:
            continue
        seen.add(key)
        out.append(key)
    if not out:
        raise ValueError("a max-affine term needs at least one piece")
    return tuple(out)


@dataclass(frozen=True)
class CpwlFunction:
    """Sum of max-affine terms restricted to a polyhedral domain."""

    ambient_dim: int
    terms: tuple
    domain: HPolyhedron = None

    def __post_init__(self):
        n = self.ambient_dim
        terms = tuple(_clean_term(t, n) for t in self.terms)
        if not terms:
            terms = (((zeros(n), Fraction(0)),),)
        object.__setattr__(self, "terms", terms)
        dom = self.domain if self.domain is not None else HPolyhedron(n)
        if dom.ambient_dim != n:
            raise ValueError("domain has the wrong ambient dimension")
        object.__setattr__(self, "domain", dom)
        if dom.is_empty:
            raise ValueError("domain is empty")

    @cached_property
    def domain_dim(self) -> int:
        return self.domain.dim_for(self.domain.analysis.implicit)

    @property
    def full_dimensional(self) -> bool:
        return self.domain_dim == self.ambient_dim

    @property
    def pieces(self) -> tuple:
        """Expanded max-affine pieces of the finite part (budgeted)."""
        count = 1
        for t in self.terms:
            count *= len(t)
        _budget.check("pieces", count)
        out = []
        seen = set()
        for combo in itertools.product(*self.terms):
            v = zeros(self.ambient_dim)
            w = Fraction(0)
            for vi, wi in combo:
                v = add(v, vi)
                w += wi
            if (v, w) not in seen:
                seen.add((v, w))
                out.append((v, w))
        return tuple(out)

    def __call__(self, x):
        return evaluate(self, x)


# builders ------------------------------------------------------------------


def max_affine(pieces: Iterable, domain: HPolyhedron | None = None, n: int | None = None) -> CpwlFunction:
    pieces = [(vec(v), Fraction(w)) for v, w in pieces]
    if n is None:
        if not pieces:
            raise ValueError("dimension required")
        n = len(pieces[0][0])
    return CpwlFunction(n, (tuple(pieces),), domain)


def affine(v: Sequence, w=0) -> CpwlFunction:
    return max_affine([(v, w)])


def indicator(P: HPolyhedron) -> CpwlFunction:
    n = P.ambient_dim
    return CpwlFunction(n, (), P)


def l1(L, gamma=1) -> CpwlFunction:
    """``gamma * ||L x||_1`` with ``L`` a matrix (rows are analysis vectors)."""
    L = as_matrix(L)
    g = Fraction(gamma)
    if g < 0:
        raise ValueError("gamma must be nonnegative")
    n = L.ncols
    terms = []
    for row in L.rows:
        if g == 0 or all(a == 0 for a in row):
            continue
        terms.append(((scale(g, row), Fraction(0)), (scale(-g, row), Fraction(0))))
    return CpwlFunction(n, tuple(terms))


def l1_norm(n: int, gamma=1) -> CpwlFunction:
    return l1(RationalMatrix.identity(n), gamma)


def linf_ball_indicator(n: int, radius=1) -> CpwlFunction:
    return indicator(HPolyhedron.box(n, -Fraction(radius), Fraction(radius)))


def nonneg_indicator(n: int) -> CpwlFunction:
    return indicator(HPolyhedron(n, tuple((scale(-1, unit(n, i)), 0) for i in range(n))))


def tv(graph, gamma=1) -> CpwlFunction:
    """Anisotropic total variation ``gamma * sum_{ij in edges} |x_i - x_j|``."""
    from .tvgraph import difference_matrix

    return l1(difference_matrix(graph), gamma)


def scaled(f: CpwlFunction, gamma) -> CpwlFunction:
    g = Fraction(gamma)
    if g <= 0:
        raise ValueError("scaling factor must be positive")
    terms = tuple(tuple((scale(g, v), g * w) for v, w in t) for t in f.terms)
    return CpwlFunction(f.ambient_dim, terms, f.domain)


def cpwl_sum(*fs: CpwlFunction) -> CpwlFunction:
    if not fs:
        raise ValueError("empty sum")
    n = fs[0].ambient_dim
    if any(f.ambient_dim != n for f in fs):
        raise ValueError("dimension mismatch in sum")
    terms = []
    dom = HPolyhedron(n)
    for f in fs:
        for t in f.terms:
            if len(t) == 1 and all(a == 0 for a in t[0][0]) and t[0][1] == 0:
                continue
            terms.append(t)
        dom = dom.intersect(f.domain)
    ineqs = tuple(dict.fromkeys(dom.inequalities))
    eqs = tuple(dict.fromkeys(dom.equalities))
    return CpwlFunction(n, tuple(terms), HPolyhedron(n, ineqs, eqs))


# pointwise -------------------------------------------------------------------


def evaluate(f: CpwlFunction, x: Sequence):
    """Exact value, or ``math.inf`` outside the domain."""
    x = vec(x)
    if len(x) != f.ambient_dim:
        raise ValueError("point has the wrong dimension")
    if not f.domain.contains(x):
        return INFINITY
    return sum((max(dot(v, x) + w for v, w in t) for t in f.terms), Fraction(0))


@dataclass(frozen=True)
class CellPattern:
    """Activity pattern: argmax pieces per term and tight domain inequalities."""

    active_pieces: tuple  # tuple of frozensets, one per term
    active_domain_constraints: frozenset = frozenset()

    def key(self) -> tuple:
        return (
            tuple(tuple(sorted(s)) for s in self.active_pieces),
            tuple(sorted(self.active_domain_constraints)),
        )

    def __lt__(self, other):
        return self.key() < other.key()

    def refines(self, other: "CellPattern") -> bool:
        """True when this pattern's cell is a face of ``other``'s closed cell."""
        return all(a >= b for a, b in zip(self.active_pieces, other.active_pieces)) and (
            self.active_domain_constraints >= other.active_domain_constraints
        )

    def __str__(self) -> str:
        terms = ",".join("{" + " ".join(map(str, sorted(s))) + "}" for s in self.active_pieces)
        dom = " ".join(map(str, sorted(self.active_domain_constraints)))
        return f"[{terms}|{dom}]"


def pattern_at(f: CpwlFunction, x: Sequence) -> CellPattern:
    x = vec(x)
    if not f.domain.contains(x):
        raise ValueError("point is outside the domain")
    active = []
    for t in f.terms:
        vals = [dot(v, x) + w for v, w in t]
        top = max(vals)
        active.append(frozenset(i for i, val in enumerate(vals) if val == top))
    return CellPattern(tuple(active), f.domain.tight_set(x))


@dataclass(frozen=True)
class FactoredSet:
    """``sum_j conv(summands[j]) + cone(rays)`` kept in factored form."""

    ambient_dim: int
    summands: tuple
    rays: tuple

    @cached_property
    def base_point(self) -> Vector:
        p = zeros(self.ambient_dim)
        for s in self.summands:
            p = add(p, s[0])
        return p

    @cached_property
    def directions(self) -> tuple:
        out = []
        for s in self.summands:
            out.extend(sub(v, s[0]) for v in s[1:])
        out.extend(self.rays)
        return tuple(out)

    @cached_property
    def dim(self) -> int:
        return rank(self.directions) if self.directions else 0

    @property
    def is_point(self) -> bool:
        return self.dim == 0

    def expand(self, budget: int | None = None) -> VPolyhedron:
        count = 1
        for s in self.summands:
            count *= len(s)
        _budget.check("vertices", count, budget)
        pts = []
        for combo in itertools.product(*self.summands):
            p = zeros(self.ambient_dim)
            for v in combo:
                p = add(p, v)
            pts.append(p)
        return VPolyhedron(self.ambient_dim, tuple(dict.fromkeys(pts)), self.rays)

    def membership_system(self, extra_cols: int = 0):
        """Columns/rows for ``y = sum lam v + sum mu g`` with simplex weights."""
        cols = [v for s in self.summands for v in s] + list(self.rays)
        groups = [len(s) for s in self.summands]
        return cols, groups

    def contains(self, y: Sequence) -> bool:
        return find_combination(self, y) is not None


def find_combination(S: FactoredSet, y: Sequence, A: RationalMatrix | None = None):
    """Solve ``target = sum lam v + sum mu g`` over the factored set.

    Without ``A`` the target is the fixed vector ``y``.  With ``A`` the target
    is ``A^T z`` for a free vector ``z`` (then ``y`` is ignored) and the
    returned tuple starts with ``z``.
    """
    n = S.ambient_dim
    cols, groups = S.membership_system()
    k = len(cols)
    m = A.nrows if A is not None else 0
    nv = m + k
    E, f = [], []
    for i in range(n):
        row = [Fraction(0)] * nv
        if A is not None:
            for r in range(m):
                row[r] = -A[r, i]
        for c, v in enumerate(cols):
            row[m + c] = v[i]
        E.append(row)
        f.append(Fraction(0) if A is not None else vec(y)[i])
    start = m
    for g in groups:
        row = [Fraction(0)] * nv
        for c in range(start, start + g):
            row[c] = Fraction(1)
        E.append(row)
        f.append(Fraction(1))
        start += g
    G = [scale(-1, unit(nv, j)) for j in range(m, nv)]
    h = [Fraction(0)] * (nv - m)
    res = linprog(zeros(nv), G, h, E, f, n=nv)
    if res.status != "optimal":
        return None
    return res.x


def _normal_generators(f: CpwlFunction, tight: Iterable[int]) -> tuple:
    rays = [f.domain.inequalities[l][0] for l in sorted(tight)]
    for a, _ in f.domain.equalities:
        rays.append(a)
        rays.append(scale(-1, a))
    return tuple(rays)


def subdifferential_generators(f: CpwlFunction, pattern: CellPattern) -> FactoredSet:
    summands = tuple(
        tuple(f.terms[j][i][0] for i in sorted(s)) for j, s in enumerate(pattern.active_pieces)
    )
    return FactoredSet(f.ambient_dim, summands, _normal_generators(f, pattern.active_domain_constraints))


def subdifferential(f: CpwlFunction, x: Sequence) -> VPolyhedron:
    """Subdifferential at ``x`` as a V-polyhedron (raises outside the domain)."""
    return subdifferential_generators(f, pattern_at(f, x)).expand()


def in_subdifferential(f: CpwlFunction, x: Sequence, y: Sequence) -> bool:
    return subdifferential_generators(f, pattern_at(f, x)).contains(y)


def conjugate_value(f: CpwlFunction, y: Sequence):
    """``sup_x y.x - f(x)`` exactly, ``math.inf`` when unbounded."""
    y = vec(y)
    n = f.ambient_dim
    J = len(f.terms)
    nv = n + J
    G, h = [], []
    for j, t in enumerate(f.terms):
        for v, w in t:
            row = list(v) + [Fraction(0)] * J
            row[n + j] = Fraction(-1)
            G.append(row)
            h.append(-w)
    for a, b in f.domain.inequalities:
        G.append(list(a) + [Fraction(0)] * J)
        h.append(b)
    E = [list(a) + [Fraction(0)] * J for a, _ in f.domain.equalities]
    fe = [b for _, b in f.domain.equalities]
    c = list(y) + [Fraction(-1)] * J
    res = linprog(c, G, h, E, fe, n=nv)
    if res.status == "unbounded":
        return INFINITY
    if res.status != "optimal":
        raise RuntimeError("conjugate LP infeasible for a nonempty domain")
    return res.value


def fenchel_young_check(f: CpwlFunction, x: Sequence, y: Sequence) -> bool:
    x, y = vec(x), vec(y)
    fx = evaluate(f, x)
    if fx == INFINITY:
        raise ValueError("x is outside the domain")
    fy = conjugate_value(f, y)
    if fy == INFINITY:
        raise ValueError("conjugate is infinite at y")
    return fx + fy == dot(x, y)


# complexes ---------------------------------------------------------------------


@dataclass(frozen=True)
class DualFace:
    """One cell of the primal complex together with its subdifferential."""

    pattern: CellPattern
    cell: HPolyhedron = field(repr=False)
    dim_cell: int
    dim_subdiff: int
    relint_point: Vector
    generators: FactoredSet = field(repr=False)

    @cached_property
    def subdiff(self) -> VPolyhedron:
        return self.generators.expand()

    def sort_key(self):
        return (self.dim_subdiff, self.pattern.key())


def _pattern_system(f: CpwlFunction, pattern: CellPattern):
    """Closed cell of ``pattern`` as ``(G, h, E, e, labels)``."""
    G, h, E, e, labels = [], [], [], [], []
    for j, (t, S) in enumerate(zip(f.terms, pattern.active_pieces)):
        a = min(S)
        va, wa = t[a]
        for k, (vk, wk) in enumerate(t):
            if k == a:
                continue
            row = sub(vk, va)
            rhs = wa - wk
            if k in S:
                E.append(row)
                e.append(rhs)
            else:
                G.append(row)
                h.append(rhs)
                labels.append(("p", j, k))
    for l, (a, b) in enumerate(f.domain.inequalities):
        if l in pattern.active_domain_constraints:
            E.append(a)
            e.append(b)
        else:
            G.append(a)
            h.append(b)
            labels.append(("d", l))
    for a, b in f.domain.equalities:
        E.append(a)
        e.append(b)
    return G, h, E, e, labels


def _tighten(pattern: CellPattern, label) -> CellPattern:
    if label[0] == "p":
        _, j, k = label
        act = list(pattern.active_pieces)
        act[j] = act[j] | {k}
        return CellPattern(tuple(act), pattern.active_domain_constraints)
    return CellPattern(pattern.active_pieces, pattern.active_domain_constraints | {label[1]})


class _ComplexEngine:
    """Lazy, level-ordered enumeration of the complex of one function."""

    seed_product_limit = 4096

    def __init__(self, f: CpwlFunction, budget: int | None):
        self.f = f
        self.n = f.ambient_dim
        self.limit = _budget.limit("faces", budget)
        self.faces: dict[CellPattern, DualFace] = {}
        self.levels: dict[int, list[CellPattern]] = {}
        self.realized: dict[CellPattern, CellPattern | None] = {}
        self.expanded: set[CellPattern] = set()
        self.top_level = self.n - f.domain_dim
        self.complete_through = self.top_level - 1
        self._seeded = False

    # realization
    def realize(self, pattern: CellPattern) -> CellPattern | None:
        if pattern in self.realized:
            return self.realized[pattern]
        G, h, E, e, labels = _pattern_system(self.f, pattern)
        an = analyze_system(G, h, E, e, self.n)
        if an.empty:
            self.realized[pattern] = None
            return None
        real = pattern
        for i in an.implicit:
            real = _tighten(real, labels[i])
        self.realized[pattern] = real
        if real not in self.faces:
            self._record(real, G, E, an)
        return real

    def _record(self, real: CellPattern, G, E, an) -> None:
        if len(self.faces) >= self.limit:
            raise _budget.BudgetExceeded("faces", self.limit)
        rows = E + [G[i] for i in an.implicit]
        dim_cell = self.n - (rank(rows) if rows else 0)
        gens = subdifferential_generators(self.f, real)
        Gr, hr, Er, er, _ = _pattern_system(self.f, real)
        cell = HPolyhedron(self.n, tuple(zip(Gr, hr)), tuple(zip(Er, er)))
        face = DualFace(real, cell, dim_cell, gens.dim, an.point, gens)
        self.faces[real] = face
        self.levels.setdefault(face.dim_subdiff, []).append(real)

    # seeding of maximal cells
    def _seed(self) -> None:
        if self._seeded:
            return
        self._seeded = True
        f = self.f
        count = 1
        for t in f.terms:
            count *= len(t)
        if count <= self.seed_product_limit:
            for combo in itertools.product(*(range(len(t)) for t in f.terms)):
                self.realize(CellPattern(tuple(frozenset([i]) for i in combo)))
        else:
            self._walk()

    def _walk(self) -> None:
        start = self._greedy_maximal()
        todo = [start]
        seen = {start}
        top = self.top_level
        while todo:
            p = todo.pop()
            for child in self._expand(p):
                face = self.faces[child]
                if face.dim_subdiff != top + 1:
                    continue
                changed = [j for j, (a, b) in enumerate(zip(child.active_pieces, p.active_pieces)) if a != b]
                if not changed:
                    continue
                options = [sorted(child.active_pieces[j] - p.active_pieces[j]) for j in changed]
                for combo in itertools.product(*options):
                    act = list(p.active_pieces)
                    for j, k in zip(changed, combo):
                        act[j] = frozenset([k])
                    q = self.realize(CellPattern(tuple(act)))
                    if q is not None and self.faces[q].dim_subdiff == top and q not in seen:
                        seen.add(q)
                        todo.append(q)

    def _greedy_maximal(self) -> CellPattern:
        f = self.f
        chosen: list[frozenset] = []
        J = len(f.terms)
        for j in range(J):
            for i in range(len(f.terms[j])):
                act = chosen + [frozenset([i])] + [frozenset(range(len(t))) for t in f.terms[j + 1 :]]
                # later terms unconstrained: use the full-piece pattern only for bookkeeping
                G, h, E, e = self._partial_system(act, j + 1)
                an = analyze_system(G, h, E, e, self.n)
                if an.empty:
                    continue
                rows = E + [G[r] for r in an.implicit]
                dim = self.n - (rank(rows) if rows else 0)
                if dim == self.f.domain_dim:
                    chosen.append(frozenset([i]))
                    break
            else:
                raise RuntimeError("no full-dimensional piece found")
        real = self.realize(CellPattern(tuple(chosen)))
        return real

    def _partial_system(self, act, upto: int):
        f = self.f
        G, h, E, e = [], [], [], []
        for j in range(upto):
            (a,) = act[j]
            va, wa = f.terms[j][a]
            for k, (vk, wk) in enumerate(f.terms[j]):
                if k != a:
                    G.append(sub(vk, va))
                    h.append(wa - wk)
        for a, b in f.domain.inequalities:
            G.append(a)
            h.append(b)
        for a, b in f.domain.equalities:
            E.append(a)
            e.append(b)
        return G, h, E, e

    # expansion by tightening
    def _expand(self, p: CellPattern) -> list[CellPattern]:
        out = []
        G, h, E, e, labels = _pattern_system(self.f, p)
        for lab in labels:
            q = self.realize(_tighten(p, lab))
            if q is not None and q != p:
                out.append(q)
        self.expanded.add(p)
        return out

    def level(self, L: int) -> list[DualFace]:
        """All faces with ``dim_subdiff == L`` in canonical order."""
        self._seed()
        while self.complete_through < L:
            lower = self.complete_through
            if lower >= self.top_level:
                for p in sorted(self.levels.get(lower, ())):
                    if p not in self.expanded:
                        self._expand(p)
            self.complete_through += 1
        return sorted((self.faces[p] for p in self.levels.get(L, ())), key=DualFace.sort_key)

    def iter_levels(self, max_level: int | None = None) -> Iterator[DualFace]:
        top = self.n if max_level is None else min(max_level, self.n)
        for L in range(self.top_level, top + 1):
            yield from self.level(L)

    def all_faces(self) -> list[DualFace]:
        return list(self.iter_levels())


_ENGINES: "OrderedDict[tuple, _ComplexEngine]" = OrderedDict()
_ENGINE_CACHE_SIZE = 32


def complex_engine(f: CpwlFunction, budget: int | None = None) -> _ComplexEngine:
    # keyed on the effective limit so a changed environment override takes effect
    key = (f, _budget.limit("faces", budget))
    eng = _ENGINES.get(key)
    if eng is None:
        eng = _ComplexEngine(f, budget)
        _ENGINES[key] = eng
        while len(_ENGINES) > _ENGINE_CACHE_SIZE:
            _ENGINES.popitem(last=False)
    else:
        _ENGINES.move_to_end(key)
    return eng


def clear_cache() -> None:
    """Drop every cached complex."""
    _ENGINES.clear()


def enumerate_complexes(
    f: CpwlFunction, budget: int | None = None, max_subdiff_dim: int | None = None
) -> list[DualFace]:
    """Every cell of the primal complex with its subdifferential.

    Faces come sorted by ``(dim_subdiff, pattern)``.  ``max_subdiff_dim`` stops
    the enumeration early; deeper faces are then not computed.
    """
    return list(complex_engine(f, budget).iter_levels(max_subdiff_dim))


def iter_dual_faces(f: CpwlFunction, budget: int | None = None, max_subdiff_dim: int | None = None):
    return complex_engine(f, budget).iter_levels(max_subdiff_dim)


def face_containing(f: CpwlFunction, x: Sequence, budget: int | None = None) -> DualFace:
    """The cell whose relative interior contains ``x``."""
    p = pattern_at(f, x)
    eng = complex_engine(f, budget)
    real = eng.realize(p)
    if real != p:
        raise RuntimeError("activity pattern at a point is not self-consistent")
    return eng.faces[real]
