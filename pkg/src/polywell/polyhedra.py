"""Exact convex polyhedra in H- and V-representation.

The workhorse is :func:`analyze_system`, which classifies the inequalities of a
system ``G x <= h, E x = f`` into those that hold with equality on the whole set
(implicit equalities) and the rest, and at the same time produces a point in
the relative interior or a Farkas certificate of emptiness.  Dimension, face
enumeration and relative-interior points are all derived from it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from . import budget as _budget
from .exact import (
    RationalMatrix,
    Subspace,
    Vector,
    add,
    dot,
    is_zero,
    nullspace,
    primitive_integer,
    rank,
    scale,
    sub,
    unit,
    vec,
    zeros,
)
from .lp import linprog

Constraint = tuple  # (a: Vector, b: Fraction)


class EmptySetError(ValueError):
    """An operation that needs a nonempty set received an empty one."""


@dataclass(frozen=True)
class SystemAnalysis:
    empty: bool
    implicit: frozenset  # indices of inequalities tight on the whole set
    point: Vector | None  # relative interior point when nonempty
    certificate: tuple[Vector, Vector] | None = None  # Farkas multipliers when empty


def analyze_system(
    G: Sequence[Vector],
    h: Sequence[Fraction],
    E: Sequence[Vector],
    f: Sequence[Fraction],
    n: int,
    forced: Iterable[int] = (),
) -> SystemAnalysis:
    """Implicit equalities and a relative interior point of ``G x <= h, E x = f``.

    Inequalities listed in ``forced`` are treated as equalities.  Each round
    maximizes a uniform slack ``t`` over the remaining inequalities; a positive
    optimum certifies a relative interior point, a zero optimum exposes new
    implicit equalities through the positive dual multipliers.
    """
    implicit = set(forced)
    m = len(G)
    first = not implicit
    obj = unit(n + 1, n)
    cap = zeros(n) + (Fraction(1),)
    while True:
        free = [i for i in range(m) if i not in implicit]
        tight = sorted(implicit)
        Gt = [G[i] + (Fraction(1),) for i in free] + [cap]
        ht = [h[i] for i in free] + [Fraction(1)]
        Et = [G[i] + (Fraction(0),) for i in tight] + [e + (Fraction(0),) for e in E]
        ft = [h[i] for i in tight] + list(f)
        res = linprog(obj, Gt, ht, Et, ft, n=n + 1)
        if res.status == "infeasible":
            cert = None
            if first:
                lam, mu = res.farkas
                cert = (zeros(m), tuple(mu[len(tight):]))
            return SystemAnalysis(True, frozenset(implicit), None, cert)
        t = res.value
        x = res.x[:n]
        if t > 0:
            return SystemAnalysis(False, frozenset(implicit), x)
        if t < 0:
            cert = None
            if first:
                lam_full = [Fraction(0)] * m
                for k, i in enumerate(free):
                    lam_full[i] = res.ineq_duals[k] / -t
                mu = tuple(v / -t for v in res.eq_duals[len(tight):])
                cert = (tuple(lam_full), mu)
            return SystemAnalysis(True, frozenset(implicit), None, cert)
        new = {free[k] for k, lam in enumerate(res.ineq_duals[: len(free)]) if lam > 0}
        if not new:  # cannot happen for a correct solver
            raise RuntimeError("no implicit equality exposed at zero slack")
        implicit |= new
        first = False


def _normalize_constraints(items, n: int) -> tuple:
    out = []
    for item in items:
        a, b = item
        a = vec(a)
        if len(a) != n:
            raise ValueError(f"constraint has length {len(a)}, expected {n}")
        out.append((a, Fraction(b)))
    return tuple(out)


@dataclass(frozen=True)
class HPolyhedron:
    """``{x : a.x <= b for (a, b) in inequalities, a.x == b for (a, b) in equalities}``."""

    ambient_dim: int
    inequalities: tuple = ()
    equalities: tuple = ()

    def __post_init__(self):
        n = self.ambient_dim
        object.__setattr__(self, "inequalities", _normalize_constraints(self.inequalities, n))
        object.__setattr__(self, "equalities", _normalize_constraints(self.equalities, n))

    @classmethod
    def from_matrices(cls, G=(), h=(), E=(), f=(), n: int | None = None) -> "HPolyhedron":
        G, E = list(G), list(E)
        if n is None:
            rows = G + E
            if not rows:
                raise ValueError("ambient dimension required")
            n = len(rows[0])
        return cls(n, tuple(zip(G, h)), tuple(zip(E, f)))

    @classmethod
    def whole_space(cls, n: int) -> "HPolyhedron":
        return cls(n)

    @classmethod
    def box(cls, n: int, lo=-1, hi=1) -> "HPolyhedron":
        ineqs = []
        for i in range(n):
            ineqs.append((unit(n, i), Fraction(hi)))
            ineqs.append((scale(-1, unit(n, i)), -Fraction(lo)))
        return cls(n, tuple(ineqs))

    @property
    def G(self) -> list[Vector]:
        return [a for a, _ in self.inequalities]

    @property
    def h(self) -> list[Fraction]:
        return [b for _, b in self.inequalities]

    @property
    def E(self) -> list[Vector]:
        return [a for a, _ in self.equalities]

    @property
    def f(self) -> list[Fraction]:
        return [b for _, b in self.equalities]

    @cached_property
    def analysis(self) -> SystemAnalysis:
        return analyze_system(self.G, self.h, self.E, self.f, self.ambient_dim)

    def analyze(self, forced: Iterable[int] = ()) -> SystemAnalysis:
        forced = frozenset(forced)
        if not forced:
            return self.analysis
        return analyze_system(self.G, self.h, self.E, self.f, self.ambient_dim, forced)

    @property
    def is_empty(self) -> bool:
        return self.analysis.empty

    def contains(self, x: Sequence) -> bool:
        x = vec(x)
        return all(dot(a, x) <= b for a, b in self.inequalities) and all(
            dot(a, x) == b for a, b in self.equalities
        )

    def tight_set(self, x: Sequence) -> frozenset:
        x = vec(x)
        return frozenset(i for i, (a, b) in enumerate(self.inequalities) if dot(a, x) == b)

    def intersect(self, other: "HPolyhedron") -> "HPolyhedron":
        if other.ambient_dim != self.ambient_dim:
            raise ValueError("ambient dimensions differ")
        return HPolyhedron(
            self.ambient_dim,
            self.inequalities + other.inequalities,
            self.equalities + other.equalities,
        )

    def equality_rows(self, implicit: Iterable[int]) -> list[Vector]:
        return [self.inequalities[i][0] for i in sorted(implicit)] + self.E

    def dim_for(self, implicit: Iterable[int]) -> int:
        rows = self.equality_rows(implicit)
        return self.ambient_dim - (rank(rows) if rows else 0)


@dataclass(frozen=True)
class VPolyhedron:
    """``conv(points) + cone(rays)``."""

    ambient_dim: int
    points: tuple = ()
    rays: tuple = ()

    def __post_init__(self):
        n = self.ambient_dim
        pts = tuple(vec(p) for p in self.points)
        rys = tuple(vec(r) for r in self.rays)
        for v in pts + rys:
            if len(v) != n:
                raise ValueError("generator has wrong length")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "rays", rys)

    @property
    def is_empty(self) -> bool:
        return not self.points

    def contains(self, x: Sequence) -> bool:
        return _conic_combination(self.points, self.rays, vec(x), self.ambient_dim) is not None

    def generator_differences(self) -> list[Vector]:
        if not self.points:
            return []
        p0 = self.points[0]
        return [sub(p, p0) for p in self.points[1:]] + list(self.rays)


@dataclass(frozen=True)
class FaceDescriptor:
    parent: HPolyhedron = field(repr=False)
    active_set: frozenset
    dim: int
    point: Vector  # a relative interior point of the face

    def sort_key(self):
        return (self.dim, tuple(sorted(self.active_set)))

    def as_polyhedron(self) -> HPolyhedron:
        P = self.parent
        eqs = tuple(P.inequalities[i] for i in sorted(self.active_set)) + P.equalities
        ineqs = tuple(c for i, c in enumerate(P.inequalities) if i not in self.active_set)
        return HPolyhedron(P.ambient_dim, ineqs, eqs)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    witness: Vector | None = None
    certificate: tuple[Vector, Vector] | None = None


def _conic_combination(points, rays, target, n):
    """Find lam in the simplex and mu >= 0 with sum lam p + sum mu r = target."""
    k, l = len(points), len(rays)
    if k == 0:
        return None
    nv = k + l
    E = []
    f = []
    for i in range(n):
        E.append(tuple(p[i] for p in points) + tuple(r[i] for r in rays))
        f.append(target[i])
    E.append((Fraction(1),) * k + (Fraction(0),) * l)
    f.append(Fraction(1))
    G = [scale(-1, unit(nv, j)) for j in range(nv)]
    h = [Fraction(0)] * nv
    res = linprog(zeros(nv), G, h, E, f, n=nv)
    if res.status != "optimal":
        return None
    return res.x[:k], res.x[k:]


def lp_feasible(P) -> Feasibility:
    """Feasible point, or a Farkas certificate ``(lam, mu)`` for an H-polyhedron.

    The certificate satisfies ``G^T lam + E^T mu = 0``, ``lam >= 0`` and
    ``h.lam + f.mu = -1``.
    """
    if isinstance(P, VPolyhedron):
        if not P.points:
            return Feasibility(False, None, None)
        return Feasibility(True, P.points[0])
    n = P.ambient_dim
    res = linprog(zeros(n), P.G, P.h, P.E, P.f, n=n)
    if res.status == "infeasible":
        return Feasibility(False, None, res.farkas)
    return Feasibility(True, res.x)


def dimension(P) -> int:
    if isinstance(P, VPolyhedron):
        if not P.points:
            raise EmptySetError("dimension of an empty set")
        diffs = P.generator_differences()
        return rank(diffs) if diffs else 0
    an = P.analysis
    if an.empty:
        raise EmptySetError("dimension of an empty set")
    return P.dim_for(an.implicit)


def relative_interior_point(P) -> Vector:
    if isinstance(P, VPolyhedron):
        if not P.points:
            raise EmptySetError("relative interior of an empty set")
        n = P.ambient_dim
        k = len(P.points)
        x = zeros(n)
        for p in P.points:
            x = add(x, p)
        x = scale(Fraction(1, k), x)
        for r in P.rays:
            x = add(x, r)
        return x
    an = P.analysis
    if an.empty:
        raise EmptySetError("relative interior of an empty set")
    return an.point


def enumerate_faces(P, budget: int | None = None) -> list[FaceDescriptor]:
    """All nonempty faces, sorted by ``(dim, active set)``; includes ``P`` itself."""
    if isinstance(P, VPolyhedron):
        P = v_to_h(P)
    limit = _budget.limit("faces", budget)
    root = P.analysis
    if root.empty:
        return []
    faces: dict[frozenset, FaceDescriptor] = {}

    def record(an: SystemAnalysis) -> None:
        if an.implicit in faces:
            return
        if len(faces) >= limit:
            raise _budget.BudgetExceeded("faces", limit)
        faces[an.implicit] = FaceDescriptor(P, an.implicit, P.dim_for(an.implicit), an.point)

    record(root)
    stack = [root.implicit]
    tried: set[frozenset] = set()
    m = len(P.inequalities)
    while stack:
        active = stack.pop()
        for j in range(m):
            if j in active:
                continue
            key = active | {j}
            if key in tried:
                continue
            tried.add(key)
            an = P.analyze(key)
            if an.empty:
                continue
            if an.implicit not in faces:
                record(an)
                stack.append(an.implicit)
    return sorted(faces.values(), key=FaceDescriptor.sort_key)


def normal_cone(P: HPolyhedron, x: Sequence) -> VPolyhedron:
    x = vec(x)
    if not P.contains(x):
        raise ValueError("point is not in the polyhedron")
    n = P.ambient_dim
    rays = []
    for i in sorted(P.tight_set(x)):
        rays.append(P.inequalities[i][0])
    for a, _ in P.equalities:
        rays.append(a)
        rays.append(scale(-1, a))
    return VPolyhedron(n, (zeros(n),), _dedupe_rays(rays))


def _dedupe_rays(rays) -> tuple:
    seen = set()
    out = []
    for r in rays:
        if is_zero(r):
            continue
        key = primitive_integer(r)
        if key in seen:
            continue
        seen.add(key)
        out.append(vec(r))
    return tuple(out)


def prune(V: VPolyhedron) -> VPolyhedron:
    """Drop generators that are combinations of the remaining ones."""
    n = V.ambient_dim
    rays = list(_dedupe_rays(V.rays))
    i = 0
    while i < len(rays):
        others = rays[:i] + rays[i + 1 :]
        if others and _conic_combination((zeros(n),), others, rays[i], n) is not None:
            rays.pop(i)
        else:
            i += 1
    pts = list(dict.fromkeys(V.points))
    i = 0
    while i < len(pts):
        others = pts[:i] + pts[i + 1 :]
        if others and _conic_combination(others, rays, pts[i], n) is not None:
            pts.pop(i)
        else:
            i += 1
    return VPolyhedron(n, tuple(pts), tuple(rays))


def minkowski_sum(P: VPolyhedron, Q: VPolyhedron, budget: int | None = None) -> VPolyhedron:
    if P.ambient_dim != Q.ambient_dim:
        raise ValueError("ambient dimensions differ")
    _budget.check("vertices", len(P.points) * len(Q.points), budget)
    pts = [add(p, q) for p in P.points for q in Q.points]
    return prune(VPolyhedron(P.ambient_dim, tuple(pts), P.rays + Q.rays))


def h_to_v(P: HPolyhedron, budget: int | None = None) -> VPolyhedron:
    """Vertices, extreme rays and lineality (as opposite ray pairs) of ``P``."""
    n = P.ambient_dim
    if P.analysis.empty:
        return VPolyhedron(n)
    normals = P.G + P.E
    lineality = nullspace(normals).basis if normals else Subspace.whole(n).basis
    pointed = HPolyhedron(
        n, P.inequalities, P.equalities + tuple((l, Fraction(0)) for l in lineality)
    )
    points = []
    rays = []
    for face in enumerate_faces(pointed, budget):
        if face.dim == 0:
            points.append(face.point)
        elif face.dim == 1:
            rows = pointed.equality_rows(face.active_set)
            (d,) = nullspace(rows).basis
            if all(dot(a, d) <= 0 for a in pointed.G):
                rays.append(d)
            elif all(dot(a, d) >= 0 for a in pointed.G):
                rays.append(scale(-1, d))
    for l in lineality:
        rays.append(l)
        rays.append(scale(-1, l))
    return VPolyhedron(n, tuple(points), _dedupe_rays(rays))


def v_to_h(V: VPolyhedron, budget: int | None = None) -> HPolyhedron:
    """Facet description of ``conv(points) + cone(rays)`` via its polar cone."""
    n = V.ambient_dim
    if not V.points:
        return HPolyhedron(n, ((zeros(n), Fraction(-1)),))
    # (c, beta) with c.p <= beta for points and c.r <= 0 for rays
    rows = [p + (Fraction(-1),) for p in V.points] + [r + (Fraction(0),) for r in V.rays]
    cone = HPolyhedron(n + 1, tuple((r, Fraction(0)) for r in rows))
    gens = h_to_v(cone, budget)
    lin = nullspace(rows).basis
    lin_keys = set()
    for l in lin:
        lin_keys.add(primitive_integer(l))
        lin_keys.add(primitive_integer(scale(-1, l)))
    ineqs = []
    for r in gens.rays:
        if primitive_integer(r) in lin_keys:
            continue
        c, beta = r[:n], r[n]
        if is_zero(c):
            continue
        ineqs.append((c, beta))
    eqs = [(l[:n], l[n]) for l in lin if not is_zero(l[:n])]
    return HPolyhedron(n, tuple(ineqs), tuple(eqs))


def contains(P, x: Sequence) -> bool:
    return P.contains(x)


def same_set(P, Q) -> bool:
    """Exact set equality via generators and facets."""
    Pv = P if isinstance(P, VPolyhedron) else h_to_v(P)
    Qv = Q if isinstance(Q, VPolyhedron) else h_to_v(Q)
    Ph = P if isinstance(P, HPolyhedron) else v_to_h(P)
    Qh = Q if isinstance(Q, HPolyhedron) else v_to_h(Q)
    return _v_inside_h(Pv, Qh) and _v_inside_h(Qv, Ph)


def _v_inside_h(V: VPolyhedron, H: HPolyhedron) -> bool:
    if not V.points:
        return True
    if not all(H.contains(p) for p in V.points):
        return False
    for r in V.rays:
        if any(dot(a, r) > 0 for a in H.G) or any(dot(a, r) != 0 for a in H.E):
            return False
    return True
