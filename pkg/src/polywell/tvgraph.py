"""Anisotropic total variation on graphs.

Edges are stored as ordered pairs ``(i, j)`` with ``i < j`` in lexicographic
order; row ``k`` of the difference matrix is ``e_i - e_j`` for edge ``k``.  An
orientation assigns a sign to every edge.  A ``+1`` on edge ``(i, j)`` points
the edge into ``i`` and contributes ``e_i - e_j`` to the degree-difference
vector, so each entry of that vector is in-degree minus out-degree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Sequence

from . import budget as _budget
from .exact import RationalMatrix, Vector, unit, vec, zeros
from .polyhedra import VPolyhedron, prune


@dataclass(frozen=True)
class Graph:
    node_count: int
    edges: tuple = ()

    def __post_init__(self):
        canon = []
        for e in self.edges:
            i, j = (int(a) for a in e)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise ValueError(f"edge ({i}, {j}) references a missing node")
            canon.append((min(i, j), max(i, j)))
        if len(set(canon)) != len(canon):
            raise ValueError("duplicate edge")
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in e)

    def is_forest(self) -> bool:
        parent = list(range(self.node_count))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for i, j in self.edges:
            ri, rj = find(i), find(j)
            if ri == rj:
                return False
            parent[ri] = rj
        return True


def path_graph(k: int) -> Graph:
    return Graph(k, tuple((i, i + 1) for i in range(k - 1)))


def cycle_graph(k: int) -> Graph:
    return Graph(k, tuple((i, (i + 1) % k) for i in range(k)))


def complete_graph(k: int) -> Graph:
    return Graph(k, tuple(itertools.combinations(range(k), 2)))


def grid_graph(N: int) -> Graph:
    """``N x N`` pixels, node ``r * N + c``, 4-neighbour edges."""
    edges = []
    for r in range(N):
        for c in range(N):
            v = r * N + c
            if c + 1 < N:
                edges.append((v, v + 1))
            if r + 1 < N:
                edges.append((v, v + N))
    return Graph(N * N, tuple(edges))


def parse_graph(text: str) -> Graph:
    """Edge-list format: ``"nodes E"`` on the first line, then ``"i j"`` per edge."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty graph file")
    head = lines[0].split()
    if len(head) != 2:
        raise ValueError("first line must be 'nodes edges'")
    nodes, count = int(head[0]), int(head[1])
    body = lines[1:]
    if len(body) != count:
        raise ValueError(f"expected {count} edge lines, found {len(body)}")
    edges = []
    for ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line {ln!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return Graph(nodes, tuple(edges))


def format_graph(g: Graph) -> str:
    lines = [f"{g.node_count} {g.edge_count}"]
    lines += [f"{i} {j}" for i, j in g.edges]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Orientation:
    graph: Graph
    signs: tuple

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if len(signs) != self.graph.edge_count or any(s not in (-1, 1) for s in signs):
            raise ValueError("orientation needs one sign in {-1, +1} per edge")
        object.__setattr__(self, "signs", signs)

    def arcs(self) -> list[tuple[int, int]]:
        """Directed arcs ``(tail, head)``."""
        return [(j, i) if s == 1 else (i, j) for (i, j), s in zip(self.graph.edges, self.signs)]


@dataclass(frozen=True)
class TvInstance:
    graph: Graph
    gamma: Fraction = Fraction(1)
    nonneg: bool = False

    def __post_init__(self):
        g = Fraction(self.gamma)
        if g <= 0:
            raise ValueError("gamma must be positive")
        object.__setattr__(self, "gamma", g)

    def function(self):
        from .pwl import cpwl_sum, nonneg_indicator, tv

        f = tv(self.graph, self.gamma)
        if self.nonneg:
            f = cpwl_sum(f, nonneg_indicator(self.graph.node_count))
        return f


def difference_matrix(g: Graph) -> RationalMatrix:
    n = g.node_count
    rows = []
    for i, j in g.edges:
        row = [Fraction(0)] * n
        row[i] = Fraction(1)
        row[j] = Fraction(-1)
        rows.append(row)
    return RationalMatrix(rows, ncols=n)


def orientation_vertex(g: Graph, u) -> Vector:
    signs = u.signs if isinstance(u, Orientation) else tuple(u)
    z = [Fraction(0)] * g.node_count
    for (i, j), s in zip(g.edges, signs):
        z[i] += s
        z[j] -= s
    return tuple(z)


def is_acyclic(g: Graph, u) -> bool:
    if not isinstance(u, Orientation):
        u = Orientation(g, tuple(u))
    ts = TopologicalSorter({v: set() for v in range(g.node_count)})
    for tail, head in u.arcs():
        ts.add(head, tail)
    try:
        ts.prepare()
    except CycleError:
        return False
    return True


def all_orientations(g: Graph, budget: int | None = None):
    _budget.check("vertices", 2**g.edge_count, budget)
    for signs in itertools.product((1, -1), repeat=g.edge_count):
        yield Orientation(g, signs)


def tv_polytope_vertices(g: Graph, budget: int | None = None) -> list[Vector]:
    """Degree-difference vectors of acyclic orientations, deduplicated and sorted."""
    out = {orientation_vertex(g, u) for u in all_orientations(g, budget) if is_acyclic(g, u)}
    return sorted(out)


def nn_tv_vertices(g: Graph, budget: int | None = None) -> list[Vector]:
    """Vertices of the TV polytope minus the nonnegative orthant.

    Computed from generators (all orientation vectors plus the rays ``-e_i``)
    by removing redundant points with exact LPs; no acyclicity test is used.
    """
    n = g.node_count
    pts = sorted({orientation_vertex(g, u) for u in all_orientations(g, budget)})
    rays = tuple(tuple(-a for a in unit(n, i)) for i in range(n))
    V = prune(VPolyhedron(n, tuple(pts), rays))
    return sorted(V.points)


def orientation_for_point(g: Graph, point: Sequence) -> Orientation | None:
    """Acyclic orientation whose degree-difference vector is ``point``, if any.

    Repeatedly removes a node whose remaining value equals its remaining
    degree (a sink), orienting its edges inward.  This succeeds exactly when
    ``point`` is a vertex of the TV polytope.
    """
    p = list(vec(point))
    if len(p) != g.node_count:
        raise ValueError("point has the wrong dimension")
    alive = set(range(g.node_count))
    incident = {v: [] for v in alive}
    for k, (i, j) in enumerate(g.edges):
        incident[i].append(k)
        incident[j].append(k)
    removed_edges: set[int] = set()
    signs = [0] * g.edge_count
    while alive:
        pick = None
        for v in sorted(alive):
            deg = sum(1 for k in incident[v] if k not in removed_edges)
            if p[v] == deg:
                pick = v
                break
        if pick is None:
            return None
        for k in incident[pick]:
            if k in removed_edges:
                continue
            i, j = g.edges[k]
            other = j if i == pick else i
            signs[k] = 1 if i == pick else -1
            p[other] += 1
            removed_edges.add(k)
        alive.remove(pick)
    u = Orientation(g, tuple(signs))
    if orientation_vertex(g, u) != tuple(vec(point)):
        return None
    return u


# two-projection CT ---------------------------------------------------------------


def default_ct_residual(N: int) -> Vector:
    """``-1`` first, then alternating ``2, -2, ...``, last entry ``+-1`` continuing the sign pattern."""
    if N < 2:
        raise ValueError("N must be at least 2")
    z = [Fraction(-1)]
    for k in range(1, N - 1):
        z.append(Fraction(2 if k % 2 == 1 else -2))
    z.append(Fraction(1 if (N - 1) % 2 == 1 else -1))
    return tuple(z)


def ct_axis_matrix(N: int) -> RationalMatrix:
    """Column sums (rows ``0..N-1``) followed by row sums of an ``N x N`` image."""
    n = N * N
    rows = []
    for c in range(N):
        rows.append([Fraction(1 if v % N == c else 0) for v in range(n)])
    for r in range(N):
        rows.append([Fraction(1 if v // N == r else 0) for v in range(n)])
    return RationalMatrix(rows, ncols=n)


@dataclass(frozen=True)
class CtCertificate:
    N: int
    instance: object  # ProblemInstance
    z: Vector
    point: Vector
    orientation: Orientation | None

    @property
    def grid(self) -> list[list[Fraction]]:
        N = self.N
        return [list(self.point[r * N : (r + 1) * N]) for r in range(N)]

    @property
    def acyclic(self) -> bool:
        return self.orientation is not None and is_acyclic(self.orientation.graph, self.orientation)

    @property
    def holds(self) -> bool:
        if self.orientation is None:
            return False
        g = self.orientation.graph
        return self.acyclic and orientation_vertex(g, self.orientation) == self.point

    @property
    def required_rank(self) -> int:
        return self.N * self.N

    @property
    def conclusion(self) -> str:
        r = self.instance.rank
        if self.holds:
            return (
                f"A^T z is a vertex of the TV dual polytope; well-posedness requires "
                f"rank(A) >= {self.required_rank}, but rank(A) = {r}"
            )
        return "A^T z is not a vertex of the TV dual polytope; no conclusion"


def ct_axis_instance(N: int, z: Sequence | None = None, gamma=1) -> CtCertificate:
    """Two-projection CT instance on an ``N x N`` grid with TV regularization.

    ``z`` is split as ``(column residuals | row residuals)``; by default both
    halves are :func:`default_ct_residual`.
    """
    from .pwl import tv
    from .wellposed import ProblemInstance

    if N < 2:
        raise ValueError("N must be at least 2")
    if z is None:
        half = default_ct_residual(N)
        z = half + half
    z = vec(z)
    if len(z) != 2 * N:
        raise ValueError("z must have 2N entries")
    A = ct_axis_matrix(N)
    g = grid_graph(N)
    inst = ProblemInstance(A, tv(g, gamma))
    point = A.rmatvec(z)
    if gamma != 1:
        point = tuple(a / Fraction(gamma) for a in point)
    u = orientation_for_point(g, point)
    return CtCertificate(N, inst, z, point, u)
