"""Exact linear programming.

A two-phase primal simplex with Bland's rule, run on an integer tableau with
fraction-free (Bareiss style) pivoting so that entries stay integral and small.
The solver handles

    maximize   c.x
    subject to G x <= h,  E x = f,  x free

and returns primal values together with dual multipliers.  Infeasible problems
come with a Farkas certificate and unbounded ones with a recession ray.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

from .exact import Vector, dot, vec


class LPError(RuntimeError):
    """Internal consistency failure inside the exact solver."""


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: Vector | None = None
    value: Fraction | None = None
    ineq_duals: Vector | None = None  # lam >= 0 with G^T lam + E^T mu = c
    eq_duals: Vector | None = None
    ray: Vector | None = None  # G r <= 0, E r = 0, c.r > 0
    farkas: tuple[Vector, Vector] | None = None  # G^T lam + E^T mu = 0, h.lam + f.mu = -1

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _integer_row(coeffs: list[Fraction], rhs: Fraction) -> tuple[list[int], int, Fraction]:
    """Scale a rational row to coprime integers with nonnegative right-hand side.

    Returns ``(row, rhs, k)`` where the integer row equals ``k`` times the input.
    """
    den = 1
    for a in coeffs:
        if a:
            den = lcm(den, a.denominator)
    den = lcm(den, rhs.denominator)
    row = [int(a * den) for a in coeffs]
    r = int(rhs * den)
    k = Fraction(den)
    if r < 0:
        row = [-a for a in row]
        r = -r
        k = -k
    g = r
    for a in row:
        if a:
            g = gcd(g, a)
    if g > 1:
        row = [a // g for a in row]
        r //= g
        k /= g
    return row, r, k


def linprog(
    c: Sequence,
    G: Sequence[Sequence] = (),
    h: Sequence = (),
    E: Sequence[Sequence] = (),
    f: Sequence = (),
    n: int | None = None,
) -> LPResult:
    """Maximize ``c.x`` over ``{x : G x <= h, E x = f}`` exactly."""
    c = vec(c)
    if n is None:
        n = len(c)
    if len(c) != n:
        raise ValueError("objective length mismatch")
    G = [vec(r) for r in G]
    E = [vec(r) for r in E]
    h = vec(h)
    f = vec(f)
    if len(G) != len(h) or len(E) != len(f):
        raise ValueError("constraint/right-hand side mismatch")
    for r in G + E:
        if len(r) != n:
            raise ValueError("constraint row length mismatch")
    return _Simplex(c, G, h, E, f, n).run()


class _Simplex:
    def __init__(self, c, G, h, E, f, n):
        self.c, self.G, self.h, self.E, self.f, self.n = c, G, h, E, f, n
        mu, me = len(G), len(E)
        self.mu, self.me = mu, me
        m = mu + me
        self.m = m
        # columns: x+ (n), x- (n), slacks (mu), artificials (m), rhs
        N = 2 * n + mu
        self.N = N
        self.rhs = N + m
        zero = Fraction(0)
        rows = []
        scales = []
        for i in range(m):
            if i < mu:
                a, b = G[i], h[i]
            else:
                a, b = E[i - mu], f[i - mu]
            coeffs = list(a) + [-x for x in a] + [zero] * mu
            if i < mu:
                coeffs[2 * n + i] = Fraction(1)
            row, r, k = _integer_row(coeffs, b)
            art = [0] * m
            art[i] = 1
            rows.append(row + art + [r])
            scales.append(k)
        self.scales = scales
        # objective (minimize -c.x) scaled to integers
        cden = 1
        for a in c:
            if a:
                cden = lcm(cden, a.denominator)
        self.K = Fraction(cden)
        ci = [int(-a * cden) for a in c]
        obj2 = ci + [-a for a in ci] + [0] * mu + [0] * m + [0]
        obj1 = [0] * (N + m + 1)
        for row in rows:
            for j in range(N):
                obj1[j] -= row[j]
            obj1[self.rhs] -= row[self.rhs]
        self.M = rows + [obj2, obj1]
        self.obj2 = m
        self.obj1 = m + 1
        self.D = 1
        self.basis = [N + i for i in range(m)]

    def pivot(self, r: int, col: int) -> None:
        M = self.M
        p = M[r][col]
        d = self.D
        prow = M[r]
        for i, row in enumerate(M):
            if i == r:
                continue
            a = row[col]
            if a == 0:
                if p != d:
                    M[i] = [(p * x) // d for x in row]
                continue
            M[i] = [(p * x - a * y) // d for x, y in zip(row, prow)]
        self.D = p
        if p < 0:
            self.M = M = [[-x for x in row] for row in M]
            self.D = -p
        self.basis[r] = col

    def _ratio_row(self, col: int) -> int | None:
        M, rhs, basis = self.M, self.rhs, self.basis
        best = None
        for i in range(self.m):
            a = M[i][col]
            if a > 0:
                if best is None:
                    best = i
                    continue
                # compare M[i][rhs]/a with M[best][rhs]/M[best][col]
                lhs = M[i][rhs] * M[best][col]
                rhs_ = M[best][rhs] * a
                if lhs < rhs_ or (lhs == rhs_ and basis[i] < basis[best]):
                    best = i
        return best

    def _iterate(self, objrow: int, ncols: int) -> int | None:
        """Run simplex iterations; return an entering column if unbounded."""
        M = self.M
        while True:
            M = self.M
            orow = M[objrow]
            col = next((j for j in range(ncols) if orow[j] < 0), None)
            if col is None:
                return None
            r = self._ratio_row(col)
            if r is None:
                return col
            self.pivot(r, col)

    def _solution(self) -> list[Fraction]:
        xs = [Fraction(0)] * (self.N + self.m)
        D = self.D
        for i, b in enumerate(self.basis):
            xs[b] = Fraction(self.M[i][self.rhs], D)
        return xs

    def run(self) -> LPResult:
        n, m, N = self.n, self.m, self.N
        # phase 1 over all columns
        unb = self._iterate(self.obj1, N + m)
        if unb is not None:
            raise LPError("phase 1 unbounded")
        M, D = self.M, self.D
        infeas = -Fraction(M[self.obj1][self.rhs], D)
        if infeas > 0:
            y = [1 - Fraction(M[self.obj1][N + r], D) for r in range(m)]
            return self._farkas(y)
        # drive artificials out of the basis where possible
        for i in range(m):
            if self.basis[i] >= N:
                col = next((j for j in range(N) if self.M[i][j] != 0), None)
                if col is not None:
                    self.pivot(i, col)
        # phase 2 restricted to structural columns
        unb = self._iterate(self.obj2, N)
        if unb is not None:
            return self._ray(unb)
        xs = self._solution()
        x = tuple(xs[j] - xs[n + j] for j in range(n))
        M, D = self.M, self.D
        ys = []
        for r in range(m):
            y = -Fraction(M[self.obj2][N + r], D)
            ys.append(y * self.scales[r] / self.K)
        lam = tuple(-y for y in ys[: self.mu])
        mu = tuple(-y for y in ys[self.mu :])
        return LPResult("optimal", x=x, value=dot(self.c, x), ineq_duals=lam, eq_duals=mu)

    def _farkas(self, y: list[Fraction]) -> LPResult:
        # y^T A_hat >= 0 on structural columns and y^T b_hat < 0 after phase 1
        yo = [yr * k for yr, k in zip(y, self.scales)]
        lam = [-v for v in yo[: self.mu]]
        mu = [-v for v in yo[self.mu :]]
        val = dot(lam, self.h) + dot(mu, self.f)
        if val >= 0:
            raise LPError("Farkas certificate has nonnegative value")
        s = -1 / val
        lam = tuple(v * s for v in lam)
        mu = tuple(v * s for v in mu)
        return LPResult("infeasible", farkas=(lam, mu))

    def _ray(self, col: int) -> LPResult:
        n, N = self.n, self.N
        d = [Fraction(0)] * (N + self.m)
        d[col] = Fraction(1)
        D = self.D
        for i, b in enumerate(self.basis):
            d[b] = -Fraction(self.M[i][col], D)
        r = tuple(d[j] - d[n + j] for j in range(n))
        xs = self._solution()
        x = tuple(xs[j] - xs[n + j] for j in range(n))
        return LPResult("unbounded", x=x, ray=r)


def feasible_point(G=(), h=(), E=(), f=(), n: int | None = None) -> LPResult:
    if n is None:
        rows = list(G) + list(E)
        if not rows:
            raise ValueError("dimension required")
        n = len(rows[0])
    return linprog([0] * n, G, h, E, f, n=n)
