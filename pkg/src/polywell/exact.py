"""Exact rational linear algebra.

Everything here works on :class:`fractions.Fraction` values.  Vectors are plain
tuples of Fractions; matrices are :class:`RationalMatrix` instances.  Subspaces
carry an explicit basis and are compared by mutual containment.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

Vector = tuple  # tuple[Fraction, ...]

_RATIONAL_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")


def parse_rational(text: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"``.  Raises ``ValueError`` on anything else."""
    m = _RATIONAL_RE.match(text.strip())
    if m is None:
        raise ValueError(f"not a rational literal: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rational(q: Fraction) -> str:
    """Canonical text form: ``"p"`` when the denominator is 1, else ``"p/q"``."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def to_fraction(x) -> Fraction:
    """Convert ints, Fractions, rational strings and floats (via ``repr``)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError("non-finite float")
        return Fraction(repr(x))
    # numpy scalars and the like
    if hasattr(x, "item"):
        return to_fraction(x.item())
    return Fraction(x)


def vec(values: Iterable) -> Vector:
    return tuple(to_fraction(v) for v in values)


def zeros(n: int) -> Vector:
    return (Fraction(0),) * n


def unit(n: int, i: int) -> Vector:
    return tuple(Fraction(1 if k == i else 0) for k in range(n))


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def add(u: Sequence, v: Sequence) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence, v: Sequence) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, u: Sequence) -> Vector:
    c = to_fraction(c)
    return tuple(c * a for a in u)


def is_zero(u: Sequence) -> bool:
    return all(a == 0 for a in u)


def primitive_integer(u: Sequence) -> tuple[int, ...]:
    """Smallest integer vector positively proportional to ``u``."""
    from math import gcd

    den = lcm(*(Fraction(a).denominator for a in u)) if u else 1
    ints = [int(Fraction(a) * den) for a in u]
    g = 0
    for a in ints:
        g = gcd(g, a)
    if g > 1:
        ints = [a // g for a in ints]
    return tuple(ints)


class RationalMatrix:
    """Immutable dense matrix of Fractions."""

    __slots__ = ("_rows", "_ncols", "_hash")

    def __init__(self, rows: Iterable[Iterable] = (), ncols: int | None = None):
        data = tuple(vec(r) for r in rows)
        if data:
            widths = {len(r) for r in data}
            if len(widths) != 1:
                raise ValueError("ragged matrix")
            width = widths.pop()
            if ncols is not None and ncols != width:
                raise ValueError("column count mismatch")
            ncols = width
        elif ncols is None:
            ncols = 0
        self._rows = data
        self._ncols = ncols
        self._hash = None

    # construction helpers
    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([unit(n, i) for i in range(n)], ncols=n)

    @classmethod
    def zeros(cls, m: int, n: int) -> "RationalMatrix":
        return cls([zeros(n) for _ in range(m)], ncols=n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int) -> "RationalMatrix":
        if not cols:
            return cls([() for _ in range(nrows)], ncols=0) if nrows else cls((), 0)
        return cls(zip(*cols), ncols=len(cols))

    # basic protocol
    @property
    def shape(self) -> tuple[int, int]:
        return (len(self._rows), self._ncols)

    @property
    def nrows(self) -> int:
        return len(self._rows)

    @property
    def ncols(self) -> int:
        return self._ncols

    @property
    def rows(self) -> tuple[Vector, ...]:
        return self._rows

    def row(self, i: int) -> Vector:
        return self._rows[i]

    def col(self, j: int) -> Vector:
        return tuple(r[j] for r in self._rows)

    def __getitem__(self, ij):
        i, j = ij
        return self._rows[i][j]

    def __iter__(self):
        return iter(self._rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._ncols, self._rows))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_rational(a) for a in r) for r in self._rows)
        return f"RationalMatrix({self.nrows}x{self.ncols}: [{body}])"

    # algebra
    @property
    def T(self) -> "RationalMatrix":
        if not self._rows:
            return RationalMatrix([() for _ in range(self._ncols)], ncols=0) if self._ncols else RationalMatrix()
        return RationalMatrix(zip(*self._rows), ncols=len(self._rows))

    def matvec(self, x: Sequence) -> Vector:
        if len(x) != self._ncols:
            raise ValueError("dimension mismatch")
        return tuple(dot(r, x) for r in self._rows)

    def rmatvec(self, y: Sequence) -> Vector:
        """Return ``self.T @ y``."""
        if len(y) != self.nrows:
            raise ValueError("dimension mismatch")
        out = [Fraction(0)] * self._ncols
        for yi, r in zip(y, self._rows):
            if yi:
                for j, a in enumerate(r):
                    if a:
                        out[j] += yi * a
        return tuple(out)

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            if self._ncols != other.nrows:
                raise ValueError("dimension mismatch")
            cols = [other.col(j) for j in range(other.ncols)]
            return RationalMatrix(
                [[dot(r, c) for c in cols] for r in self._rows], ncols=other.ncols
            )
        return self.matvec(other)

    def __neg__(self) -> "RationalMatrix":
        return RationalMatrix([[-a for a in r] for r in self._rows], ncols=self._ncols)

    def vstack(self, other: "RationalMatrix") -> "RationalMatrix":
        if self._ncols != other.ncols and self.nrows and other.nrows:
            raise ValueError("column count mismatch")
        ncols = self._ncols if self.nrows else other.ncols
        return RationalMatrix(self._rows + other.rows, ncols=ncols)

    def hstack(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.nrows != other.nrows:
            raise ValueError("row count mismatch")
        return RationalMatrix(
            [a + b for a, b in zip(self._rows, other.rows)], ncols=self._ncols + other.ncols
        )

    def select_rows(self, idx: Iterable[int]) -> "RationalMatrix":
        return RationalMatrix([self._rows[i] for i in idx], ncols=self._ncols)

    def to_float(self):
        import numpy as np

        return np.array([[float(a) for a in r] for r in self._rows], dtype=float).reshape(
            self.shape
        )

    # elimination
    def rref(self) -> tuple["RationalMatrix", tuple[int, ...]]:
        """Reduced row echelon form and pivot columns."""
        rows, pivots = _rref([list(r) for r in self._rows], self._ncols)
        return RationalMatrix(rows, ncols=self._ncols), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def nullspace(self) -> "Subspace":
        return nullspace(self)

    def row_space(self) -> "Subspace":
        return Subspace.span(self._rows, self._ncols)

    def solve(self, b: Sequence) -> Vector | None:
        """Some solution of ``self @ x == b`` or ``None`` if inconsistent."""
        return solve(self, b)


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], tuple[int, ...]]:
    pivots = []
    r = 0
    m = len(rows)
    for c in range(ncols):
        if r == m:
            break
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pv = rows[r][c]
        if pv != 1:
            rows[r] = [a / pv for a in rows[r]]
        pr = rows[r]
        for i in range(m):
            if i != r:
                f = rows[i][c]
                if f:
                    rows[i] = [a - f * b for a, b in zip(rows[i], pr)]
        pivots.append(c)
        r += 1
    return rows, tuple(pivots)


def as_matrix(a) -> RationalMatrix:
    if isinstance(a, RationalMatrix):
        return a
    return RationalMatrix(a)


def rank(a) -> int:
    a = as_matrix(a)
    return a.rank()


def nullspace(a) -> "Subspace":
    """Kernel of ``a`` with the standard free-variable basis."""
    a = as_matrix(a)
    n = a.ncols
    r, pivots = a.rref()
    pivset = set(pivots)
    basis = []
    for free in range(n):
        if free in pivset:
            continue
        v = [Fraction(0)] * n
        v[free] = Fraction(1)
        for k, pc in enumerate(pivots):
            v[pc] = -r[k, free]
        basis.append(tuple(v))
    return Subspace(n, tuple(basis))


def solve(a, b: Sequence) -> Vector | None:
    a = as_matrix(a)
    b = vec(b)
    if len(b) != a.nrows:
        raise ValueError("dimension mismatch")
    n = a.ncols
    aug = [list(r) + [bi] for r, bi in zip(a.rows, b)]
    rows, pivots = _rref(aug, n + 1)
    if pivots and pivots[-1] == n:
        return None
    x = [Fraction(0)] * n
    for k, pc in enumerate(pivots):
        x[pc] = rows[k][n]
    return tuple(x)


def independent_subset(vectors: Sequence[Sequence], n: int) -> tuple[int, ...]:
    """Indices of a maximal linearly independent prefix-greedy subset."""
    chosen: list[int] = []
    basis: list[list[Fraction]] = []  # kept in echelon form
    piv: list[int] = []
    for idx, v in enumerate(vectors):
        w = list(vec(v))
        for b, pc in zip(basis, piv):
            f = w[pc]
            if f:
                w = [x - f * y for x, y in zip(w, b)]
        c = next((j for j in range(n) if w[j] != 0), None)
        if c is None:
            continue
        pv = w[c]
        w = [x / pv for x in w]
        basis.append(w)
        piv.append(c)
        chosen.append(idx)
    return tuple(chosen)


class Subspace:
    """Linear subspace of Q^n given by an independent basis."""

    __slots__ = ("ambient_dim", "basis")

    def __init__(self, ambient_dim: int, basis: Sequence[Sequence] = ()):
        self.ambient_dim = ambient_dim
        self.basis = tuple(vec(b) for b in basis)
        for b in self.basis:
            if len(b) != ambient_dim:
                raise ValueError("basis vector has wrong length")

    @classmethod
    def span(cls, vectors: Sequence[Sequence], n: int) -> "Subspace":
        vectors = list(vectors)
        keep = independent_subset(vectors, n)
        return cls(n, [vectors[i] for i in keep])

    @classmethod
    def whole(cls, n: int) -> "Subspace":
        return cls(n, [unit(n, i) for i in range(n)])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix(self) -> RationalMatrix:
        """Basis vectors as rows."""
        return RationalMatrix(self.basis, ncols=self.ambient_dim)

    def contains(self, v: Sequence) -> bool:
        if is_zero(v):
            return True
        if not self.basis:
            return False
        return rank(list(self.basis) + [vec(v)]) == self.dim

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(b) for b in other.basis)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.ambient_dim == other.ambient_dim
            and self.dim == other.dim
            and self.contains_subspace(other)
        )

    __hash__ = None  # mutable-equality semantics; not hashable

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim} in Q^{self.ambient_dim})"

    def orthogonal_complement(self) -> "Subspace":
        if not self.basis:
            return Subspace.whole(self.ambient_dim)
        return nullspace(self.matrix())

    def intersect(self, other: "Subspace") -> "Subspace":
        return subspace_intersection(self, other)

    def project_coordinates(self, v: Sequence) -> Vector | None:
        """Coefficients of ``v`` in this basis, or ``None`` if not contained."""
        if not self.basis:
            return () if is_zero(v) else None
        return solve(RationalMatrix.from_columns(self.basis, self.ambient_dim), v)


def subspace_intersection(u: Subspace, v: Subspace) -> Subspace:
    n = u.ambient_dim
    if v.ambient_dim != n:
        raise ValueError("ambient dimensions differ")
    if u.dim == 0 or v.dim == 0:
        return Subspace(n)
    cols = list(u.basis) + [scale(-1, b) for b in v.basis]
    k = nullspace(RationalMatrix.from_columns(cols, n))
    out = []
    for coeffs in k.basis:
        w = zeros(n)
        for c, b in zip(coeffs[: u.dim], u.basis):
            if c:
                w = add(w, scale(c, b))
        out.append(w)
    return Subspace.span(out, n)


def row_space(a) -> Subspace:
    return as_matrix(a).row_space()


def column_space(a) -> Subspace:
    a = as_matrix(a)
    return Subspace.span([a.col(j) for j in range(a.ncols)], a.nrows)


def inverse(a) -> RationalMatrix:
    a = as_matrix(a)
    n = a.nrows
    if a.ncols != n:
        raise ValueError("matrix is not square")
    aug = [list(r) + list(unit(n, i)) for i, r in enumerate(a.rows)]
    rows, pivots = _rref(aug, 2 * n)
    if tuple(pivots[:n]) != tuple(range(n)):
        raise ZeroDivisionError("singular matrix")
    return RationalMatrix([r[n:] for r in rows[:n]], ncols=n)


def is_positive_definite(a) -> bool:
    """Symmetric with positive leading principal minors (Sylvester)."""
    a = as_matrix(a)
    n = a.nrows
    if a.ncols != n or a != a.T:
        return False
    rows = [list(r) for r in a.rows]
    # Gaussian elimination without pivoting: pivots are ratios of leading minors
    for k in range(n):
        pv = rows[k][k]
        if pv <= 0:
            return False
        for i in range(k + 1, n):
            f = rows[i][k] / pv
            if f:
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[k])]
    return True
