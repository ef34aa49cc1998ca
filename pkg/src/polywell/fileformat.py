"""Problem file format (version 1).

A problem file is line oriented.  ``#`` starts a comment.  Blocks are opened
by a header line and followed by exactly the announced number of data lines::

    version 1
    dimension 3                      # optional when a matrix fixes it
    matrix A 2 3
      1 0 0
      0 1 -1/2
    vector y 2
      1 1
    graph G 3 2                      # nodes, edges; then "i j" lines
      0 1
      1 2
    pieces P 2 3                     # k pieces in R^n: "v1 .. vn ; w"
      1 0 0 ; 0
      -1 0 0 ; 0
    polyhedron Q 2 3                 # "a1 .. an <= b" or "a1 .. an = b"
      1 0 0 <= 1
      0 0 1 = 0
    regularizer sum(l1(I, 1/2), nonneg_indicator)
    measurement A                    # optional, defaults to the matrix named A
    sigma S                          # optional weight matrix name
    l0 B y nonneg                    # l0 instance: matrix, vector, optional flag
    meta source free text

Regularizer builders: ``l1(M, gamma)`` (``M`` may be ``I``),
``linf_ball_indicator`` / ``linf_ball_indicator(r)``, ``nonneg_indicator``,
``tv(G, gamma)``, ``max_affine(P)``, ``indicator(Q)``, ``scale(gamma, expr)``
and ``sum(expr, ...)``.  Numbers are ``p`` or ``p/q``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import RationalMatrix, format_rational, parse_rational
from .polyhedra import HPolyhedron
from .pwl import (
    CpwlFunction,
    cpwl_sum,
    indicator,
    l1,
    linf_ball_indicator,
    max_affine,
    nonneg_indicator,
    scaled,
    tv,
)
from .tvgraph import Graph

FORMAT_VERSION = 1


class ParseError(ValueError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


@dataclass
class Expr:
    name: str
    args: list
    line: int
    col: int


@dataclass
class ProblemFile:
    version: int = FORMAT_VERSION
    dimension: int | None = None
    matrices: dict = field(default_factory=dict)
    vectors: dict = field(default_factory=dict)
    graphs: dict = field(default_factory=dict)
    pieces: dict = field(default_factory=dict)
    polyhedra: dict = field(default_factory=dict)
    regularizer: Expr | None = None
    regularizer_text: str | None = None
    measurement: str | None = None
    sigma: str | None = None
    l0: tuple | None = None  # (matrix name, vector name, nonneg)
    meta: dict = field(default_factory=dict)
    _positions: dict = field(default_factory=dict, repr=False)

    # building
    def ambient_dim(self) -> int:
        if self.dimension is not None:
            return self.dimension
        name = self.measurement or "A"
        if name in self.matrices:
            return self.matrices[name].ncols
        if self.regularizer is not None:
            n = _infer_dim(self, self.regularizer)
            if n is not None:
                return n
        raise ParseError(1, 1, "cannot infer the dimension; add a 'dimension' line")

    def function(self) -> CpwlFunction:
        if self.regularizer is None:
            raise ParseError(1, 1, "no regularizer given")
        return _build(self, self.regularizer, self.ambient_dim())

    def instance(self):
        from .wellposed import ProblemInstance

        name = self.measurement or "A"
        if name not in self.matrices:
            line, col = self._positions.get("measurement", (1, 1))
            raise ParseError(line, col, f"measurement matrix {name!r} is not defined")
        f = self.function()
        A = self.matrices[name]
        if A.ncols != f.ambient_dim:
            raise ParseError(*self._positions.get(("matrix", name), (1, 1)), "matrix width does not match the dimension")
        sigma = None
        if self.sigma is not None:
            if self.sigma not in self.matrices:
                raise ParseError(*self._positions["sigma"], f"sigma matrix {self.sigma!r} is not defined")
            sigma = self.matrices[self.sigma]
        try:
            return ProblemInstance(A, f, sigma)
        except ValueError as exc:
            raise ParseError(*self._positions.get("sigma", (1, 1)), str(exc)) from None

    def l0_instance(self):
        from .reductions import L0Instance

        if self.l0 is None:
            raise ParseError(1, 1, "no 'l0' line in file")
        Bn, yn, nonneg = self.l0
        line, col = self._positions["l0"]
        if Bn not in self.matrices:
            raise ParseError(line, col, f"matrix {Bn!r} is not defined")
        if yn not in self.vectors:
            raise ParseError(line, col, f"vector {yn!r} is not defined")
        try:
            return L0Instance(self.matrices[Bn], self.vectors[yn], nonneg)
        except ValueError as exc:
            raise ParseError(line, col, str(exc)) from None


# tokenizing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|([+-]?\d+(?:/\d+)?)|([(),])|(\S))")


def _parse_expr(text: str, line: int, col0: int) -> Expr:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        kind = next(i for i in range(1, 5) if m.group(i) is not None)
        start = m.start(kind)
        if kind == 4:
            raise ParseError(line, col0 + start, f"unexpected character {m.group(4)!r}")
        toks.append((kind, m.group(kind), col0 + start))
        pos = m.end()
    toks.append((0, None, col0 + len(text)))
    i = 0

    def peek():
        return toks[i]

    def take():
        nonlocal i
        t = toks[i]
        i += 1
        return t

    def expr():
        kind, val, col = take()
        if kind == 2:
            try:
                return ("num", parse_rational(val), col)
            except ValueError as exc:
                raise ParseError(line, col, str(exc)) from None
        if kind != 1:
            raise ParseError(line, col, "expected a name or number")
        if peek()[1] != "(":
            return Expr(val, [], line, col)
        take()
        args = []
        if peek()[1] == ")":
            take()
            return Expr(val, args, line, col)
        while True:
            args.append(expr())
            k, v, c = take()
            if v == ")":
                break
            if v != ",":
                raise ParseError(line, c, "expected ',' or ')'")
        return Expr(val, args, line, col)

    e = expr()
    if peek()[0] != 0:
        raise ParseError(line, peek()[2], "trailing input after expression")
    if not isinstance(e, Expr):
        raise ParseError(line, col0, "regularizer must be a builder expression")
    return e


def _rationals(parts, line: int, cols) -> list[Fraction]:
    out = []
    for p, c in zip(parts, cols):
        try:
            out.append(parse_rational(p))
        except ValueError as exc:
            raise ParseError(line, c, str(exc)) from None
    return out


def _split_cols(raw: str):
    """Whitespace-separated tokens with their 1-based columns."""
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", raw)]


def _count(tok, line) -> int:
    s, c = tok
    if not re.fullmatch(r"\d+", s):
        raise ParseError(line, c, f"expected a count, got {s!r}")
    return int(s)


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _name(tok, line) -> str:
    s, c = tok
    if not _NAME.fullmatch(s):
        raise ParseError(line, c, f"invalid name {s!r}")
    if s == "I":
        raise ParseError(line, c, "'I' is reserved for the identity")
    return s


def parse_problem(text: str) -> ProblemFile:
    pf = ProblemFile()
    lines = text.splitlines()
    idx = 0
    seen_version = False
    used_names: dict[str, tuple[int, int]] = {}

    def content(k):
        raw = lines[k].split("#", 1)[0]
        return raw

    def next_data(what, hdr_line):
        nonlocal idx
        while idx < len(lines):
            raw = content(idx)
            idx += 1
            if raw.strip():
                return raw, idx
        raise ParseError(hdr_line, 1, f"unexpected end of file inside {what}")

    def declare(name, line, col):
        if name in used_names:
            raise ParseError(line, col, f"name {name!r} already defined on line {used_names[name][0]}")
        used_names[name] = (line, col)

    while idx < len(lines):
        raw = content(idx)
        idx += 1
        lineno = idx
        toks = _split_cols(raw)
        if not toks:
            continue
        key, kcol = toks[0]
        if not seen_version and key != "version":
            raise ParseError(lineno, kcol, "file must start with a 'version' line")
        if key == "version":
            if seen_version:
                raise ParseError(lineno, kcol, "duplicate 'version' line")
            if len(toks) != 2:
                raise ParseError(lineno, kcol, "expected 'version <n>'")
            v = _count(toks[1], lineno)
            if v != FORMAT_VERSION:
                raise ParseError(lineno, toks[1][1], f"unsupported format version {v}")
            pf.version = v
            seen_version = True
        elif key == "dimension":
            if len(toks) != 2:
                raise ParseError(lineno, kcol, "expected 'dimension <n>'")
            pf.dimension = _count(toks[1], lineno)
        elif key == "matrix":
            if len(toks) != 4:
                raise ParseError(lineno, kcol, "expected 'matrix NAME ROWS COLS'")
            name = _name(toks[1], lineno)
            declare(name, lineno, toks[1][1])
            m, n = _count(toks[2], lineno), _count(toks[3], lineno)
            rows = []
            for _ in range(m):
                r, ln = next_data(f"matrix {name}", lineno)
                rt = _split_cols(r)
                if len(rt) != n:
                    raise ParseError(ln, rt[0][1] if rt else 1, f"expected {n} entries, found {len(rt)}")
                rows.append(_rationals([t for t, _ in rt], ln, [c for _, c in rt]))
            pf.matrices[name] = RationalMatrix(rows, ncols=n)
            pf._positions[("matrix", name)] = (lineno, kcol)
        elif key == "vector":
            if len(toks) != 3:
                raise ParseError(lineno, kcol, "expected 'vector NAME LENGTH'")
            name = _name(toks[1], lineno)
            declare(name, lineno, toks[1][1])
            n = _count(toks[2], lineno)
            vals = []
            if n:
                r, ln = next_data(f"vector {name}", lineno)
                rt = _split_cols(r)
                if len(rt) != n:
                    raise ParseError(ln, rt[0][1], f"expected {n} entries, found {len(rt)}")
                vals = _rationals([t for t, _ in rt], ln, [c for _, c in rt])
            pf.vectors[name] = tuple(vals)
        elif key == "graph":
            if len(toks) != 4:
                raise ParseError(lineno, kcol, "expected 'graph NAME NODES EDGES'")
            name = _name(toks[1], lineno)
            declare(name, lineno, toks[1][1])
            nodes, ne = _count(toks[2], lineno), _count(toks[3], lineno)
            edges = []
            for _ in range(ne):
                r, ln = next_data(f"graph {name}", lineno)
                rt = _split_cols(r)
                if len(rt) != 2:
                    raise ParseError(ln, rt[0][1], "expected 'i j'")
                edges.append((_count(rt[0], ln), _count(rt[1], ln)))
            try:
                pf.graphs[name] = Graph(nodes, tuple(edges))
            except ValueError as exc:
                raise ParseError(lineno, kcol, str(exc)) from None
        elif key == "pieces":
            if len(toks) != 4:
                raise ParseError(lineno, kcol, "expected 'pieces NAME COUNT DIM'")
            name = _name(toks[1], lineno)
            declare(name, lineno, toks[1][1])
            k, n = _count(toks[2], lineno), _count(toks[3], lineno)
            items = []
            for _ in range(k):
                r, ln = next_data(f"pieces {name}", lineno)
                rt = _split_cols(r)
                semi = [i for i, (t, _) in enumerate(rt) if t == ";"]
                if len(semi) != 1 or semi[0] != n or len(rt) != n + 2:
                    raise ParseError(ln, rt[0][1], f"expected {n} gradient entries, ';' and an offset")
                v = _rationals([t for t, _ in rt[:n]], ln, [c for _, c in rt[:n]])
                w = _rationals([rt[n + 1][0]], ln, [rt[n + 1][1]])[0]
                items.append((tuple(v), w))
            pf.pieces[name] = (n, items)
        elif key == "polyhedron":
            if len(toks) != 4:
                raise ParseError(lineno, kcol, "expected 'polyhedron NAME ROWS DIM'")
            name = _name(toks[1], lineno)
            declare(name, lineno, toks[1][1])
            k, n = _count(toks[2], lineno), _count(toks[3], lineno)
            ineqs, eqs = [], []
            for _ in range(k):
                r, ln = next_data(f"polyhedron {name}", lineno)
                rt = _split_cols(r)
                if len(rt) != n + 2 or rt[n][0] not in ("<=", "="):
                    raise ParseError(ln, rt[0][1], f"expected {n} coefficients, '<=' or '=', and a bound")
                a = _rationals([t for t, _ in rt[:n]], ln, [c for _, c in rt[:n]])
                b = _rationals([rt[n + 1][0]], ln, [rt[n + 1][1]])[0]
                (ineqs if rt[n][0] == "<=" else eqs).append((tuple(a), b))
            pf.polyhedra[name] = HPolyhedron(n, tuple(ineqs), tuple(eqs))
        elif key == "regularizer":
            if pf.regularizer is not None:
                raise ParseError(lineno, kcol, "duplicate 'regularizer' line")
            start = raw.index("regularizer") + len("regularizer")
            body = raw[start:]
            stripped = body.lstrip()
            col0 = start + (len(body) - len(stripped)) + 1
            if not stripped.strip():
                raise ParseError(lineno, kcol, "empty regularizer expression")
            pf.regularizer = _parse_expr(stripped.rstrip(), lineno, col0)
            pf.regularizer_text = stripped.strip()
        elif key == "measurement":
            if len(toks) != 2:
                raise ParseError(lineno, kcol, "expected 'measurement NAME'")
            pf.measurement = toks[1][0]
            pf._positions["measurement"] = (lineno, toks[1][1])
        elif key == "sigma":
            if len(toks) != 2:
                raise ParseError(lineno, kcol, "expected 'sigma NAME'")
            pf.sigma = toks[1][0]
            pf._positions["sigma"] = (lineno, toks[1][1])
        elif key == "l0":
            if len(toks) not in (3, 4) or (len(toks) == 4 and toks[3][0] != "nonneg"):
                raise ParseError(lineno, kcol, "expected 'l0 MATRIX VECTOR [nonneg]'")
            pf.l0 = (toks[1][0], toks[2][0], len(toks) == 4)
            pf._positions["l0"] = (lineno, kcol)
        elif key == "meta":
            if len(toks) < 2:
                raise ParseError(lineno, kcol, "expected 'meta KEY [text]'")
            mkey = toks[1][0]
            rest = raw[toks[1][1] - 1 + len(mkey) :].strip()
            pf.meta[mkey] = rest
        else:
            raise ParseError(lineno, kcol, f"unknown directive {key!r}")
    if not seen_version:
        raise ParseError(1, 1, "missing 'version' line")
    return pf


# building regularizers -----------------------------------------------------------


def _infer_dim(pf: ProblemFile, e) -> int | None:
    if not isinstance(e, Expr):
        return None
    if e.name == "l1" and e.args and isinstance(e.args[0], Expr) and e.args[0].name in pf.matrices:
        return pf.matrices[e.args[0].name].ncols
    if e.name == "tv" and e.args and isinstance(e.args[0], Expr) and e.args[0].name in pf.graphs:
        return pf.graphs[e.args[0].name].node_count
    if e.name == "max_affine" and e.args and isinstance(e.args[0], Expr) and e.args[0].name in pf.pieces:
        return pf.pieces[e.args[0].name][0]
    if e.name == "indicator" and e.args and isinstance(e.args[0], Expr) and e.args[0].name in pf.polyhedra:
        return pf.polyhedra[e.args[0].name].ambient_dim
    for a in e.args:
        n = _infer_dim(pf, a)
        if n is not None:
            return n
    return None


def _arity(e: Expr, lo: int, hi: int) -> None:
    if not lo <= len(e.args) <= hi:
        want = str(lo) if lo == hi else f"{lo} to {hi}"
        raise ParseError(e.line, e.col, f"{e.name} takes {want} argument(s), got {len(e.args)}")


def _num(e, default=None) -> Fraction:
    if e is None:
        return default
    if isinstance(e, tuple) and e[0] == "num":
        return e[1]
    raise ParseError(e.line, e.col, "expected a number")


def _ref(e, table: dict, kind: str):
    if not isinstance(e, Expr) or e.args:
        line, col = (e.line, e.col) if isinstance(e, Expr) else (1, e[2])
        raise ParseError(line, col, f"expected a {kind} name")
    if e.name not in table:
        raise ParseError(e.line, e.col, f"unknown {kind} {e.name!r}")
    return table[e.name]


def _build(pf: ProblemFile, e, n: int) -> CpwlFunction:
    if not isinstance(e, Expr):
        raise ParseError(1, e[2], "expected a builder expression")

    def check_dim(f, what):
        if f.ambient_dim != n:
            raise ParseError(e.line, e.col, f"{what} has dimension {f.ambient_dim}, expected {n}")
        return f

    name = e.name
    try:
        if name == "l1":
            _arity(e, 1, 2)
            a0 = e.args[0]
            if isinstance(a0, Expr) and a0.name == "I" and not a0.args:
                M = RationalMatrix.identity(n)
            else:
                M = _ref(a0, pf.matrices, "matrix")
            g = _num(e.args[1] if len(e.args) > 1 else None, Fraction(1))
            return check_dim(l1(M, g), "l1 matrix")
        if name == "linf_ball_indicator":
            _arity(e, 0, 1)
            r = _num(e.args[0] if e.args else None, Fraction(1))
            return linf_ball_indicator(n, r)
        if name == "nonneg_indicator":
            _arity(e, 0, 0)
            return nonneg_indicator(n)
        if name == "tv":
            _arity(e, 1, 2)
            G = _ref(e.args[0], pf.graphs, "graph")
            g = _num(e.args[1] if len(e.args) > 1 else None, Fraction(1))
            return check_dim(tv(G, g), "graph")
        if name == "max_affine":
            _arity(e, 1, 1)
            k, items = _ref(e.args[0], pf.pieces, "pieces block")
            if not items:
                raise ParseError(e.line, e.col, "pieces block is empty")
            return check_dim(max_affine(items, n=k), "pieces block")
        if name == "indicator":
            _arity(e, 1, 1)
            P = _ref(e.args[0], pf.polyhedra, "polyhedron")
            return check_dim(indicator(P), "polyhedron")
        if name == "scale":
            _arity(e, 2, 2)
            return scaled(_build(pf, e.args[1], n), _num(e.args[0]))
        if name == "sum":
            if not e.args:
                raise ParseError(e.line, e.col, "sum needs at least one argument")
            return cpwl_sum(*(_build(pf, a, n) for a in e.args))
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(e.line, e.col, str(exc)) from None
    raise ParseError(e.line, e.col, f"unknown builder {name!r}")


# emitting -------------------------------------------------------------------------


def _row(values) -> str:
    return " ".join(format_rational(a) for a in values)


def _emit_matrix(name: str, M: RationalMatrix) -> list[str]:
    out = [f"matrix {name} {M.nrows} {M.ncols}"]
    out += ["  " + _row(r) for r in M.rows]
    return out


def emit_function_blocks(f: CpwlFunction) -> tuple[list[str], str]:
    n = f.ambient_dim
    lines: list[str] = []
    parts = []
    for j, t in enumerate(f.terms):
        lines.append(f"pieces T{j} {len(t)} {n}")
        for v, w in t:
            lines.append(f"  {_row(v)} ; {format_rational(w)}".replace("   ;", " ;"))
        parts.append(f"max_affine(T{j})")
    dom = f.domain
    if dom.inequalities or dom.equalities:
        k = len(dom.inequalities) + len(dom.equalities)
        lines.append(f"polyhedron D {k} {n}")
        for a, b in dom.inequalities:
            lines.append(f"  {_row(a)} <= {format_rational(b)}")
        for a, b in dom.equalities:
            lines.append(f"  {_row(a)} = {format_rational(b)}")
        parts.append("indicator(D)")
    return lines, f"sum({', '.join(parts)})"


def emit_problem(inst=None, f: CpwlFunction | None = None, meta: dict | None = None) -> str:
    """Serialize an instance (or just a function) in the generic block form."""
    if inst is not None:
        f = inst.f
    if f is None:
        raise ValueError("nothing to emit")
    lines = [f"version {FORMAT_VERSION}", f"dimension {f.ambient_dim}"]
    if inst is not None:
        lines += _emit_matrix("A", inst.A)
        if inst.m and inst.sigma != RationalMatrix.identity(inst.m):
            lines += _emit_matrix("S", inst.sigma)
    blocks, expr = emit_function_blocks(f)
    lines += blocks
    lines.append(f"regularizer {expr}")
    if inst is not None and inst.m and inst.sigma != RationalMatrix.identity(inst.m):
        lines.append("sigma S")
    for k in sorted(meta or {}):
        lines.append(f"meta {k} {meta[k]}".rstrip())
    return "\n".join(lines) + "\n"


def emit_l0(inst, meta: dict | None = None) -> str:
    lines = [f"version {FORMAT_VERSION}"]
    lines += _emit_matrix("B", inst.B)
    lines.append(f"vector y {len(inst.y)}")
    if inst.y:
        lines.append("  " + _row(inst.y))
    lines.append("l0 B y" + (" nonneg" if inst.nonneg else ""))
    for k in sorted(meta or {}):
        lines.append(f"meta {k} {meta[k]}".rstrip())
    return "\n".join(lines) + "\n"
