"""``polywell`` command-line driver.

Exit codes: 0 success / WellPosed, 1 parse, usage or precondition error,
2 IllPosed, 3 HypothesisViolated, 4 budget exceeded, 5 solver failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction

from .budget import BudgetExceeded
from .exact import parse_rational
from .fileformat import ParseError, emit_problem, parse_problem
from .pwl import DualFace, iter_dual_faces
from .reductions import (
    InfeasibleError,
    L0Instance,
    PartitionInstance,
    brute_force_l0,
    brute_force_partition,
    partition_to_instance,
    reduce_l0,
    tv_partition_instance,
)
from .report import Report, shell_quote_vector
from .tvgraph import (
    ct_axis_instance,
    nn_tv_vertices,
    orientation_for_point,
    parse_graph,
    tv_polytope_vertices,
)
from .wellposed import (
    PreconditionError,
    ProblemInstance,
    SolverError,
    Status,
    WitnessConstructionError,
    ill_posedness_number,
    accessibility,
    monte_carlo_wellposedness,
    solve_exact,
    solve_numeric,
    well_posedness,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ILL_POSED = 2
EXIT_HYPOTHESIS = 3
EXIT_BUDGET = 4
EXIT_SOLVER = 5

STATUS_EXIT = {
    Status.WELL_POSED: EXIT_OK,
    Status.ILL_POSED: EXIT_ILL_POSED,
    Status.HYPOTHESIS_VIOLATED: EXIT_HYPOTHESIS,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_vector(text: str) -> tuple[Fraction, ...]:
    parts = [p for p in text.replace(",", " ").split()]
    try:
        return tuple(parse_rational(p) for p in parts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def load_problem(path: str):
    return parse_problem(_read(path))


# report builders ---------------------------------------------------------------------


def _face_section(rep: Report, face: DualFace) -> None:
    rep.add("pattern", str(face.pattern))
    rep.add("dim_cell", face.dim_cell)
    rep.add("dim_subdiff", face.dim_subdiff)
    rep.add("relint_point", face.relint_point)
    g = face.generators
    rep.add("subdiff_summands", [Report().add("points", list(s)) for s in g.summands])
    rep.add("subdiff_rays", list(g.rays))


def check_report(inst: ProblemInstance, path: str = "<file>", budget=None):
    v = well_posedness(inst, budget)
    rep = Report("check")
    rep.add("status", str(v.status))
    rep.add("n", inst.n)
    rep.add("m", inst.m)
    rep.add("rank_A", v.rank_A)
    rep.add("nullity_A", v.nullity_A)
    if v.status is Status.HYPOTHESIS_VIOLATED:
        rep.add("domain_dim", inst.f.domain_dim)
        return rep, v
    rep.add("faces_scanned", v.faces_scanned)
    rep.add("scan_limit", v.scan_limit)
    if v.status is Status.ILL_POSED:
        _face_section(rep.section("offending_face"), v.offending_face)
        rep.add("row_space_witness", v.row_space_witness)
        c = v.certificate
        sec = rep.section("certificate")
        sec.add("b", c.b)
        sec.add("x", c.x)
        sec.add("y", c.y)
        sec.add("direction", c.direction)
        sec.add("verified", c.verify(inst))
        rep.add("replay", [f"polywell solve {path} --exact --b {shell_quote_vector(c.b)}"])
    return rep, v


def diagnose_report(inst: ProblemInstance, budget=None) -> Report:
    rep = Report("diagnose")
    rep.add("n", inst.n)
    rep.add("m", inst.m)
    rep.add("rank_A", inst.rank)
    rep.add("nullity_A", inst.nullity)
    if not inst.f.full_dimensional:
        rep.add("status", str(Status.HYPOTHESIS_VIOLATED))
        rep.add("domain_dim", inst.f.domain_dim)
        return rep
    face = None
    z = None
    for fc in iter_dual_faces(inst.f, budget):
        z = accessibility(inst, fc)
        if z is not None:
            face = fc
            break
    ipn = face.dim_subdiff if face is not None else math.inf
    rep.add("ill_posedness_number", ipn if face is not None else "inf")
    rep.add("status", str(Status.WELL_POSED if ipn >= inst.nullity else Status.ILL_POSED))
    if face is None:
        rep.add("required_rank", 0)
        rep.add("minimal_accessible_face", "none")
        return rep
    rep.add("required_rank", max(0, inst.n - ipn))
    rep.add("rank_condition", f"rank(A) >= {max(0, inst.n - ipn)}, actual {inst.rank}")
    sec = rep.section("minimal_accessible_face")
    _face_section(sec, face)
    sec.add("row_space_witness", z)
    return rep


def solve_report(inst: ProblemInstance, b, numeric: bool, tol: float, budget=None) -> Report:
    rep = Report("solve")
    rep.add("b", b)
    if numeric:
        r = solve_numeric(inst, b, tol=tol)
        rep.add("method", "numeric")
        rep.add("minimizer", tuple(float(a) for a in r.minimizer))
        rep.add("objective", float(r.objective))
        rep.add("cell", str(r.cell))
        rep.add("optimality_residual", float(r.optimality_residual))
        rep.add("iterations", r.iterations)
        return rep
    r = solve_exact(inst, b, budget)
    rep.add("method", "exact")
    rep.add("minimizer", r.minimizer)
    rep.add("objective", r.objective)
    rep.add("cell", str(r.cell))
    rep.add("optimality_residual", r.optimality_residual)
    rep.add("unique", r.unique)
    if not r.unique:
        rep.add("flat_direction", r.flat_direction)
    return rep


def tv_vertices_report(g, nn: bool, budget=None) -> Report:
    rep = Report("tv")
    rep.add("mode", "nn" if nn else "vertices")
    rep.add("nodes", g.node_count)
    rep.add("edges", g.edge_count)
    verts = nn_tv_vertices(g, budget) if nn else tv_polytope_vertices(g, budget)
    rep.add("vertex_count", len(verts))
    items = []
    for p in verts:
        item = Report().add("point", p)
        u = orientation_for_point(g, p)
        item.add("arcs", " ".join(f"{a}->{b}" for a, b in u.arcs()) if u is not None else "none")
        items.append(item)
    rep.add("vertices", items)
    return rep


def tv_ct_report(N: int, z=None) -> tuple[Report, object]:
    cert = ct_axis_instance(N, z)
    rep = Report("tv")
    rep.add("mode", "ct")
    rep.add("N", N)
    rep.add("z", cert.z)
    rep.add("grid", [tuple(row) for row in cert.grid])
    rep.add("point_sum", sum(cert.point, Fraction(0)))
    if cert.orientation is not None:
        rep.add("arcs", [f"{a}->{b}" for a, b in cert.orientation.arcs()])
    else:
        rep.add("arcs", "none")
    rep.add("acyclic", cert.acyclic)
    rep.add("vertex_certified", cert.holds)
    rep.add("rank_A", cert.instance.rank)
    rep.add("required_rank", cert.required_rank)
    rep.add("conclusion", cert.conclusion)
    return rep, cert


def _expected(ill: bool) -> str:
    return str(Status.ILL_POSED if ill else Status.WELL_POSED)


def reduce_report(args) -> tuple[Report, str]:
    rep = Report("reduce")
    if args.l0:
        if args.tv:
            raise UsageError("--tv applies to --partition only")
        l0 = load_problem(args.l0).l0_instance()
        if args.nonneg and not l0.nonneg:
            l0 = L0Instance(l0.B, l0.y, True)
        inst = reduce_l0(l0)
        k = brute_force_l0(l0)
        rep.add("kind", "l0-nonneg" if l0.nonneg else "l0")
        rep.add("l0_minimum", k)
        rep.add("nullity_A", inst.nullity)
        rep.add("expected_ill_posedness_number", k)
        rep.add("expected_check", _expected(k < inst.nullity))
        meta = {"reduction": rep.get("kind"), "l0_minimum": str(k)}
    else:
        try:
            weights = [int(w) for w in args.partition.replace(" ", "").split(",") if w]
        except ValueError:
            raise UsageError("--partition expects comma separated integers") from None
        p = PartitionInstance(weights)
        if args.nonneg and not args.tv:
            raise UsageError("--nonneg with --partition requires --tv")
        inst = tv_partition_instance(p, args.nonneg) if args.tv else partition_to_instance(p)
        exists = brute_force_partition(p)
        kind = "partition-tv" + ("-nonneg" if args.nonneg else "") if args.tv else "partition-l1"
        rep.add("kind", kind)
        rep.add("weights", tuple(Fraction(w) for w in p.weights))
        rep.add("partition_exists", exists)
        rep.add("expected_check", _expected(exists))
        meta = {"reduction": kind, "weights": ",".join(map(str, p.weights))}
    if args.verify:
        v = well_posedness(inst, certify=False)
        rep.add("check", str(v.status))
        if rep.get("kind").startswith("l0"):
            rep.add("ill_posedness_number", ill_posedness_number(inst))
    text = emit_problem(inst, meta=meta)
    out = args.output
    rep.add("output", out)
    rep.add("replay", [f"polywell check {out}" if out != "-" else "polywell check <output>"])
    return rep, text


def montecarlo_report(args) -> Report:
    pf = load_problem(args.file)
    f = pf.function()
    mc = monte_carlo_wellposedness(
        f, args.m, args.trials, args.seed, allow_below_threshold=args.allow_below_threshold
    )
    rep = Report("montecarlo")
    rep.add("n", mc.n)
    rep.add("m", mc.m)
    rep.add("p", mc.p if mc.p != math.inf else "inf")
    rep.add("below_threshold", mc.below_threshold)
    rep.add("trials", mc.trials)
    rep.add("seed", mc.seed)
    rep.add("well_posed", mc.well_posed)
    rep.add("ill_posed", mc.ill_posed)
    rep.add("hypothesis_violated", mc.hypothesis_violated)
    rep.add("fraction", Fraction(mc.well_posed, mc.trials) if mc.trials else "none")
    files = []
    if mc.counterexamples:
        os.makedirs(args.replay_dir, exist_ok=True)
        for t, A in mc.counterexamples:
            path = os.path.join(args.replay_dir, f"montecarlo-seed{mc.seed}-trial{t}.problem")
            meta = {"source": f"montecarlo seed={mc.seed} trial={t} m={mc.m}"}
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(emit_problem(ProblemInstance(A, f), meta=meta))
            files.append(path)
    rep.add("replay_files", files)
    rep.add("replay", [f"polywell check {p}" for p in files])
    return rep


# driver ------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--emit-json", metavar="PATH", help="also write the report as JSON to PATH")

    p = _Parser(prog="polywell", description="Well-posedness of piecewise-linear regularized least squares.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="decide well-posedness and certify failures")
    c.add_argument("file")

    d = sub.add_parser("diagnose", parents=[common], help="ill-posedness number and rank condition")
    d.add_argument("file")

    s = sub.add_parser("solve", parents=[common], help="minimize for one right-hand side")
    s.add_argument("file")
    s.add_argument("--b", default="", help="right-hand side, comma separated rationals")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="exact rational solver (default)")
    g.add_argument("--numeric", action="store_true", help="floating point cross-check")
    s.add_argument("--tol", type=float, default=1e-6)

    t = sub.add_parser("tv", parents=[common], help="TV polytope vertices and the CT certificate")
    t.add_argument("graphfile", nargs="?")
    g = t.add_mutually_exclusive_group(required=True)
    g.add_argument("--vertices", action="store_true")
    g.add_argument("--nn", action="store_true")
    g.add_argument("--ct", type=int, metavar="N")
    t.add_argument("--z", help="CT residual (2N comma separated rationals)")
    t.add_argument("--emit-problem", metavar="PATH", help="write the CT instance as a problem file")

    r = sub.add_parser("reduce", parents=[common], help="encode l0 or partition instances")
    g = r.add_mutually_exclusive_group(required=True)
    g.add_argument("--l0", metavar="FILE")
    g.add_argument("--partition", metavar="W1,W2,...")
    r.add_argument("--tv", action="store_true", help="path-graph TV encoding of partition")
    r.add_argument("--nonneg", action="store_true")
    r.add_argument("--verify", action="store_true", help="also run the check on the emitted instance")
    r.add_argument("-o", "--output", default="-", help="problem file to write ('-' = stdout)")

    mc = sub.add_parser("montecarlo", parents=[common], help="random-matrix well-posedness frequency")
    mc.add_argument("file")
    mc.add_argument("--m", type=int, required=True)
    mc.add_argument("--trials", type=int, required=True)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--replay-dir", default="polywell-replay")
    mc.add_argument("--allow-below-threshold", action="store_true")
    return p


def _emit(rep: Report, args, stream=None) -> None:
    (stream or sys.stdout).write(rep.text())
    if getattr(args, "emit_json", None):
        with open(args.emit_json, "w", encoding="utf-8") as fh:
            fh.write(rep.json())


def _run(args) -> int:
    cmd = args.command
    if cmd == "check":
        rep, v = check_report(load_problem(args.file).instance(), args.file)
        _emit(rep, args)
        return STATUS_EXIT[v.status]
    if cmd == "diagnose":
        _emit(diagnose_report(load_problem(args.file).instance()), args)
        return EXIT_OK
    if cmd == "solve":
        inst = load_problem(args.file).instance()
        b = parse_vector(args.b)
        if len(b) != inst.m:
            raise UsageError(f"--b needs {inst.m} entries, got {len(b)}")
        _emit(solve_report(inst, b, args.numeric, args.tol), args)
        return EXIT_OK
    if cmd == "tv":
        if args.ct is not None:
            z = parse_vector(args.z) if args.z else None
            rep, cert = tv_ct_report(args.ct, z)
            if args.emit_problem:
                with open(args.emit_problem, "w", encoding="utf-8") as fh:
                    fh.write(emit_problem(cert.instance, meta={"source": f"ct N={args.ct}"}))
            _emit(rep, args)
            return EXIT_OK
        if not args.graphfile:
            raise UsageError("graph file required for --vertices/--nn")
        try:
            g = parse_graph(_read(args.graphfile))
        except ValueError as exc:
            raise UsageError(f"{args.graphfile}: {exc}") from None
        _emit(tv_vertices_report(g, args.nn), args)
        return EXIT_OK
    if cmd == "reduce":
        rep, text = reduce_report(args)
        if args.output == "-":
            _emit(rep, args, sys.stderr)
            sys.stdout.write(text)
        else:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
            _emit(rep, args)
        return EXIT_OK
    if cmd == "montecarlo":
        _emit(montecarlo_report(args), args)
        return EXIT_OK
    raise UsageError(f"unknown command {cmd}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except ParseError as exc:
        where = getattr(args, "file", None) or getattr(args, "l0", None) or "input"
        print(f"polywell: {where}:{exc.line}:{exc.col}: {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"polywell: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SolverError, WitnessConstructionError) as exc:
        print(f"polywell: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, PreconditionError, InfeasibleError, ValueError) as exc:
        print(f"polywell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
