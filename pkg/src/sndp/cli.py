"""Command-line entry point: gen, solve, verify, reduce, bench, explore.

Exit codes: 0 success, 1 infeasible instance or failed check (a dump file
is written), 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from . import connectivity as conn
from .certify import certify_iteration
from .corpus import ec_corpus
from .instances import (
    EcInstance, ElemInstance, GenerationError, HyperInstance, SchemaError, format_rational, generate,
    instance_to_dict, parse_instance, parse_rational, serialize_instance,
)
from .oracle import explore_problem1
from .reductions import (
    elem_solution_cost, elem_to_hyper, hyper_to_graph_cover, hyper_to_nw_elem,
    nw_elem_to_ew_elem,
)
from .rounding import InfeasibleInstance, TheoremViolated, solve

log = logging.getLogger("sndp")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _approx(q: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 12
        return str(round(Decimal(q.numerator) / Decimal(q.denominator), 6))


def _load(path):
    try:
        return parse_instance(Path(path).read_bytes())
    except OSError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    if args.corpus:
        out = Path(args.corpus)
        out.mkdir(parents=True, exist_ok=True)
        for name, inst in ec_corpus():
            (out / f"{name}.json").write_text(serialize_instance(inst))
        return EXIT_OK
    if args.kind is None or args.n is None or args.m is None:
        raise UsageError("gen needs --kind, --n and --m (or --corpus DIR)")
    inst = generate(args.kind, n=args.n, m=args.m, rmax=args.rmax, d=args.d,
                    cost_range=(args.cost_lo, args.cost_hi), pairs=args.pairs,
                    terminals=args.terminals, seed=args.seed)
    _write(args.out, serialize_instance(inst))
    return EXIT_OK


# ---------------------------------------------------------------- solve

def _solution_cost(inst, edges):
    if isinstance(inst, ElemInstance):
        return elem_solution_cost(inst, edges)
    ground = inst.hypergraph if isinstance(inst, HyperInstance) else inst.graph
    return sum((ground.cost(e) for e in edges), Fraction(0))


def _feasible(inst, edges) -> bool:
    for (u, v), r in inst.requirements.items():
        if isinstance(inst, ElemInstance):
            have = conn.element_connectivity(inst, edges, u, v)
        elif isinstance(inst, HyperInstance):
            have = conn.hyperedge_connectivity(inst.hypergraph, edges, u, v)
        else:
            have = conn.edge_connectivity(inst.graph, edges, u, v)
        if have < r:
            return False
    return True


def run_instance(path, check_invariants=False, dump_dir=None) -> dict:
    """Solve one instance file and return its RunReport plus solution report."""
    inst = _load(path)
    start = time.perf_counter()
    checks: dict = {}
    dumps: list = []
    report: dict = {"instance": str(path), "variant": inst.kind}

    def fail(name, payload):
        checks[name] = "fail"
        if dump_dir is not None:
            target = Path(dump_dir) / f"{Path(path).stem}.{name}.dump.json"
            target.write_text(_dump_json({"instance": instance_to_dict(inst), **payload}))
            dumps.append(str(target))

    try:
        res = solve(inst)
    except InfeasibleInstance as exc:
        report.update(status="infeasible", error=str(exc),
                      wall_time_ms=int(1000 * (time.perf_counter() - start)))
        fail("feasible_instance", {"error": str(exc)})
        report.update(checks=checks, dumps=dumps)
        return report
    except TheoremViolated as exc:
        fail("half_edge", {"error": str(exc), "dump": exc.dump})
        report.update(status="check-failure", error=str(exc), checks=checks, dumps=dumps)
        return report

    report.update(res.to_report())
    ratio = res.cost / res.lower_bound if res.lower_bound else None
    report["ratio"] = None if ratio is None else format_rational(ratio)
    report["ratio_decimal_approx"] = None if ratio is None else _approx(ratio)
    checks["feasibility"] = "pass" if _feasible(inst, res.edges) else "fail"
    if res.guarantee.path == "exact-2":
        checks["two_approx"] = "pass" if res.cost <= 2 * res.lower_bound else "fail"
    if check_invariants:
        certs = []
        for it in res.trace.iterations:
            cert = certify_iteration(it.vertex, it.requirement, res.ground)
            certs.append(cert)
        checks["lp_vertex"] = "pass" if all(c.vertex_ok for c in certs) else "fail"
        checks["half_edge"] = "pass" if all(c.half_edge_max >= Fraction(1, 2) for c in certs) \
            else "fail"
        laminar = [c for c in certs if c.laminar_size is not None]
        if laminar:
            checks["laminar"] = "pass" if all(c.ok for c in certs) else "fail"
        else:
            checks["laminar"] = "skipped"
        if checks["lp_vertex"] == "fail" or checks["laminar"] == "fail":
            fail("certification", {"certificates": [c.to_dict() for c in certs]})
    for name, state in checks.items():
        if state == "fail" and not any(name in d for d in dumps):
            fail(name, {"report": res.to_report()})
    report.update(status="ok" if "fail" not in checks.values() else "check-failure",
                  wall_time_ms=int(1000 * (time.perf_counter() - start)),
                  checks=checks, dumps=dumps)
    return report


def cmd_solve(args) -> int:
    dump_dir = args.dump_dir or (Path(args.report).parent if args.report else Path("."))
    report = run_instance(args.input, args.check_invariants, dump_dir)
    _write(args.report, _dump_json(report))
    return EXIT_OK if report["status"] == "ok" else EXIT_FAIL


# ---------------------------------------------------------------- verify

def verify_instance(inst, solution: dict | None = None) -> dict:
    res = solve(inst)
    certs = [certify_iteration(it.vertex, it.requirement, res.ground)
             for it in res.trace.iterations]
    failing = []

    def all_of(values):
        values = [v for v in values if v is not None]
        return all(values) if values else None

    out = {
        "vertex_ok": all(c.vertex_ok for c in certs),
        "half_edge": {
            "max": format_rational(min((c.half_edge_max for c in certs), default=Fraction(1))),
            "ok": all(c.half_edge_max >= Fraction(1, 2) for c in certs),
        },
        "laminar": {"size": sum(c.laminar_size or 0 for c in certs),
                    "rank": sum(c.laminar_rank or 0 for c in certs)},
        "identities": {"eq3": all_of(c.eq3 for c in certs),
                       "beta": all_of(c.beta for c in certs),
                       "alpha_root": all_of(c.alpha_root for c in certs)},
        "unique_child": all_of(c.unique_child for c in certs),
        "claim_table": [row for c in certs for row in c.claim_table],
        "iterations": [c.to_dict() for c in certs],
    }
    for c in certs:
        failing += c.failures
    if not out["vertex_ok"]:
        failing.append("vertex_ok")
    if not out["half_edge"]["ok"]:
        failing.append("half_edge")

    if solution is not None:
        try:
            edges = frozenset(int(e) for e in solution["edges"])
            claimed = parse_rational(solution["cost"], "cost")
        except (KeyError, TypeError, ValueError, SchemaError) as exc:
            raise UsageError(f"bad solution file: {exc}") from None
        m = inst.hypergraph.num_edges if isinstance(inst, HyperInstance) else inst.graph.num_edges
        checks = {}
        if any(not 0 <= e < m for e in edges):
            checks["solution.edge_ids"] = False
        else:
            checks["solution.feasible"] = _feasible(inst, edges)
            actual = _solution_cost(inst, edges)
            checks["solution.cost"] = actual == claimed
            if res.guarantee.path == "exact-2":
                checks["solution.two_approx"] = actual <= 2 * res.lower_bound
        out["solution"] = checks
        failing += [name for name, ok in checks.items() if not ok]
    out["failing"] = failing
    return out


def cmd_verify(args) -> int:
    inst = _load(args.input)
    solution = None
    if args.solution:
        try:
            solution = json.loads(Path(args.solution).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read solution: {exc}") from None
    try:
        out = verify_instance(inst, solution)
    except InfeasibleInstance as exc:
        out = {"failing": ["feasible_instance"], "error": str(exc)}
    _write(args.out, _dump_json(out))
    for name in out["failing"]:
        print(f"FAIL {name}", file=sys.stderr)
    return EXIT_OK if not out["failing"] else EXIT_FAIL


# ---------------------------------------------------------------- reduce

def cmd_reduce(args) -> int:
    inst = _load(args.input)
    target = args.to
    if target == "hyper" and isinstance(inst, ElemInstance):
        h, reqs, rmap = elem_to_hyper(inst)
        doc = instance_to_dict(HyperInstance(h, reqs))
    elif target == "ew-elem" and isinstance(inst, ElemInstance):
        out, rmap, loss = nw_elem_to_ew_elem(inst)
        doc = instance_to_dict(out)
        rmap = rmap.to_dict() | {"loss_factor": format_rational(loss)}
    elif target == "nw-elem" and isinstance(inst, HyperInstance):
        out, rmap = hyper_to_nw_elem(inst.hypergraph, inst.requirements)
        doc = instance_to_dict(out)
    elif target == "graph-cover" and isinstance(inst, HyperInstance):
        graph, _, rmap = hyper_to_graph_cover(inst.hypergraph, inst.requirements)
        # g is not pairwise: ship the graph, the base requirements and the fixed hyperedges
        doc = instance_to_dict(EcInstance(graph, inst.requirements))
        doc["kind"] = "graph-cover"
        doc["fixed"] = [sorted(inst.hypergraph.hyperedges[i].vertices) for i in rmap.preincluded]
    else:
        raise UsageError(f"cannot reduce a {inst.kind} instance to {target}")
    if not isinstance(rmap, dict):
        rmap = rmap.to_dict()
    _write(args.out, _dump_json(doc))
    map_path = args.map or (None if args.out in (None, "-") else f"{args.out}.map.json")
    if map_path:
        Path(map_path).write_text(_dump_json(rmap))
    return EXIT_OK


# ---------------------------------------------------------------- bench

def _bench_one(job):
    path, check, dump_dir = job
    try:
        return run_instance(path, check, dump_dir)
    except SchemaError as exc:
        return {"instance": str(path), "status": "schema-error", "error": str(exc),
                "checks": {}, "dumps": []}


def cmd_bench(args) -> int:
    files = sorted(Path(args.dir).glob("*.json"))
    if not files:
        raise UsageError(f"no *.json instances in {args.dir}")
    dump_dir = args.dump_dir or args.dir
    jobs = [(f, args.check_invariants, dump_dir) for f in files]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            reports = list(pool.map(_bench_one, jobs))
    else:
        reports = [_bench_one(j) for j in jobs]
    reports.sort(key=lambda r: r["instance"])
    lines = [f"{'instance':<28} {'variant':<6} {'cost':>8} {'lp':>8} {'ratio':>8}  status"]
    worst = Fraction(0)
    for r in reports:
        ratio = r.get("ratio")
        if ratio is not None:
            worst = max(worst, Fraction(ratio))
        lines.append(f"{Path(r['instance']).name:<28} {r.get('variant', '?'):<6} "
                     f"{r.get('cost', '-')!s:>8} {r.get('lp_lower_bound', '-')!s:>8} "
                     f"{ratio if ratio is not None else '-'!s:>8}  {r['status']}")
    bad = [r for r in reports if r["status"] != "ok"]
    lines.append(f"{len(reports)} instances, {len(bad)} not ok, worst ratio "
                 f"{format_rational(worst)} (~{_approx(worst)})")
    print("\n".join(lines))
    if args.out:
        Path(args.out).write_text(_dump_json({
            "instances": reports, "worst_ratio": format_rational(worst),
            "failures": [r["instance"] for r in bad]}))
    return EXIT_OK if not bad else EXIT_FAIL


# ---------------------------------------------------------------- explore

def cmd_explore(args) -> int:
    summary = explore_problem1(args.d, args.trials, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, cand in enumerate(summary["candidates"]):
        (out / f"candidate-{i:03d}.json").write_text(_dump_json(cand))
    (out / "summary.json").write_text(_dump_json(summary))
    print(f"d={args.d}: {summary['vertices']} fractional vertices, min max-coordinate "
          f"{summary['min_max_coordinate']}, {len(summary['candidates'])} below 1/d")
    return EXIT_OK


# ---------------------------------------------------------------- entry

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sndp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a seeded instance")
    g.add_argument("--kind", choices=["ec", "elem", "hyper"])
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int, help="edge (hyperedge) count")
    g.add_argument("--rmax", type=int, default=1)
    g.add_argument("--d", type=int, default=3, help="max hyperedge size")
    g.add_argument("--cost-lo", type=int, default=1)
    g.add_argument("--cost-hi", type=int, default=10)
    g.add_argument("--pairs", type=int, help="number of requirement pairs (default n)")
    g.add_argument("--terminals", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output file (default stdout)")
    g.add_argument("--corpus", metavar="DIR", help="write the fixed EC corpus into DIR")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--input", required=True)
    s.add_argument("--report", help="report file (default stdout)")
    s.add_argument("--check-invariants", action="store_true")
    s.add_argument("--dump-dir")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="certify the LP vertices and optionally a solution")
    v.add_argument("--input", required=True)
    v.add_argument("--solution", help="solution report to check")
    v.add_argument("--out", help="certification file (default stdout)")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reduce", help="apply one reduction")
    r.add_argument("--input", required=True)
    r.add_argument("--to", required=True, choices=["hyper", "graph-cover", "nw-elem", "ew-elem"])
    r.add_argument("--out", help="transformed instance (default stdout)")
    r.add_argument("--map", help="sidecar map file (default OUT.map.json)")
    r.set_defaults(func=cmd_reduce)

    b = sub.add_parser("bench", help="solve every instance in a directory")
    b.add_argument("--dir", required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--check-invariants", action="store_true")
    b.add_argument("--dump-dir")
    b.add_argument("--out", help="aggregate JSON report")
    b.set_defaults(func=cmd_bench)

    e = sub.add_parser("explore", help="search for vertices below 1/d")
    e.add_argument("--d", type=int, required=True)
    e.add_argument("--trials", type=int, default=200)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", required=True, help="output directory")
    e.set_defaults(func=cmd_explore)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, SchemaError, GenerationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
