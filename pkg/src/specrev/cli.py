"""Command-line front end.

Exit codes: 0 revised or already satisfiable, 1 input or usage error,
2 infeasible, 3 verification failure, 4 oracle ran out of time.

Instance arguments accept a file path or ``fixture:NAME`` for a bundled
example (``specrev fixtures`` lists them).
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import fixtures
from .aamrp import aamrp, verify_graph_outcome, verify_outcome
from .automata import InputError, build_product, is_satisfiable
from .bench import (
    RandomDagParams,
    format_summary,
    gen_random_instance,
    gen_series_merge_dag,
    gen_unbounded_family,
    gen_unbounded_instance,
    mce_to_graph,
    parse_dimacs,
    reduce_3sat_to_mce,
    run_experiment,
    solve_mce_exact,
    summarize,
    write_csv,
)
from .documents import (
    GraphInstance,
    Instance,
    dumps,
    graph_document,
    instance_document,
    load_document,
    load_file,
    outcome_document,
)
from .oracle import OracleRefusal, brute_force_mrp, path_enumeration_oracle
from .revgraph import to_dot

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_VERIFY = 3
EXIT_TIMEOUT = 4


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error code instead of argparse's 2,
    which is reserved here for infeasible instances."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _load(arg: str):
    if arg.startswith("fixture:"):
        name = arg.split(":", 1)[1]
        try:
            return load_document(fixtures.load_raw(name))
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
    return load_file(arg)


def _warn(inst):
    for w in inst.warnings:
        print(f"warning: {w}", file=sys.stderr)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _verify(inst, graph, outcome) -> bool:
    if isinstance(inst, Instance):
        return verify_outcome(inst.fsm, inst.spec, outcome)
    return verify_graph_outcome(graph, outcome)


def cmd_revise(args) -> int:
    inst = _load(args.instance)
    _warn(inst)
    t0 = time.perf_counter()
    graph = inst.revision_graph()
    outcome = aamrp(graph)
    wall = (time.perf_counter() - t0) * 1000
    extra = {}
    if outcome.cost and outcome.cost == len(graph.atoms):
        extra["note"] = "cost equals the whole atom universe"
    verified = None
    if args.verify:
        verified = _verify(inst, graph, outcome)
        extra["verified"] = verified
    doc = outcome_document(outcome, inst, graph, None if args.no_timing else wall, extra)
    text = dumps(doc)
    _write(None, text)
    if args.json:
        _write(args.json, text)
    if args.dot:
        _write(args.dot, to_dot(graph))
    if verified is False:
        print("error: outcome failed verification", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_INFEASIBLE if outcome.status == "infeasible" else EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    _warn(inst)
    graph = inst.revision_graph()
    t0 = time.perf_counter()
    if args.method == "paths":
        try:
            res = path_enumeration_oracle(graph, max_nodes=args.max_nodes)
        except OracleRefusal as exc:
            raise InputError(str(exc)) from None
    else:
        res = brute_force_mrp(graph, budget=args.budget, prune=args.prune)
    wall = (time.perf_counter() - t0) * 1000
    extra = {"subsets_checked": res.subsets_checked} if args.method == "brute" else {}
    if res.status == "timed_out":
        extra["lower_bound"] = res.lower_bound
    verified = None
    if args.verify and res.status != "timed_out":
        verified = _verify(inst, graph, res)
        extra["verified"] = verified
    doc = outcome_document(res, inst, graph, None if args.no_timing else wall, extra)
    _write(None, dumps(doc))
    if args.json:
        _write(args.json, dumps(doc))
    if verified is False:
        return EXIT_VERIFY
    return {"optimal": EXIT_OK, "infeasible": EXIT_INFEASIBLE, "timed_out": EXIT_TIMEOUT}[res.status]


def cmd_check(args) -> int:
    inst = _load(args.instance)
    _warn(inst)
    if isinstance(inst, GraphInstance):
        from .oracle import find_lasso

        ok = find_lasso(inst.graph, 0) is not None
        print("Satisfiable" if ok else "Unsatisfiable")
        print(f"nodes {inst.graph.n_nodes} edges {inst.graph.n_edges} "
              f"enabled_edges {sum(1 for row in inst.graph.adj for _, m in row if m == 0)}")
        return EXIT_OK
    product = build_product(inst.fsm, inst.spec)
    lasso = is_satisfiable(product)
    reachable_finals = _reachable_finals(product)
    print("Satisfiable" if lasso else "Unsatisfiable")
    print(f"product_states {len(product.states)} product_transitions {product.n_transitions} "
          f"reachable_finals {reachable_finals}")
    if lasso and args.witness:
        print("prefix " + " ".join(f"({q},{s})" for q, s in lasso.prefix))
        print("cycle " + " ".join(f"({q},{s})" for q, s in lasso.cycle))
    return EXIT_OK


def _reachable_finals(product) -> int:
    from .automata import _reachable

    seen = _reachable(product.initials, product.succ)
    return sum(1 for v in seen if v in product.finals)


def _parse_sizes(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 2:
        raise InputError("--sizes needs node counts of at least 2, e.g. 3,4,5 or 3-6")
    return out


def cmd_bench(args) -> int:
    try:
        sizes = _parse_sizes(args.sizes)
    except ValueError:
        raise InputError(f"--sizes: cannot parse {args.sizes!r}") from None
    overrides = json.loads(args.params) if args.params else None
    if overrides is not None and not isinstance(overrides, dict):
        raise InputError("--params must be a JSON object")
    try:
        rows = run_experiment(sizes, args.seeds, budget=args.budget, oracle=not args.no_oracle,
                              workers=args.workers, overrides=overrides)
    except (TypeError, ValueError) as exc:
        raise InputError(f"--params: {exc}") from None
    timing = not args.no_timing
    text = write_csv(rows, timing=timing)
    _write(args.out, text)
    if args.out not in (None, "-") or args.summary:
        print(format_summary(summarize(rows), timing=timing), file=sys.stderr if args.out in (None, "-") else sys.stdout, end="")
    bad = [r for r in rows if not r.verified]
    if bad:
        print(f"error: {len(bad)} heuristic outcome(s) failed verification", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_gen(args) -> int:
    params = json.loads(args.params) if args.params else {}
    if not isinstance(params, dict):
        raise InputError("--params must be a JSON object")
    try:
        if args.kind == "random":
            params.setdefault("nodes_per_dag", 3)
            doc = instance_document(*gen_random_instance(RandomDagParams(**params)))
        elif args.kind == "family":
            doc = instance_document(*gen_unbounded_instance(params.get("m", 3)))
        elif args.kind == "family-graph":
            doc = graph_document(gen_unbounded_family(params.get("m", 3)))
        else:
            params.setdefault("stages", 2)
            doc = graph_document(gen_series_merge_dag(**params))
    except (TypeError, ValueError) as exc:
        raise InputError(f"--params: {exc}") from None
    _write(args.out, dumps(doc))
    return EXIT_OK


def cmd_reduce(args) -> int:
    try:
        with open(args.cnf, encoding="utf-8") as fh:
            phi = parse_dimacs(fh.read())
    except OSError as exc:
        raise InputError(f"{args.cnf}: {exc.strerror}") from None
    inst = reduce_3sat_to_mce(phi)
    if args.form == "mce":
        doc = {"mce": {"nodes": inst.nodes, "edges": [list(e) for e in inst.edges],
                       "source": inst.source, "sink": inst.sink,
                       "classes": {k: [[u, v, w] for u, v, w in es] for k, es in inst.classes.items()},
                       "weight_limit": inst.weight_limit}}
    else:
        doc = graph_document(mce_to_graph(inst))
    _write(args.out, dumps(doc))
    if args.solve:
        sol = solve_mce_exact(inst)
        msg = "infeasible" if sol is None else f"weight {sol.weight} classes {' '.join(sol.classes)}"
        sat = sol is not None and sol.weight == phi.num_vars
        print(f"mce {msg}; formula {'satisfiable' if sat else 'unsatisfiable'}",
              file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_export(args) -> int:
    inst = _load(args.instance)
    _warn(inst)
    graph = inst.revision_graph()
    if args.format == "dot":
        _write(args.out, to_dot(graph))
    elif isinstance(inst, Instance):
        _write(args.out, dumps(instance_document(inst.fsm, inst.spec, inst.propositions)))
    else:
        _write(args.out, dumps(graph_document(graph)))
    return EXIT_OK


def cmd_fixtures(args) -> int:
    for name in fixtures.names():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="specrev", description="Minimal revision of unsatisfiable automaton specifications.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("revise", help="run the heuristic and print a revision document")
    r.add_argument("instance")
    r.add_argument("--verify", action="store_true", help="re-check the outcome on the model (exit 3 on failure)")
    r.add_argument("--dot", metavar="OUT", help="also write the revision graph in DOT")
    r.add_argument("--json", metavar="OUT", help="also write the document to a file")
    r.add_argument("--no-timing", action="store_true", help="omit wall-clock fields for byte-stable output")
    r.set_defaults(func=cmd_revise)

    o = sub.add_parser("oracle", help="exact minimal revision by exhaustive search")
    o.add_argument("instance")
    o.add_argument("--budget", type=float, default=60.0, help="seconds before giving up (default 60)")
    o.add_argument("--method", choices=["brute", "paths"], default="brute")
    o.add_argument("--prune", action="store_true", help="skip atoms that cannot lie on any lasso")
    o.add_argument("--max-nodes", type=int, default=60, help="size limit for --method paths")
    o.add_argument("--verify", action="store_true")
    o.add_argument("--json", metavar="OUT")
    o.add_argument("--no-timing", action="store_true")
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("check", help="validate an instance and test satisfiability")
    c.add_argument("instance")
    c.add_argument("--witness", action="store_true", help="print an accepting lasso when one exists")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="random-instance experiment, CSV output")
    b.add_argument("--sizes", default="3", help="nodes per DAG: list and/or ranges, e.g. 3,4 or 3-6")
    b.add_argument("--seeds", type=int, default=20)
    b.add_argument("--budget", type=float, default=60.0, help="oracle seconds per instance")
    b.add_argument("--out", help="CSV path (default stdout)")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--params", help="JSON object of generator overrides")
    b.add_argument("--no-oracle", action="store_true")
    b.add_argument("--summary", action="store_true", help="print the per-size summary table")
    b.add_argument("--no-timing", action="store_true")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen", help="write a generated instance")
    g.add_argument("kind", nargs="?", default="random", choices=["random", "family", "family-graph", "merge"])
    g.add_argument("--params", help='JSON object, e.g. \'{"nodes_per_dag": 4, "seed": 7}\' or \'{"m": 5}\'')
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("reduce", help="3-CNF (DIMACS) to connecting-edge instance")
    d.add_argument("--cnf", required=True)
    d.add_argument("--form", choices=["graph", "mce"], default="graph")
    d.add_argument("--solve", action="store_true", help="also solve exactly and report satisfiability")
    d.add_argument("--out")
    d.set_defaults(func=cmd_reduce)

    e = sub.add_parser("export", help="write the revision graph (DOT) or a normalized document")
    e.add_argument("instance")
    e.add_argument("--format", choices=["dot", "json"], default="dot")
    e.add_argument("--out")
    e.set_defaults(func=cmd_export)

    f = sub.add_parser("fixtures", help="list bundled fixtures")
    f.set_defaults(func=cmd_fixtures)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON argument ({exc.msg})", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
