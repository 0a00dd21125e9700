"""Instance generators and the heuristic-versus-oracle experiment harness.

Generators:

* random environment/specification DAG pairs with self-loops on leaves;
* the chained-diamond family on which the heuristic's ratio grows with m;
* single divergence/merge DAGs, the class with a factor-2 guarantee;
* the 3-CNF to minimal-connecting-edge gadget reduction.

Every generator is a pure function of its arguments (seeds included).
"""
from __future__ import annotations

import csv
import io
import itertools
import random
import statistics
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .aamrp import aamrp, verify_outcome
from .automata import Fsm, InputError, SpecAutomaton
from .oracle import brute_force_mrp
from .revgraph import RevisionGraph, build_revision_graph

__all__ = [
    "RandomDagParams",
    "gen_random_instance",
    "gen_unbounded_family",
    "gen_unbounded_instance",
    "gen_series_merge_dag",
    "CnfFormula",
    "parse_dimacs",
    "random_3cnf",
    "brute_force_sat",
    "MceInstance",
    "reduce_3sat_to_mce",
    "solve_mce_exact",
    "mce_to_graph",
    "BenchRow",
    "run_cell",
    "run_experiment",
    "write_csv",
    "summarize",
    "format_summary",
    "CSV_HEADER",
]


# ---------------------------------------------------------------------------
# random DAG instances

@dataclass(frozen=True)
class RandomDagParams:
    """Knobs for :func:`gen_random_instance`.

    Edge law: node ``i > 0`` first gets one edge from a uniformly chosen
    earlier node (so everything is reachable from node 0); further forward
    edges ``i < j`` are then drawn uniformly without replacement until the
    DAG has ``round(edge_factor * n)`` edges or is complete.  Nodes left
    without successors get a self-loop.
    """

    nodes_per_dag: int
    edge_factor: float = 2.5
    final_fraction: float = 0.2
    ap_count: int | None = None  # defaults to 4 * nodes_per_dag
    seed: int = 0
    label_prob: float = 0.5
    max_clauses: int = 2
    max_literals: int = 3
    negation_prob: float = 0.3

    def __post_init__(self):
        if self.nodes_per_dag < 2:
            raise ValueError("nodes_per_dag must be at least 2 (node 0 is initial, a final must differ)")
        if not 0.0 <= self.final_fraction <= 1.0:
            raise ValueError("final_fraction must lie in [0, 1]")
        if self.edge_factor < 0:
            raise ValueError("edge_factor must be non-negative")
        if self.ap_count is not None and self.ap_count < 1:
            raise ValueError("ap_count must be positive")
        if self.max_clauses < 1 or self.max_literals < 1:
            raise ValueError("max_clauses and max_literals must be positive")

    @property
    def aps(self) -> int:
        return self.ap_count if self.ap_count is not None else 4 * self.nodes_per_dag


def _random_dag(n: int, edge_factor: float, rng: random.Random) -> list[tuple[int, int]]:
    edges = {(rng.randrange(i), i) for i in range(1, n)}
    target = min(round(edge_factor * n), n * (n - 1) // 2)
    spare = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in edges]
    rng.shuffle(spare)
    while len(edges) < target and spare:
        edges.add(spare.pop())
    return sorted(edges)


def _random_guard(props: list[str], p: RandomDagParams, rng: random.Random) -> list[list[str]]:
    clauses = []
    for _ in range(rng.randint(1, p.max_clauses)):
        width = rng.randint(1, min(p.max_literals, len(props)))
        picked = rng.sample(props, width)
        clauses.append([("!" if rng.random() < p.negation_prob else "") + a for a in picked])
    return clauses


def gen_random_instance(params: RandomDagParams) -> tuple[Fsm, SpecAutomaton]:
    """Random environment DAG labeled with proposition subsets, paired with
    a random specification DAG whose transitions carry DNF guards."""
    p = params
    n = p.nodes_per_dag
    rng = random.Random(f"dag/{n}/{p.seed}")
    props = [f"p{i}" for i in range(p.aps)]

    env_edges = _random_dag(n, p.edge_factor, rng)
    states = [f"q{i}" for i in range(n)]
    has_out = {u for u, _ in env_edges}
    fsm_edges = [(states[u], states[v]) for u, v in env_edges]
    fsm_edges += [(states[i], states[i]) for i in range(n) if i not in has_out]
    labels = {q: [a for a in props if rng.random() < p.label_prob] for q in states}
    fsm = Fsm(states, [states[0]], fsm_edges, labels)

    spec_edges = _random_dag(n, p.edge_factor, rng)
    sstates = [f"s{i}" for i in range(n)]
    has_out = {u for u, _ in spec_edges}
    leaves = [i for i in range(n) if i not in has_out]
    transitions = [(sstates[u], sstates[v], _random_guard(props, p, rng)) for u, v in spec_edges]
    transitions += [(sstates[i], sstates[i], _random_guard(props, p, rng)) for i in leaves]
    k = max(1, round(p.final_fraction * n))
    first = rng.choice([i for i in leaves if i != 0])
    rest = [i for i in range(1, n) if i != first]
    finals = sorted([first] + rng.sample(rest, min(k - 1, len(rest))))
    spec = SpecAutomaton.from_raw(sstates, sstates[0], [sstates[i] for i in finals], transitions)
    return fsm, spec


# ---------------------------------------------------------------------------
# chained-diamond family (heuristic ratio grows with m)

def _family_atoms(m: int) -> list[str]:
    return ["p0"] + [f"p{i}" for i in range(1, m + 1)] + ["pstar", "pclub"]


def gen_unbounded_family(m: int) -> RevisionGraph:
    """m chained diamonds.  From junction v_i the upper branch costs
    {pstar, pclub}, the lower one {p_i}; both rejoin at the next junction
    through an edge costing {p0}.  The final v_f loops on {p0}."""
    if m < 1:
        raise ValueError("m must be at least 1")
    junction = [f"v{i}" for i in range(1, m + 1)] + ["vf"]
    nodes, edges = [], []
    for i in range(1, m + 1):
        up, low = f"v{i}'", f"v{i}''"
        nodes += [junction[i - 1], up, low]
        edges += [
            (junction[i - 1], up, {"pstar", "pclub"}),
            (junction[i - 1], low, {f"p{i}"}),
            (up, junction[i], {"p0"}),
            (low, junction[i], {"p0"}),
        ]
    nodes.append("vf")
    edges.append(("vf", "vf", {"p0"}))
    return RevisionGraph.from_edges(nodes, edges, ["v1"], ["vf"], atoms=_family_atoms(m))


def gen_unbounded_instance(m: int) -> tuple[Fsm, SpecAutomaton]:
    """The same family as an environment plus a one-clause specification.

    The specification moves from its initial state to an accepting state on
    ``true`` and then loops there on the conjunction of every family
    proposition, so each environment state's missing propositions become
    the label of the edges entering it.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    every = _family_atoms(m)
    full = set(every)
    states = ["v0"]
    edges = [("v0", "v1")]
    labels = {"v0": [], "v1": sorted(full)}
    for i in range(1, m + 1):
        here = f"v{i}"
        nxt = f"v{i + 1}" if i < m else "vf"
        up, low = f"v{i}u", f"v{i}l"
        states += [here, up, low]
        edges += [(here, up), (here, low), (up, nxt), (low, nxt)]
        labels[up] = sorted(full - {"pstar", "pclub"})
        labels[low] = sorted(full - {f"p{i}"})
        labels[nxt] = sorted(full - {"p0"})
    states.append("vf")
    edges.append(("vf", "vf"))
    fsm = Fsm(states, ["v0"], edges, labels)
    spec = SpecAutomaton.from_raw(["s0", "s"], "s0", ["s"],
                                  [("s0", "s", "true"), ("s", "s", [every])])
    return fsm, spec


# ---------------------------------------------------------------------------
# single divergence / merge DAGs

def gen_series_merge_dag(stages: int, label_width: int = 2, seed: int = 0,
                         branches: int = 2, pool: int | None = None,
                         lead: int | None = None, tail: int | None = None) -> RevisionGraph:
    """Planar DAG whose paths all split at one node and merge at one node.

    Layout: a lead chain from the source to the split node, ``branches``
    disjoint chains of ``stages`` edges each from the split node to the
    merge node, and a tail chain to the sink, which carries an empty
    self-loop.  Every edge label is a random subset (0 to ``label_width``
    atoms) of a shared pool, so branches overlap with each other and with
    the lead and tail.
    """
    if stages < 1 or branches < 1:
        raise ValueError("stages and branches must be at least 1")
    rng = random.Random(f"merge/{stages}/{label_width}/{branches}/{seed}")
    pool = pool if pool is not None else 2 * label_width + 2
    atoms = [f"a{i}" for i in range(pool)]
    lead = lead if lead is not None else rng.randint(0, 2)
    tail = tail if tail is not None else rng.randint(0, 2)

    def label():
        return set(rng.sample(atoms, rng.randint(0, min(label_width, pool))))

    nodes = ["src"] + [f"l{i}" for i in range(1, lead + 1)]
    edges = [(nodes[i], nodes[i + 1], label()) for i in range(lead)]
    split = nodes[-1]
    for b in range(branches):
        prev = split
        for k in range(1, stages):
            cur = f"b{b}_{k}"
            nodes.append(cur)
            edges.append((prev, cur, label()))
            prev = cur
        edges.append((prev, "merge", label()))
    nodes.append("merge")
    prev = "merge"
    for i in range(1, tail + 1):
        cur = f"t{i}"
        nodes.append(cur)
        edges.append((prev, cur, label()))
        prev = cur
    edges.append((prev, prev, set()))
    return RevisionGraph.from_edges(nodes, edges, ["src"], [prev], atoms=atoms)


# ---------------------------------------------------------------------------
# 3-CNF and the connecting-edge reduction

@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise InputError("a formula needs at least one variable")
        for c in self.clauses:
            if len(c) != 3:
                raise InputError(f"clause {list(c)} does not have exactly 3 literals")
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise InputError(f"literal {lit} out of range 1..{self.num_vars}")

    def satisfied_by(self, assignment) -> bool:
        """``assignment[i]`` is the value of variable ``i + 1``."""
        return all(any((lit > 0) == assignment[abs(lit) - 1] for lit in c) for c in self.clauses)

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> CnfFormula:
    """Read DIMACS CNF: ``c`` comment lines, a ``p cnf V C`` header, then
    signed integers with each clause closed by ``0``."""
    header = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise InputError(f"line {lineno}: bad header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise InputError(f"line {lineno}: bad header {line!r}") from None
            continue
        if header is None:
            raise InputError(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise InputError(f"line {lineno}: not an integer: {tok!r}") from None
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if header is None:
        raise InputError("missing 'p cnf' header")
    if current:
        clauses.append(tuple(current))
    if len(clauses) != header[1]:
        raise InputError(f"header declares {header[1]} clauses, found {len(clauses)}")
    return CnfFormula(header[0], tuple(clauses))


def random_3cnf(num_vars: int, num_clauses: int, rng: random.Random) -> CnfFormula:
    clauses = []
    for _ in range(num_clauses):
        clauses.append(tuple(rng.choice((1, -1)) * rng.randint(1, num_vars) for _ in range(3)))
    return CnfFormula(num_vars, tuple(clauses))


def brute_force_sat(phi: CnfFormula):
    """First satisfying assignment in binary counting order, or None."""
    for bits in itertools.product((False, True), repeat=phi.num_vars):
        if phi.satisfied_by(bits):
            return bits
    return None


@dataclass
class MceInstance:
    """Minimal connecting edge instance.

    ``classes`` maps a class name to its candidate edges ``(u, v, weight)``;
    choosing any edge of a class adds the whole class.
    """

    nodes: list[str]
    edges: list[tuple[str, str]]
    source: str
    sink: str
    classes: dict[str, list[tuple[str, str, int]]]
    weight_limit: int
    gadget_nodes: int = 0

    def class_weight(self, name: str) -> int:
        return sum(w for _, _, w in self.classes[name])


def reduce_3sat_to_mce(phi: CnfFormula) -> MceInstance:
    """Variable gadgets chained entry to exit, then clause gadgets chained
    the same way.  Class P_i holds the true-branch edge of x_i (weight 1)
    and every clause edge for a positive occurrence of x_i (weight 0);
    N_i is the same for the false branch and negative occurrences."""
    n, m = phi.num_vars, len(phi.clauses)
    if m == 0:
        raise InputError("formula has no clauses")
    nodes: list[str] = []
    edges: list[tuple[str, str]] = []
    classes: dict[str, list[tuple[str, str, int]]] = {}
    for i in range(1, n + 1):
        u, ut, vt, uf, vf, v = (f"u{i}", f"ut{i}", f"vt{i}", f"uf{i}", f"vf{i}", f"v{i}")
        nodes += [u, ut, vt, uf, vf, v]
        edges += [(u, ut), (u, uf), (vt, v), (vf, v)]
        if i < n:
            edges.append((v, f"u{i + 1}"))
        classes[f"P{i}"] = [(ut, vt, 1)]
        classes[f"N{i}"] = [(uf, vf, 1)]
    edges.append((f"v{n}", "a1"))
    for j, clause in enumerate(phi.clauses, 1):
        a, b = f"a{j}", f"b{j}"
        nodes += [a, b]
        for k, lit in enumerate(clause, 1):
            ak, bk = f"a{j}_{k}", f"b{j}_{k}"
            nodes += [ak, bk]
            edges += [(a, ak), (bk, b)]
            name = ("P" if lit > 0 else "N") + str(abs(lit))
            classes[name].append((ak, bk, 0))
        if j < m:
            edges.append((b, f"a{j + 1}"))
    return MceInstance(nodes, edges, "u1", f"b{m}", classes, n, gadget_nodes=6 * n + 8 * m)


def _connected(nodes, edges, source, sink) -> bool:
    succ: dict[str, list[str]] = {v: [] for v in nodes}
    for u, v in edges:
        succ[u].append(v)
    seen = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if u == sink:
            return True
        for v in succ[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return False


@dataclass
class MceSolution:
    weight: int
    classes: tuple[str, ...]


def solve_mce_exact(inst: MceInstance, max_classes: int = 20) -> MceSolution | None:
    """Cheapest union of whole classes connecting source to sink, or None.

    Subsets are tried by total weight, then size, then name order.
    """
    names = sorted(inst.classes, key=_class_key)
    if len(names) > max_classes:
        raise InputError(f"{len(names)} classes exceeds the exact-solver limit of {max_classes}")
    weight = {c: inst.class_weight(c) for c in names}
    subsets = []
    for r in range(len(names) + 1):
        for combo in itertools.combinations(names, r):
            subsets.append((sum(weight[c] for c in combo), r, combo))
    subsets.sort(key=lambda t: (t[0], t[1]))
    for w, _, combo in subsets:
        added = [(u, v) for c in combo for u, v, _ in inst.classes[c]]
        if _connected(inst.nodes, inst.edges + added, inst.source, inst.sink):
            return MceSolution(w, combo)
    return None


def _class_key(name: str):
    return (int(name[1:]), name[0] != "P")


def mce_to_graph(inst: MceInstance) -> RevisionGraph:
    """Revision-graph form: one atom per class, fixed edges unlabeled, and an
    empty self-loop on the sink so a connecting path becomes a lasso.
    Each class carries total weight 1 in reduced instances, so revision
    size equals MCE weight."""
    atoms = sorted(inst.classes, key=_class_key)
    edges = [(u, v, set()) for u, v in inst.edges]
    for name in atoms:
        edges += [(u, v, {name}) for u, v, _ in inst.classes[name]]
    edges.append((inst.sink, inst.sink, set()))
    return RevisionGraph.from_edges(inst.nodes, edges, [inst.source], [inst.sink], atoms=atoms)


# ---------------------------------------------------------------------------
# experiment harness

CSV_HEADER = ["size", "seed", "nodes", "edges", "atoms", "aamrp_cost", "aamrp_ms",
              "oracle_cost", "oracle_ms", "oracle_status", "ratio"]


@dataclass
class BenchRow:
    size: int
    seed: int
    nodes: int
    edges: int
    atoms: int
    aamrp_cost: int | None
    aamrp_ms: float
    oracle_cost: int | None
    oracle_ms: float | None
    oracle_status: str
    ratio: float | None
    aamrp_status: str = ""
    verified: bool = True

    def csv_values(self, timing: bool = True) -> list[str]:
        def num(x):
            return "" if x is None else str(x)

        def ms(x):
            return "" if x is None or not timing else f"{x:.3f}"

        return [num(self.size), num(self.seed), num(self.nodes), num(self.edges), num(self.atoms),
                num(self.aamrp_cost), ms(self.aamrp_ms), num(self.oracle_cost), ms(self.oracle_ms),
                self.oracle_status, "" if self.ratio is None else f"{self.ratio:.6g}"]


def _ratio(a: int | None, o: int | None) -> float | None:
    if a is None or o is None:
        return None
    if o == 0:
        return 1.0 if a == 0 else float("inf")
    return a / o


def run_cell(size: int, seed: int, budget: float | None = 60.0, oracle: bool = True,
             overrides: dict | None = None) -> BenchRow:
    """Generate one instance, solve it both ways and verify the heuristic."""
    params = RandomDagParams(size, seed=seed, **(overrides or {}))
    fsm, spec = gen_random_instance(params)
    t0 = time.perf_counter()
    graph = build_revision_graph(fsm, spec)
    outcome = aamrp(graph)
    a_ms = (time.perf_counter() - t0) * 1000
    verified = verify_outcome(fsm, spec, outcome)
    a_cost = outcome.cost if outcome.status != "infeasible" else None
    o_cost = o_ms = None
    o_status = "skipped"
    if oracle:
        res = brute_force_mrp(graph, budget=budget, prune=True)
        o_ms = res.elapsed * 1000
        o_status = res.status
        o_cost = res.cost
    return BenchRow(size, seed, len(fsm.states) * len(spec.states), graph.n_unexpanded,
                    len(graph.atoms), a_cost, a_ms, o_cost, o_ms, o_status,
                    _ratio(a_cost, o_cost) if o_status == "optimal" else None,
                    aamrp_status=outcome.status, verified=verified)


def _cell_args(args):
    return run_cell(*args)


def run_experiment(sizes, seeds: int | list[int], budget: float | None = 60.0,
                   oracle: bool = True, workers: int = 1,
                   overrides: dict | None = None) -> list[BenchRow]:
    """Rows in (size, seed) order whatever the worker count."""
    seed_list = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    cells = [(s, k, budget, oracle, overrides) for s in sizes for k in seed_list]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_cell_args, cells))
    return [_cell_args(c) for c in cells]


def write_csv(rows, out=None, timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_values(timing))
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


@dataclass
class SizeSummary:
    size: int
    nodes: int
    oracle_sec: tuple | None
    oracle_sol: tuple | None
    oracle_succ: str
    aamrp_sec: tuple
    aamrp_sol: tuple | None
    aamrp_succ: str
    ratio: tuple | None
    extra: dict = field(default_factory=dict)


def _mma(xs):
    xs = [x for x in xs if x is not None]
    if not xs:
        return None
    return (min(xs), statistics.fmean(xs), max(xs))


def summarize(rows) -> list[SizeSummary]:
    """Per-size min/avg/max of times, solution sizes and ratios."""
    out = []
    for size in sorted({r.size for r in rows}):
        group = [r for r in rows if r.size == size]
        done = [r for r in group if r.oracle_status == "optimal"]
        attempted = [r for r in group if r.oracle_status != "skipped"]
        solved = [r for r in group if r.aamrp_cost is not None]
        out.append(SizeSummary(
            size=size,
            nodes=group[0].nodes,
            oracle_sec=_mma([r.oracle_ms / 1000 for r in attempted]),
            oracle_sol=_mma([r.oracle_cost for r in done]),
            oracle_succ=f"{len(done)}/{len(attempted)}" if attempted else "-",
            aamrp_sec=_mma([r.aamrp_ms / 1000 for r in group]),
            aamrp_sol=_mma([r.aamrp_cost for r in solved]),
            aamrp_succ=f"{len(solved)}/{len(group)}",
            ratio=_mma([r.ratio for r in group]),
            extra={"infeasible": sum(r.aamrp_status == "infeasible" for r in group),
                   "already_satisfiable": sum(r.aamrp_status == "already_satisfiable" for r in group)},
        ))
    return out


def format_summary(summaries, timing: bool = True) -> str:
    """Fixed-width table: oracle times/sizes/successes, heuristic
    times/sizes/successes, then ratio min/avg/max."""
    def tri(t, fmt):
        return ["-"] * 3 if t is None else [format(x, fmt) for x in t]

    head = ["nodes", "bf_min_s", "bf_avg_s", "bf_max_s", "bf_sol_min", "bf_sol_avg", "bf_sol_max",
            "bf_succ", "h_min_s", "h_avg_s", "h_max_s", "h_sol_min", "h_sol_avg", "h_sol_max",
            "h_succ", "ratio_min", "ratio_avg", "ratio_max"]
    lines = [" ".join(f"{h:>10}" for h in head)]
    for s in summaries:
        t_or = tri(s.oracle_sec, ".3f") if timing else ["-"] * 3
        t_h = tri(s.aamrp_sec, ".3f") if timing else ["-"] * 3
        cells = ([str(s.nodes)] + t_or + tri(s.oracle_sol, ".4g") + [s.oracle_succ]
                 + t_h + tri(s.aamrp_sol, ".4g") + [s.aamrp_succ] + tri(s.ratio, ".4g"))
        lines.append(" ".join(f"{c:>10}" for c in cells))
    return "\n".join(lines) + "\n"


def row_dict(row: BenchRow) -> dict:
    return asdict(row)
