"""Polynomial-time heuristic for minimal specification revision.

A Dijkstra-style sweep where a node's key is the size of the union of
removal atoms collected along its best-known path.  One prefix sweep from
the sources, then one lasso sweep per reachable final state seeded with
that state's prefix atoms; the smallest prefix+lasso union wins.

Atom sets are Python ints used as bitmasks over ``graph.atoms``.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable

from .automata import (
    Fsm,
    InputError,
    Lasso,
    SpecAutomaton,
    apply_revision,
    build_product,
    fully_relaxed,
    is_satisfiable,
)
from .revgraph import RevisionGraph, _sccs_int

__all__ = [
    "INF",
    "SearchTables",
    "Outcome",
    "relax_edge",
    "find_min_path",
    "aamrp",
    "solve",
    "verify_outcome",
    "verify_graph_outcome",
]

INF = math.inf

ALREADY_SATISFIABLE = "already_satisfiable"
REVISED = "revised"
INFEASIBLE = "infeasible"


@dataclass
class SearchTables:
    """Per-node best atom set, its size (INF when unreached) and parent."""

    atoms: list[int]
    size: list[float]
    parent: list[int | None]
    visited: set[int] = field(default_factory=set)

    @classmethod
    def empty(cls, n: int) -> "SearchTables":
        return cls([0] * n, [INF] * n, [None] * n)

    def entry(self, v: int) -> tuple[int, float]:
        return self.atoms[v], self.size[v]


def relax_edge(u: int, v: int, label: int, tables: SearchTables) -> bool:
    """Tighten ``v`` through ``u``; strict improvement only."""
    union = tables.atoms[u] | label
    k = union.bit_count()
    if k < tables.size[v]:
        tables.atoms[v] = union
        tables.size[v] = k
        tables.parent[v] = u
        return True
    return False


def find_min_path(graph: RevisionGraph, tables: SearchTables, sources, lasso: bool = False,
                  restrict: set[int] | None = None,
                  trace: Callable[[SearchTables], None] | None = None) -> SearchTables:
    """Sweep ``graph`` from ``sources`` updating ``tables`` in place.

    ``tables`` must already hold the seed entries of the sources.  In lasso
    mode there is a single source whose entry, after its out-edges are
    relaxed, is reset to its self-loop union (or INF) so only a genuine
    cycle can make it finite again.  ``restrict`` limits the sweep to a
    node subset closed under the paths of interest.  ``trace`` is called
    with the tables before every main-loop iteration and once at the end.
    """
    adj = graph.adj
    sources = tuple(sources)
    if lasso and len(sources) != 1:
        raise ValueError("lasso sweep needs exactly one source")
    src_set = set(sources)
    tables.visited.update(sources)
    heap: list[tuple[float, int]] = []

    def allowed(v: int) -> bool:
        return restrict is None or v in restrict

    for s in sources:
        for v, label in adj[s]:
            if v in src_set or not allowed(v):
                continue
            if relax_edge(s, v, label, tables):
                heapq.heappush(heap, (tables.size[v], v))

    if lasso:
        s = sources[0]
        loops = [label for v, label in adj[s] if v == s]
        if loops:
            union = tables.atoms[s] | min(loops, key=lambda m: (tables.atoms[s] | m).bit_count())
            tables.atoms[s] = union
            tables.size[s] = union.bit_count()
            tables.parent[s] = s
        else:
            tables.atoms[s] = 0
            tables.size[s] = INF
            tables.parent[s] = None

    visited = tables.visited
    while True:
        if trace is not None:
            trace(tables)
        u = None
        while heap:
            k, cand = heapq.heappop(heap)
            if cand in visited or k != tables.size[cand]:
                continue
            u = cand
            break
        if u is None:
            break
        visited.add(u)
        for v, label in adj[u]:
            if not allowed(v):
                continue
            if relax_edge(u, v, label, tables) and v not in visited:
                heapq.heappush(heap, (tables.size[v], v))
    return tables


@dataclass
class Outcome:
    status: str
    atoms: frozenset = frozenset()
    cost: int = 0
    prefix: tuple = ()
    cycle: tuple = ()
    final: object | None = None
    ties: list = field(default_factory=list)
    reachable_finals: int = 0

    @property
    def revised(self) -> bool:
        return self.status == REVISED

    def lasso(self) -> Lasso | None:
        if not self.cycle:
            return None
        return Lasso(self.prefix, self.cycle)


def _walk_prefix(parent, f) -> list[int]:
    path = [f]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def _walk_cycle(parent, f) -> list[int]:
    path = [f]
    cur = parent[f]
    guard = len(parent) + 1
    while cur != f:
        path.append(cur)
        cur = parent[cur]
        guard -= 1
        if cur is None or guard < 0:
            raise RuntimeError("broken parent chain in lasso tables")
    path.append(f)
    return path[::-1]


def aamrp(graph: RevisionGraph) -> Outcome:
    """Run the heuristic on a revision graph.

    Finals are examined in node order; a later candidate of equal size
    replaces the incumbent.  Node paths in the outcome contain real nodes
    only (dummy nodes are dropped).
    """
    n = graph.n_nodes
    if graph.finals & set(graph.sources):
        raise InputError("a source node is also final; no revision search needed")
    prefix = SearchTables.empty(n)
    for s in graph.sources:
        prefix.atoms[s] = 0
        prefix.size[s] = 0
    find_min_path(graph, prefix, graph.sources)

    reach_finals = sorted(f for f in graph.finals if prefix.size[f] < INF)
    comp_of = _cyclic_components(graph)
    best = None
    ties = []
    for f in reach_finals:
        comp = comp_of.get(f)
        if comp is None:
            continue
        tables = SearchTables.empty(n)
        tables.atoms[f] = prefix.atoms[f]
        tables.size[f] = prefix.size[f]
        find_min_path(graph, tables, (f,), lasso=True, restrict=comp)
        if tables.size[f] == INF:
            continue
        cand = (int(tables.size[f]), f, tables.atoms[f], tables.parent)
        if best is None or cand[0] <= best[0]:
            if best is not None and cand[0] == best[0]:
                ties.append(best[1])
            elif best is not None:
                ties = []
            best = cand
    if best is None:
        return Outcome(INFEASIBLE, reachable_finals=len(reach_finals))
    cost, f, mask, lparent = best
    pre = _walk_prefix(prefix.parent, f)
    cyc = _walk_cycle(lparent, f)
    real = graph.is_real
    status = ALREADY_SATISFIABLE if cost == 0 else REVISED
    return Outcome(
        status,
        atoms=frozenset(graph.mask_atoms(mask)),
        cost=cost,
        prefix=tuple(graph.nodes[v] for v in pre if real(v)),
        cycle=tuple(graph.nodes[v] for v in cyc if real(v)),
        final=graph.nodes[f],
        ties=[graph.nodes[t] for t in ties],
        reachable_finals=len(reach_finals),
    )


def _cyclic_components(graph: RevisionGraph) -> dict[int, set[int]]:
    """Map each node lying on some cycle to its SCC.  A lasso sweep from a
    final can only return through that final's SCC, so restricting the
    sweep to it changes nothing but the running time."""
    out: dict[int, set[int]] = {}
    for comp in _sccs_int(graph.adj):
        if len(comp) == 1:
            v = comp[0]
            if not any(w == v for w, _ in graph.adj[v]):
                continue
        members = set(comp)
        for v in comp:
            out[v] = members
    return out


def solve(fsm: Fsm, spec: SpecAutomaton):
    """Build the revision graph and run the heuristic; returns both."""
    from .revgraph import build_revision_graph

    graph = build_revision_graph(fsm, spec)
    return graph, aamrp(graph)


def verify_outcome(fsm: Fsm, spec: SpecAutomaton, outcome) -> bool:
    """Independent check of a solver outcome against the model itself.

    Revised or already-satisfiable outcomes must yield a non-empty product
    once their atoms are removed, and any witness lasso must replay on that
    product.  Infeasible outcomes must leave the product empty even with
    every guard relaxed to true.
    """
    status = outcome.status
    if status in (REVISED, ALREADY_SATISFIABLE, "optimal"):
        if status == ALREADY_SATISFIABLE and outcome.atoms:
            return False
        revised = apply_revision(spec, outcome.atoms)
        product = build_product(fsm, revised)
        if is_satisfiable(product) is None:
            return False
        lasso = outcome.lasso() if hasattr(outcome, "lasso") else None
        if lasso is not None:
            return _replays(product, lasso)
        return True
    if status == INFEASIBLE:
        return is_satisfiable(build_product(fsm, fully_relaxed(spec))) is None
    return False


def _replays(product, lasso: Lasso) -> bool:
    prefix, cycle = list(lasso.prefix), list(lasso.cycle)
    if not prefix or len(cycle) < 2:
        return False
    if prefix[0] not in product.initials or prefix[-1] != cycle[0] or cycle[0] != cycle[-1]:
        return False
    if cycle[0] not in product.finals:
        return False
    for path in (prefix, cycle):
        for a, b in zip(path, path[1:]):
            if not product.has_transition(a, b):
                return False
    return True


def verify_graph_outcome(graph: RevisionGraph, outcome) -> bool:
    """Graph-level check: with exactly the edges whose labels lie inside the
    outcome's atom set enabled, some source reaches a final on a cycle."""
    from .oracle import lasso_exists

    if outcome.status in (REVISED, ALREADY_SATISFIABLE, "optimal"):
        return lasso_exists(graph, graph.atoms_mask(outcome.atoms))
    if outcome.status == INFEASIBLE:
        return not lasso_exists(graph, (1 << len(graph.atoms)) - 1)
    return False
