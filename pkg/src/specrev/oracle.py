"""Exact (exponential) minimal-revision solvers used as ground truth.

``brute_force_mrp`` tries removal-atom subsets in increasing size, and
within a size in lexicographic order of atom index; an edge counts as
enabled when its label is contained in the subset.  The first subset that
admits a source-to-final prefix plus a cycle through that final is optimal.

``path_enumeration_oracle`` is a second, structurally different check for
small graphs: it enumerates simple prefix paths and simple cycles directly
and minimizes the size of their label union.
"""
from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass

from .automata import Lasso, _sccs
from .revgraph import RevisionGraph

__all__ = [
    "OracleResult",
    "OracleRefusal",
    "find_lasso",
    "lasso_exists",
    "relevant_atoms",
    "brute_force_mrp",
    "path_enumeration_oracle",
]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
TIMED_OUT = "timed_out"


class OracleRefusal(RuntimeError):
    """The instance is outside the size range an exhaustive oracle accepts."""


@dataclass
class OracleResult:
    status: str
    atoms: frozenset = frozenset()
    cost: int | None = None
    prefix: tuple = ()
    cycle: tuple = ()
    final: object | None = None
    subsets_checked: int = 0
    lower_bound: int = 0  # every subset smaller than this was refuted
    elapsed: float = 0.0

    def lasso(self) -> Lasso | None:
        if not self.cycle:
            return None
        return Lasso(self.prefix, self.cycle)


def _enabled_succ(graph: RevisionGraph, mask: int) -> list[list[int]]:
    blocked = ~mask
    return [[v for v, lab in row if not lab & blocked] for row in graph.adj]


def _bfs(succ, sources, target=None, allowed=None):
    parent = {s: None for s in sources}
    queue = deque(sources)
    while queue:
        u = queue.popleft()
        for v in succ[u]:
            if v in parent or (allowed is not None and v not in allowed):
                continue
            parent[v] = u
            if v == target:
                return parent
            queue.append(v)
    return parent


def _unwind(parent, v) -> list[int]:
    path = [v]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def find_lasso(graph: RevisionGraph, mask: int):
    """Return ``(final, prefix_ids, cycle_ids)`` for the first final in node
    order that is reachable and lies on a cycle using only edges enabled by
    ``mask``; ``None`` when no such final exists."""
    succ = _enabled_succ(graph, mask)
    reach = _bfs(succ, list(graph.sources))
    finals = sorted(f for f in graph.finals if f in reach)
    if not finals:
        return None
    sub = {u: [v for v in succ[u] if v in reach] for u in reach}
    cyclic = []
    for comp in _sccs(sorted(reach), sub):
        if len(comp) > 1 or comp[0] in sub[comp[0]]:
            cyclic.extend(f for f in comp if f in graph.finals)
    if not cyclic:
        return None
    f = min(cyclic)
    prefix = _unwind(reach, f)
    if f in succ[f]:
        return f, prefix, [f, f]
    back = {}
    queue = deque([f])
    found = False
    while queue and not found:
        u = queue.popleft()
        for v in succ[u]:
            if v == f:
                back[f] = u
                found = True
                break
            if v not in back:
                back[v] = u
                queue.append(v)
    cycle = [f]
    cur = back[f]
    while cur != f:
        cycle.append(cur)
        cur = back[cur]
    cycle.append(f)
    return f, prefix, cycle[::-1]


def lasso_exists(graph: RevisionGraph, mask: int) -> bool:
    return find_lasso(graph, mask) is not None


def relevant_atoms(graph: RevisionGraph) -> list[int]:
    """Atom indices that label some edge able to take part in a lasso once
    everything is relaxed.  Atoms outside this set never shrink a minimal
    revision, so dropping them preserves the enumeration's first hit."""
    full = (1 << len(graph.atoms)) - 1
    succ = _enabled_succ(graph, full)
    reach = _bfs(succ, list(graph.sources))
    sub = {u: [v for v in succ[u] if v in reach] for u in reach}
    lasso_nodes: set[int] = set()
    for comp in _sccs(sorted(reach), sub):
        if (len(comp) > 1 or comp[0] in sub[comp[0]]) and graph.finals & set(comp):
            lasso_nodes.update(comp)
    pred: dict[int, list[int]] = {u: [] for u in reach}
    for u in reach:
        for v in sub[u]:
            pred[v].append(u)
    # nodes that can reach a cyclic final component
    useful = set(lasso_nodes)
    queue = deque(lasso_nodes)
    while queue:
        v = queue.popleft()
        for u in pred[v]:
            if u not in useful:
                useful.add(u)
                queue.append(u)
    used = 0
    for u in useful:
        for v, lab in graph.adj[u]:
            if v in useful:
                used |= lab
    return [i for i in range(len(graph.atoms)) if used >> i & 1]


def _result_from_lasso(graph, status, mask, found, **kw) -> OracleResult:
    f, prefix, cycle = found
    real = graph.is_real
    return OracleResult(
        status,
        atoms=frozenset(graph.mask_atoms(mask)),
        cost=mask.bit_count(),
        prefix=tuple(graph.nodes[v] for v in prefix if real(v)),
        cycle=tuple(graph.nodes[v] for v in cycle if real(v)),
        final=graph.nodes[f],
        **kw,
    )


def brute_force_mrp(graph: RevisionGraph, budget: float | None = 60.0,
                    prune: bool = False) -> OracleResult:
    """Smallest atom subset enabling an accepting lasso.

    ``budget`` is wall-clock seconds (``None`` for unlimited).  Running out
    yields a ``timed_out`` result whose ``lower_bound`` records the smallest
    size not yet exhausted.  ``prune`` restricts enumeration to atoms that
    can matter (see :func:`relevant_atoms`); the answer is unchanged.
    """
    start = time.perf_counter()
    universe = relevant_atoms(graph) if prune else list(range(len(graph.atoms)))
    checked = 0
    for k in range(len(universe) + 1):
        for combo in itertools.combinations(universe, k):
            mask = 0
            for i in combo:
                mask |= 1 << i
            found = find_lasso(graph, mask)
            checked += 1
            if found is not None:
                return _result_from_lasso(graph, OPTIMAL, mask, found, subsets_checked=checked,
                                          lower_bound=k, elapsed=time.perf_counter() - start)
            if budget is not None and checked % 64 == 0 and time.perf_counter() - start > budget:
                return OracleResult(TIMED_OUT, subsets_checked=checked, lower_bound=k,
                                    elapsed=time.perf_counter() - start)
    return OracleResult(INFEASIBLE, subsets_checked=checked, lower_bound=len(universe) + 1,
                        elapsed=time.perf_counter() - start)


def _simple_path_masks(adj, sources, target) -> set[int]:
    """Label unions of all simple paths from any source to ``target``."""
    out: set[int] = set()
    for s in sources:
        if s == target:
            out.add(0)
            continue
        stack = [(s, 0, iter(adj[s]))]
        on_path = {s}
        while stack:
            u, mask, it = stack[-1]
            step = next(it, None)
            if step is None:
                stack.pop()
                on_path.discard(u)
                continue
            v, lab = step
            if v == target:
                out.add(mask | lab)
            elif v not in on_path:
                on_path.add(v)
                stack.append((v, mask | lab, iter(adj[v])))
    return out


def _simple_cycle_masks(adj, f) -> set[int]:
    out: set[int] = set()
    stack = [(f, 0, iter(adj[f]))]
    on_path = {f}
    while stack:
        u, mask, it = stack[-1]
        step = next(it, None)
        if step is None:
            stack.pop()
            on_path.discard(u)
            continue
        v, lab = step
        if v == f:
            out.add(mask | lab)
        elif v not in on_path:
            on_path.add(v)
            stack.append((v, mask | lab, iter(adj[v])))
    return out


def _minimal_masks(masks: set[int]) -> list[int]:
    """Drop masks that are supersets of another; they can never win."""
    ordered = sorted(masks, key=lambda m: (m.bit_count(), m))
    keep: list[int] = []
    for m in ordered:
        if not any(k & m == k for k in keep):
            keep.append(m)
    return keep


def path_enumeration_oracle(graph: RevisionGraph, max_nodes: int = 60) -> OracleResult:
    """Optimal cost by exhaustive simple-path enumeration.

    Any accepting lasso contains a simple prefix and a simple cycle using
    only its own edges, so minimizing over simple ones is exact.  Refuses
    graphs with more than ``max_nodes`` nodes.
    """
    if graph.n_nodes > max_nodes:
        raise OracleRefusal(f"graph has {graph.n_nodes} nodes; limit is {max_nodes}")
    start = time.perf_counter()
    best = None
    for f in sorted(graph.finals):
        prefixes = _simple_path_masks(graph.adj, graph.sources, f)
        if not prefixes:
            continue
        cycles = _simple_cycle_masks(graph.adj, f)
        if not cycles:
            continue
        for p in _minimal_masks(prefixes):
            for c in _minimal_masks(cycles):
                m = p | c
                key = (m.bit_count(), m)
                if best is None or key < best:
                    best = key
    elapsed = time.perf_counter() - start
    if best is None:
        return OracleResult(INFEASIBLE, elapsed=elapsed)
    mask = best[1]
    found = find_lasso(graph, mask)
    return _result_from_lasso(graph, OPTIMAL, mask, found, lower_bound=best[0], elapsed=elapsed)
