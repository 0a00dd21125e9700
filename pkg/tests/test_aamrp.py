import math

import pytest
from hypothesis import given, settings

from specrev import fixtures
from specrev.aamrp import SearchTables, aamrp, find_min_path, relax_edge, solve, verify_graph_outcome, verify_outcome
from specrev.automata import InputError, build_product, is_satisfiable
from specrev.bench import gen_unbounded_family
from specrev.oracle import brute_force_mrp
from specrev.revgraph import RevisionGraph, build_revision_graph

from strategies import random_instances, small_graphs


def tables(entries):
    atoms = [a for a, _ in entries]
    sizes = [s for _, s in entries]
    return SearchTables(atoms, sizes, [None] * len(entries))


class TestRelax:
    def test_first_reach(self):
        t = tables([(0b01, 1), (0, math.inf)])
        assert relax_edge(0, 1, 0b10, t)
        assert (t.atoms[1], t.size[1], t.parent[1]) == (0b11, 2, 0)

    def test_equal_size_does_not_displace(self):
        t = tables([(0, 0), (0, 0)])
        assert not relax_edge(0, 1, 0, t)
        assert t.parent[1] is None

    def test_union_can_shrink(self):
        t = tables([(0b001, 1), (0b101, 2)])
        assert relax_edge(0, 1, 0b001, t)
        assert (t.atoms[1], t.size[1]) == (0b001, 1)


@pytest.fixture(scope="module")
def graph():
    return fixtures.load("labeled_dag").graph


class TestLabeledDag:
    def test_trace_snapshots(self, graph):
        snaps = []
        t = SearchTables.empty(graph.n_nodes)
        t.size[0] = 0
        find_min_path(graph, t, graph.sources,
                      trace=lambda tb: snaps.append([(set(graph.mask_atoms(a)), s)
                                                     for a, s in zip(tb.atoms, tb.size)]))
        inf = math.inf
        first = [(set(), 0), ({"a1"}, 1), ({"a1", "a3"}, 2), (set(), inf), (set(), inf), (set(), inf)]
        second = [(set(), 0), ({"a1"}, 1), ({"a1", "a3"}, 2), ({"a1", "a2"}, 2), (set(), inf), (set(), inf)]
        last = [(set(), 0), ({"a1"}, 1), ({"a1", "a3"}, 2), ({"a1", "a2"}, 2),
                ({"a1", "a2", "a4"}, 3), ({"a1", "a2", "a3", "a4"}, 4)]
        assert snaps[0] == first and snaps[1] == second and snaps[-1] == last

    def test_outcome(self, graph):
        out = aamrp(graph)
        assert out.cost == 4 and out.status == "revised"
        assert out.prefix == ("v1", "v2", "v4", "v5", "v6")
        assert verify_graph_outcome(graph, out)


class TestLassoMode:
    def test_empty_self_loop_keeps_seed(self):
        g = RevisionGraph.from_edges(["a"], [("a", "a", set())], ["a"], [])
        t = SearchTables.empty(1)
        t.atoms[0], t.size[0] = 0, 0
        find_min_path(g, t, (0,), lasso=True)
        assert t.size[0] == 0 and t.parent[0] == 0

    def test_no_cycle_resets_to_infinity(self):
        g = RevisionGraph.from_edges(["a", "b"], [("a", "b", set())], ["a"], [])
        t = SearchTables.empty(2)
        t.size[0] = 0
        find_min_path(g, t, (0,), lasso=True)
        assert t.size[0] == math.inf

    def test_lasso_needs_single_source(self):
        g = RevisionGraph.from_edges(["a", "b"], [], ["a", "b"], [])
        with pytest.raises(ValueError):
            find_min_path(g, SearchTables.empty(2), (0, 1), lasso=True)


class TestOutcomes:
    @pytest.mark.parametrize("m", [3, 4, 5, 6])
    def test_chained_diamonds(self, m):
        out = aamrp(gen_unbounded_family(m))
        assert out.cost == m + 1
        assert set(out.atoms) == {"p0"} | {f"p{i}" for i in range(1, m + 1)}

    def test_already_satisfiable(self):
        inst = fixtures.load("trivial")
        out = aamrp(inst.revision_graph())
        assert out.status == "already_satisfiable" and out.cost == 0 and not out.atoms
        assert verify_outcome(inst.fsm, inst.spec, out)

    def test_infeasible(self):
        inst = fixtures.load("infeasible")
        graph, out = solve(inst.fsm, inst.spec)
        assert out.status == "infeasible"
        assert verify_outcome(inst.fsm, inst.spec, out)

    def test_source_final_rejected(self):
        g = RevisionGraph.from_edges(["a"], [("a", "a", set())], ["a"], ["a"])
        with pytest.raises(InputError):
            aamrp(g)

    def test_ties_recorded_last_wins(self):
        # two finals with equal-cost lassos: the later one in node order wins
        g = RevisionGraph.from_edges(
            ["s", "f1", "f2"],
            [("s", "f1", {"x"}), ("s", "f2", {"y"}), ("f1", "f1", set()), ("f2", "f2", set())],
            ["s"], ["f1", "f2"])
        out = aamrp(g)
        assert out.final == "f2" and out.ties == ["f1"] and out.cost == 1

    def test_cyclic_restriction_matches_unrestricted_sweep(self):
        # the lasso sweep restricted to the final's component gives the same answer
        g = gen_unbounded_family(4)
        f = next(iter(g.finals))
        pre = SearchTables.empty(g.n_nodes)
        pre.size[0] = 0
        find_min_path(g, pre, g.sources)
        full = SearchTables.empty(g.n_nodes)
        full.atoms[f], full.size[f] = pre.atoms[f], pre.size[f]
        find_min_path(g, full, (f,), lasso=True)
        assert full.size[f] == aamrp(g).cost


def _chain_holds(graph, t, v):
    mask, cur, seen = 0, v, set()
    while t.parent[cur] is not None and cur not in seen:
        seen.add(cur)
        u = t.parent[cur]
        mask |= min((m for w, m in graph.adj[u] if w == cur), key=lambda m: (t.atoms[u] | m).bit_count())
        cur = u
    return mask == t.atoms[v]


class TestProperties:
    @given(small_graphs())
    def test_chain_invariant(self, graph):
        t = SearchTables.empty(graph.n_nodes)
        for s in graph.sources:
            t.size[s] = 0
        find_min_path(graph, t, graph.sources)
        for v in range(graph.n_nodes):
            if t.size[v] < math.inf:
                assert t.size[v] == t.atoms[v].bit_count()
                assert _chain_holds(graph, t, v)

    @given(small_graphs())
    def test_never_below_optimum_and_sound(self, graph):
        out = aamrp(graph)
        opt = brute_force_mrp(graph, budget=None)
        assert (out.status == "infeasible") == (opt.status == "infeasible")
        if opt.status == "optimal":
            assert out.cost >= opt.cost
            assert verify_graph_outcome(graph, out)

    @given(random_instances())
    @settings(max_examples=40)
    def test_soundness_on_models(self, inst):
        fsm, spec = inst
        out = aamrp(build_revision_graph(fsm, spec))
        assert verify_outcome(fsm, spec, out)
        if out.status == "already_satisfiable":
            assert is_satisfiable(build_product(fsm, spec)) is not None

    @given(random_instances())
    @settings(max_examples=20)
    def test_deterministic(self, inst):
        fsm, spec = inst
        a = aamrp(build_revision_graph(fsm, spec))
        b = aamrp(build_revision_graph(fsm, spec))
        assert a == b
