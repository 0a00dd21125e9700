import itertools

import pytest
from hypothesis import given, settings

from specrev import fixtures
from specrev.automata import (
    Fsm,
    InputError,
    Literal,
    RemovalAtom,
    SpecAutomaton,
    apply_revision,
    build_product,
)
from specrev.revgraph import DummyNode, RevisionGraph, build_revision_graph, path_cost, to_dot

from strategies import small_models


def one_edge(guard, target_label):
    fsm = Fsm(["q", "q2"], ["q"], [("q", "q2")], {"q2": target_label})
    spec = SpecAutomaton.from_raw(["s1", "s2"], "s1", ["s2"], [("s1", "s2", guard)])
    return build_revision_graph(fsm, spec)


def first_hops(graph):
    return sorted(
        (graph.nodes[d].clause, sorted(str(a.literal) for a in graph.mask_atoms(m)))
        for u, row in enumerate(graph.adj) for d, m in row
        if isinstance(graph.nodes[d], DummyNode))


@pytest.fixture(scope="module")
def branching_chain():
    """Chain q0->q1 with branches q1->q2 and q1->q3 against a single
    accepting self-loop that demands p0..p3."""
    fsm = Fsm(["q0", "q1", "q2", "q3"], ["q0"], [("q0", "q1"), ("q1", "q2"), ("q1", "q3")],
              {"q1": ["p1", "p3"], "q2": ["p1", "p2"], "q3": ["p1", "p3"]})
    spec = SpecAutomaton.from_raw(["s1"], "s1", ["s1"], [("s1", "s1", [["p0", "p1", "p2", "p3"]])])
    return build_revision_graph(fsm, spec)


class TestLabels:
    def test_disjunction_gives_one_dummy_per_clause(self):
        g = one_edge([["!p0"], ["p1"]], ["p0"])
        assert first_hops(g) == [(0, ["!p0"]), (1, ["p1"])]

    def test_conjunction_only_violated_literals(self):
        g = one_edge([["!p0", "p1"]], ["p2"])
        assert first_hops(g) == [(0, ["p1"])]

    def test_enabled_edge_unlabeled(self):
        g = one_edge([["p0"]], ["p0"])
        assert first_hops(g) == []
        assert g.n_enabled == 1 and g.adj[g.index[("q", "s1")]] == [(g.index[("q2", "s2")], 0)]

    def test_true_guard_always_enabled(self):
        g = one_edge("true", [])
        assert g.n_enabled == 1 and g.atoms == []

    def test_branching_chain_first_hop(self, branching_chain):
        d = branching_chain.index[DummyNode(("q0", "s1"), ("q1", "s1"), 0)]
        (_, mask), = [(v, m) for v, m in branching_chain.adj[branching_chain.index[("q0", "s1")]] if v == d]
        assert sorted(str(a.literal) for a in branching_chain.mask_atoms(mask)) == ["p0", "p2"]

    def test_dummy_has_single_free_exit(self, branching_chain):
        for i, v in enumerate(branching_chain.nodes):
            if isinstance(v, DummyNode):
                assert branching_chain.adj[i] == [(branching_chain.index[v.dst], 0)]


class TestPathCost:
    def test_branching_chain_costs(self, branching_chain):
        d = lambda a, b: DummyNode(a, b, 0)  # noqa: E731
        q0, q1, q2, q3 = (("q0", "s1"), ("q1", "s1"), ("q2", "s1"), ("q3", "s1"))
        assert path_cost(branching_chain, [q0, d(q0, q1), q1, d(q1, q3), q3])[0] == 2
        cost, atoms = path_cost(branching_chain, [q0, d(q0, q1), q1, d(q1, q2), q2])
        assert cost == 3
        assert {str(a.literal) for a in atoms} == {"p0", "p2", "p3"}

    def test_empty_path(self, branching_chain):
        assert path_cost(branching_chain, [("q0", "s1")]) == (0, frozenset())

    def test_disconnected(self, branching_chain):
        with pytest.raises(InputError):
            path_cost(branching_chain, [("q0", "s1"), ("q2", "s1")])


class TestTwoAgent:
    def test_counts(self):
        inst = fixtures.load("two_agent")
        g = inst.revision_graph()
        assert g.n_unexpanded == 240
        assert len(g.finals) == 9
        assert sum(1 for v in g.nodes if not isinstance(v, DummyNode)) == 36

    def test_deterministic_layout(self):
        a = fixtures.load("two_agent").revision_graph()
        b = fixtures.load("two_agent").revision_graph()
        assert a.nodes == b.nodes and a.adj == b.adj and a.atoms == b.atoms


class TestFromEdges:
    def test_unknown_node(self):
        with pytest.raises(InputError):
            RevisionGraph.from_edges(["a"], [("a", "b", set())], ["a"], ["a"])

    def test_atom_order_respected(self):
        g = RevisionGraph.from_edges(["a", "b"], [("a", "b", {"y", "x"})], ["a"], ["b"], atoms=["y", "x"])
        assert g.atoms == ["y", "x"] and g.adj[0] == [(1, 0b11)]

    def test_dot(self):
        g = one_edge([["!p0", "p1"]], ["p2"])
        text = to_dot(g)
        assert text.startswith("digraph") and "style=dashed" in text and "{p1}@(s1,s2)#0" in text


def _real_path_edges(graph):
    """Every real-to-real hop: (u, v, label mask) with dummies collapsed."""
    for u, row in enumerate(graph.adj):
        if not graph.is_real(u):
            continue
        for w, m in row:
            if graph.is_real(w):
                yield u, w, m
            else:
                (v, _), = graph.adj[w]
                yield u, v, m


class TestExpansionProperties:
    @given(small_models(max_fsm=3, max_spec=2))
    def test_labels_enable_the_transition(self, model):
        fsm, spec = model
        g = build_revision_graph(fsm, spec)
        for u, v, m in _real_path_edges(g):
            out = apply_revision(spec, g.mask_atoms(m))
            assert build_product(fsm, out).has_transition(g.nodes[u], g.nodes[v])

    @given(small_models(max_fsm=3, max_spec=2))
    @settings(max_examples=40)
    def test_dummy_labels_are_exactly_the_minimal_enabling_sets(self, model):
        fsm, spec = model
        g = build_revision_graph(fsm, spec)
        per_pair = {}
        for u, v, m in _real_path_edges(g):
            per_pair.setdefault((u, v), set()).add(frozenset(g.mask_atoms(m)))
        universe = sorted(RemovalAtom(e, i, lit) for e, gd in spec.guards.items() if gd.clauses
                          for i, c in enumerate(gd.clauses) for lit in c)
        for (u, v), labels in per_pair.items():
            (q, s), (q2, s2) = g.nodes[u], g.nodes[v]
            local = [a for a in universe if a.edge == (s, s2)]
            enabling = []
            for k in range(len(local) + 1):
                for combo in itertools.combinations(local, k):
                    if any(set(e) <= set(combo) for e in enabling):
                        continue
                    if build_product(fsm, apply_revision(spec, combo)).has_transition((q, s), (q2, s2)):
                        enabling.append(frozenset(combo))
            # each minimal enabling set appears as a label and every label contains one
            for e in enabling:
                assert e in labels or (not e and frozenset() in labels)
            for lab in labels:
                assert any(e <= lab for e in enabling)

    @given(small_models())
    def test_universe_bound(self, model):
        fsm, spec = model
        g = build_revision_graph(fsm, spec)
        total = sum(len(c) for gd in spec.guards.values() if gd.clauses for c in gd.clauses)
        assert len(g.atoms) <= total
        used = 0
        for row in g.adj:
            for _, m in row:
                used |= m
        assert used == (1 << len(g.atoms)) - 1
