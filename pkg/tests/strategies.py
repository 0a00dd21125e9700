"""Hypothesis strategies and small independent reference checks shared by tests."""
from collections import deque

from hypothesis import strategies as st

from specrev.automata import Fsm, SpecAutomaton
from specrev.bench import RandomDagParams, gen_random_instance
from specrev.revgraph import RevisionGraph

PROPS = ["a", "b", "c"]


@st.composite
def literals(draw):
    return ("!" if draw(st.booleans()) else "") + draw(st.sampled_from(PROPS))


@st.composite
def raw_guards(draw):
    if draw(st.integers(0, 5)) == 0:
        return "true"
    return draw(st.lists(st.lists(literals(), min_size=1, max_size=3), min_size=1, max_size=3))


@st.composite
def small_models(draw, max_fsm=3, max_spec=3):
    """FSM + spec with every FSM state reachable (a spanning chain is forced)."""
    nq = draw(st.integers(1, max_fsm))
    qs = [f"q{i}" for i in range(nq)]
    edges = {(qs[i - 1], qs[i]) for i in range(1, nq)}
    edges |= set(draw(st.lists(st.tuples(st.sampled_from(qs), st.sampled_from(qs)), max_size=5)))
    labels = {q: draw(st.sets(st.sampled_from(PROPS))) for q in qs}
    fsm = Fsm(qs, [qs[0]], sorted(edges), labels)
    ns = draw(st.integers(1, max_spec))
    ss = [f"s{i}" for i in range(ns)]
    pairs = draw(st.sets(st.tuples(st.sampled_from(ss), st.sampled_from(ss)), min_size=1, max_size=6))
    transitions = [(a, b, draw(raw_guards())) for a, b in sorted(pairs)]
    finals = draw(st.sets(st.sampled_from(ss), min_size=1))
    spec = SpecAutomaton.from_raw(ss, ss[0], sorted(finals), transitions)
    return fsm, spec


@st.composite
def random_instances(draw, sizes=(2, 3, 4)):
    n = draw(st.sampled_from(sizes))
    seed = draw(st.integers(0, 10_000))
    return gen_random_instance(RandomDagParams(n, seed=seed))


@st.composite
def small_graphs(draw, max_nodes=6, max_atoms=5):
    """Arbitrary labeled graphs with a source that is not final."""
    n = draw(st.integers(2, max_nodes))
    nodes = [f"n{i}" for i in range(n)]
    atoms = [f"x{i}" for i in range(draw(st.integers(1, max_atoms)))]
    edges = draw(st.lists(st.tuples(st.sampled_from(nodes), st.sampled_from(nodes),
                                    st.sets(st.sampled_from(atoms), max_size=3)),
                          min_size=1, max_size=3 * n))
    finals = draw(st.sets(st.sampled_from(nodes[1:]), min_size=1))
    return RevisionGraph.from_edges(nodes, edges, ["n0"], sorted(finals), atoms=atoms)


def accepting_by_reachability(product) -> bool:
    """Independent emptiness check: some reachable final reaches itself
    again through at least one transition.  Plain BFS, no SCCs."""
    def reach(sources):
        seen = set(sources)
        queue = deque(sources)
        while queue:
            v = queue.popleft()
            for w in product.succ.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen

    for f in reach(product.initials):
        if f in product.finals and f in reach(product.succ.get(f, [])):
            return True
    return False


def replays(product, lasso) -> bool:
    prefix, cycle = list(lasso.prefix), list(lasso.cycle)
    if prefix[0] not in product.initials or prefix[-1] != cycle[0] or cycle[0] != cycle[-1]:
        return False
    if cycle[0] not in product.finals or len(cycle) < 2:
        return False
    return all(b in product.succ[a] for path in (prefix, cycle) for a, b in zip(path, path[1:]))
