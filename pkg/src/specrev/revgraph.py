"""Revision graph: the product graph with every disabled transition kept and
labeled by the literal occurrences whose removal would enable it.

A disabled product edge ``(q,s) -> (q',s')`` is expanded into one dummy node
per clause of the spec guard on ``(s,s')``.  The first hop into the dummy
carries the clause's violated literals; the hop out of it is free.  Edges
that are already enabled carry the empty label.

The search code works on dense integer node ids; ``RevisionGraph`` keeps
the mapping back to node objects.  Graphs not derived from a model (the
hand-drawn examples, MCE reductions) use the same class with arbitrary
hashable nodes and atoms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .automata import Fsm, InputError, RemovalAtom, SpecAutomaton, _sccs

__all__ = ["DummyNode", "RevisionGraph", "build_revision_graph", "path_cost", "to_dot"]


@dataclass(frozen=True, order=True)
class DummyNode:
    src: tuple[str, str]
    dst: tuple[str, str]
    clause: int

    def __str__(self) -> str:
        return f"~({self.src[0]},{self.src[1]})->({self.dst[0]},{self.dst[1]})#{self.clause}"


@dataclass
class RevisionGraph:
    nodes: list
    adj: list[list[tuple[int, int]]]  # per node: (target id, label mask), sorted by target
    sources: tuple[int, ...]
    finals: frozenset[int]
    atoms: list  # atom objects; bit i of a label mask is atoms[i]
    kinds: dict = field(default_factory=dict)  # (u, v) -> "enabled" | "disabled"
    n_unexpanded: int | None = None
    n_enabled: int | None = None

    def __post_init__(self):
        self.index = {v: i for i, v in enumerate(self.nodes)}

    @classmethod
    def from_edges(cls, nodes: Sequence[Hashable], edges: Iterable[tuple],
                   sources: Iterable[Hashable], finals: Iterable[Hashable],
                   atoms: Sequence[Hashable] | None = None) -> "RevisionGraph":
        """Build from ``(u, v, label_atoms)`` triples over explicit nodes.

        Atom order (and so tie-breaking among equal masks) follows ``atoms``
        when given, otherwise sorted order of all atoms seen on labels.
        """
        nodes = list(nodes)
        index = {v: i for i, v in enumerate(nodes)}
        if len(index) != len(nodes):
            raise InputError("duplicate node names")
        edges = [(u, v, frozenset(lab)) for u, v, lab in edges]
        if atoms is None:
            atoms = sorted({a for _, _, lab in edges for a in lab}, key=_atom_key)
        atoms = list(atoms)
        bit = {a: 1 << i for i, a in enumerate(atoms)}
        adj: list[list[tuple[int, int]]] = [[] for _ in nodes]
        for u, v, lab in edges:
            if u not in index or v not in index:
                raise InputError(f"edge ({u!r}, {v!r}) references an unknown node")
            mask = 0
            for a in lab:
                if a not in bit:
                    raise InputError(f"label atom {a!r} not in the atom list")
                mask |= bit[a]
            adj[index[u]].append((index[v], mask))
        for row in adj:
            row.sort()
        src = tuple(sorted({index[_known(index, s)] for s in sources}))
        fin = frozenset(index[_known(index, f)] for f in finals)
        if not src:
            raise InputError("graph needs at least one source")
        return cls(nodes, adj, src, fin, atoms)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return sum(len(r) for r in self.adj)

    def mask_atoms(self, mask: int) -> list:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self.atoms[i])
            mask >>= 1
            i += 1
        return out

    def atoms_mask(self, atoms: Iterable) -> int:
        pos = {a: i for i, a in enumerate(self.atoms)}
        mask = 0
        for a in atoms:
            if a not in pos:
                raise InputError(f"unknown atom {a!r}")
            mask |= 1 << pos[a]
        return mask

    def edges(self):
        """Iterate ``(u, v, atom frozenset)`` over node objects."""
        for u, row in enumerate(self.adj):
            for v, mask in row:
                yield self.nodes[u], self.nodes[v], frozenset(self.mask_atoms(mask))

    def is_real(self, i: int) -> bool:
        return not isinstance(self.nodes[i], DummyNode)


def _sccs_int(adj: list[list[tuple[int, int]]]):
    """Strongly connected components over integer adjacency rows."""
    succ = {u: [v for v, _ in row] for u, row in enumerate(adj)}
    return _sccs(range(len(adj)), succ)


def _known(index, v):
    if v not in index:
        raise InputError(f"unknown node {v!r}")
    return v


def _atom_key(a):
    return (type(a).__name__, str(a)) if not isinstance(a, RemovalAtom) else ("", a)


def build_revision_graph(fsm: Fsm, spec: SpecAutomaton) -> RevisionGraph:
    """Materialize the revision graph of ``fsm`` x ``spec`` with dummy
    expansion.  Real nodes come first in (fsm, spec) state order, then the
    dummies in (edge, clause) order."""
    real = [(q, s) for q in fsm.states for s in spec.states]
    rindex = {v: i for i, v in enumerate(real)}
    out_guards: dict[str, list] = {s: [] for s in spec.states}
    for (a, b), g in spec.guards.items():
        out_guards[a].append((b, g))

    atom_list: list[RemovalAtom] = []
    for edge, g in spec.guards.items():
        if g.clauses is not None:
            for i, c in enumerate(g.clauses):
                for lit in c:
                    atom_list.append(RemovalAtom(edge, i, lit))
    bit = {a: 1 << i for i, a in enumerate(atom_list)}

    direct: list[tuple[int, int]] = []
    disabled: list[tuple[int, int, list[int]]] = []
    fsucc = fsm.successors()
    for q in fsm.states:
        for q2 in fsucc[q]:
            label = fsm.labels[q2]
            for s in spec.states:
                u = rindex[(q, s)]
                for s2, g in out_guards[s]:
                    v = rindex[(q2, s2)]
                    if g.satisfied_by(label):
                        direct.append((u, v))
                        continue
                    masks = []
                    for i, c in enumerate(g.clauses):
                        m = 0
                        for lit in c:
                            if not lit.satisfied_by(label):
                                m |= bit[RemovalAtom((s, s2), i, lit)]
                        masks.append(m)
                    disabled.append((u, v, masks))

    nodes: list = list(real)
    adj: list[list[tuple[int, int]]] = [[] for _ in real]
    kinds = {}
    for u, v in direct:
        adj[u].append((v, 0))
        kinds[(u, v)] = "enabled"
    disabled.sort(key=lambda t: (t[0], t[1]))
    for u, v, masks in disabled:
        for i, m in enumerate(masks):
            d = len(nodes)
            nodes.append(DummyNode(real[u], real[v], i))
            adj.append([(v, 0)])
            adj[u].append((d, m))
            kinds[(u, d)] = "disabled"
            kinds[(d, v)] = "disabled"
    for row in adj:
        row.sort()

    sources = tuple(sorted(rindex[(q, spec.initial)] for q in fsm.initial))
    finals = frozenset(rindex[(q, f)] for q in fsm.states for f in spec.finals)
    used = 0
    for row in adj:
        for _, m in row:
            used |= m
    # restrict the universe to atoms that label some edge, renumbering bits
    keep = [i for i in range(len(atom_list)) if used >> i & 1]
    if len(keep) != len(atom_list):
        remap = {old: new for new, old in enumerate(keep)}
        adj = [[(v, _remap(m, remap)) for v, m in row] for row in adj]
        atom_list = [atom_list[i] for i in keep]
    g = RevisionGraph(nodes, adj, sources, finals, atom_list, kinds,
                      n_unexpanded=len(direct) + len(disabled), n_enabled=len(direct))
    return g


def _remap(mask: int, remap: dict[int, int]) -> int:
    out = 0
    i = 0
    while mask:
        if mask & 1:
            out |= 1 << remap[i]
        mask >>= 1
        i += 1
    return out


def path_cost(graph: RevisionGraph, path: Sequence[Hashable]) -> tuple[int, frozenset]:
    """Cost of a node path: size of the union of all edge labels on it.

    With parallel edges the cheapest label between two nodes is used.
    """
    idx = [graph.index[_known(graph.index, v)] for v in path]
    mask = 0
    for u, v in zip(idx, idx[1:]):
        labels = [m for w, m in graph.adj[u] if w == v]
        if not labels:
            raise InputError(f"no edge {graph.nodes[u]!r} -> {graph.nodes[v]!r}")
        mask |= min(labels, key=int.bit_count)
    return mask.bit_count(), frozenset(graph.mask_atoms(mask))


def _dot_id(v) -> str:
    if isinstance(v, tuple):
        text = "(" + ",".join(map(str, v)) + ")"
    else:
        text = str(v)
    return '"' + text.replace('"', '\\"') + '"'


def _format_label(atoms) -> str:
    if not atoms:
        return ""
    by_site: dict = {}
    for a in atoms:
        if isinstance(a, RemovalAtom):
            by_site.setdefault((a.edge, a.clause), []).append(str(a.literal))
        else:
            by_site.setdefault(None, []).append(str(a))
    parts = []
    for site, lits in by_site.items():
        body = "{" + ",".join(lits) + "}"
        if site is not None:
            (s, s2), i = site
            body += f"@({s},{s2})#{i}"
        parts.append(body)
    return " ".join(parts)


def to_dot(graph: RevisionGraph) -> str:
    """Graphviz rendering; enabled edges solid, disabled detours dashed."""
    lines = ["digraph revision {", "  rankdir=LR;"]
    for i, v in enumerate(graph.nodes):
        attrs = []
        if isinstance(v, DummyNode):
            attrs += ["shape=point"]
        elif i in graph.finals:
            attrs += ["shape=doublecircle"]
        else:
            attrs += ["shape=circle"]
        if i in graph.sources:
            attrs += ["style=bold"]
        lines.append(f"  {_dot_id(v)} [{', '.join(attrs)}];")
    for u, row in enumerate(graph.adj):
        for v, mask in row:
            kind = graph.kinds.get((u, v), "disabled" if mask else "enabled")
            attrs = ["style=dashed"] if kind == "disabled" else []
            text = _format_label(graph.mask_atoms(mask))
            if text:
                attrs.append('label="' + text.replace('"', '\\"') + '"')
            suffix = f" [{', '.join(attrs)}]" if attrs else ""
            lines.append(f"  {_dot_id(graph.nodes[u])} -> {_dot_id(graph.nodes[v])}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"
