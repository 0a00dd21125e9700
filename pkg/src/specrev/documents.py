"""JSON file formats.

Instance document::

    {
      "fsm":  {"states": [...], "init": [...], "labels": {"q": ["p", ...]},
               "edges": [["q", "q2"], ...]},
      "spec": {"states": [...], "init": "s", "finals": [...],
               "transitions": [{"from": "s", "to": "s2", "guard": "true"},
                               {"from": "s", "to": "s3", "guard": [["p", "!r"], ["q"]]}]},
      "propositions": [...]            # optional; restricts guard vocabulary
    }

A guard is ``"true"`` or a list of clauses; each clause is a non-empty
list of literals (``"p"`` or ``"!p"``).  Clause order is meaningful: the
position of a clause in the normalized guard is the clause index used in
revision output.

Graph document (a revision graph given directly)::

    {"graph": {"nodes": [...], "sources": [...], "finals": [...],
               "atoms": [...],               # optional, fixes atom order
               "edges": [{"from": "a", "to": "b", "label": ["x", ...]}]}}

Revision document: see :func:`outcome_document`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from .automata import (
    Fsm,
    Guard,
    InputError,
    RemovalAtom,
    SpecAutomaton,
    _simplify,
    build_product,
    parse_literal,
)
from .revgraph import RevisionGraph, build_revision_graph

__all__ = [
    "Instance",
    "GraphInstance",
    "load_document",
    "load_file",
    "load_spec",
    "spec_document",
    "instance_document",
    "graph_document",
    "outcome_document",
    "parse_outcome_document",
    "dumps",
]


@dataclass
class Instance:
    fsm: Fsm
    spec: SpecAutomaton
    propositions: tuple[str, ...] | None = None
    warnings: tuple[str, ...] = ()

    def revision_graph(self) -> RevisionGraph:
        return build_revision_graph(self.fsm, self.spec)


@dataclass
class GraphInstance:
    graph: RevisionGraph
    warnings: tuple[str, ...] = ()

    def revision_graph(self) -> RevisionGraph:
        return self.graph


def dumps(doc: Any) -> str:
    """Canonical text form: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _need(obj, key, where, kind=None):
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    if key not in obj:
        raise InputError(f"{where}.{key}: missing")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise InputError(f"{where}.{key}: expected {names}, got {type(val).__name__}")
    return val


def _names(seq, where) -> list[str]:
    if not isinstance(seq, list):
        raise InputError(f"{where}: expected a list")
    for i, x in enumerate(seq):
        if not isinstance(x, str) or not x:
            raise InputError(f"{where}[{i}]: expected a non-empty string")
    return list(seq)


def _wrap(where, fn, *args):
    try:
        return fn(*args)
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from None


def load_document(doc: Any) -> Instance | GraphInstance:
    """Validate a parsed JSON document into an instance or a graph."""
    if not isinstance(doc, dict):
        raise InputError("document: expected a JSON object")
    if "graph" in doc:
        return GraphInstance(_load_graph(doc["graph"]))
    fsm_doc = _need(doc, "fsm", "document", dict)
    spec_doc = _need(doc, "spec", "document", dict)
    props = None
    if "propositions" in doc:
        props = tuple(_names(doc["propositions"], "propositions"))

    states = _names(_need(fsm_doc, "states", "fsm", list), "fsm.states")
    init = _names(_need(fsm_doc, "init", "fsm", list), "fsm.init")
    labels_doc = _need(fsm_doc, "labels", "fsm", dict)
    labels = {}
    for q, lab in labels_doc.items():
        labels[q] = _names(lab, f"fsm.labels.{q}")
        if props is not None:
            for a in labels[q]:
                if a not in props:
                    raise InputError(f"fsm.labels.{q}: unknown proposition {a!r}")
    edges = []
    for i, e in enumerate(_need(fsm_doc, "edges", "fsm", list)):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
            raise InputError(f"fsm.edges[{i}]: expected [from, to]")
        edges.append(tuple(e))
    fsm = _wrap("fsm", Fsm, states, init, edges, labels)

    spec, warnings = load_spec(spec_doc, props)
    return Instance(fsm, spec, props, tuple(warnings))


def load_spec(spec_doc, props=None, where: str = "spec") -> tuple[SpecAutomaton, list[str]]:
    """Validate the ``spec`` part of an instance document; returns the
    automaton and normalization warnings."""
    if not isinstance(spec_doc, dict):
        raise InputError(f"{where}: expected an object")
    sstates = _names(_need(spec_doc, "states", where, list), f"{where}.states")
    sinit = _need(spec_doc, "init", where, str)
    finals = _names(_need(spec_doc, "finals", where, list), f"{where}.finals")
    guards: dict[tuple[str, str], Guard] = {}
    warnings = []
    dropped = 0
    for i, t in enumerate(_need(spec_doc, "transitions", where, list)):
        tw = f"{where}.transitions[{i}]"
        a = _need(t, "from", tw, str)
        b = _need(t, "to", tw, str)
        raw = _need(t, "guard", tw)
        if isinstance(raw, list):
            for k, c in enumerate(raw):
                if isinstance(c, list) and not c:
                    raise InputError(f"{tw}.guard[{k}]: empty clause")
        if (a, b) in guards:
            raise InputError(f"{tw}: duplicate transition ({a}, {b})")
        g, n = _wrap(f"{tw}.guard", _simplify, raw, props)
        dropped += n
        if g is None:
            warnings.append(f"{tw}: guard is unsatisfiable; transition omitted")
            continue
        if isinstance(raw, list) and (g.clauses is None or len(g.clauses) != len(raw)):
            warnings.append(f"{tw}: guard normalized from {len(raw)} to "
                            f"{'true' if g.clauses is None else len(g.clauses)} clause(s); "
                            "clause indices refer to the normalized guard")
        guards[(a, b)] = g
    spec = _wrap(where, SpecAutomaton, tuple(sstates), sinit, frozenset(finals), guards, dropped)
    return spec, warnings


def _load_graph(gdoc) -> RevisionGraph:
    if not isinstance(gdoc, dict):
        raise InputError("graph: expected an object")
    nodes = _names(_need(gdoc, "nodes", "graph", list), "graph.nodes")
    sources = _names(_need(gdoc, "sources", "graph", list), "graph.sources")
    finals = _names(_need(gdoc, "finals", "graph", list), "graph.finals")
    atoms = _names(gdoc["atoms"], "graph.atoms") if "atoms" in gdoc else None
    edges = []
    for i, e in enumerate(_need(gdoc, "edges", "graph", list)):
        where = f"graph.edges[{i}]"
        edges.append((_need(e, "from", where, str), _need(e, "to", where, str),
                      _names(_need(e, "label", where, list), f"{where}.label")))
    return _wrap("graph", RevisionGraph.from_edges, nodes, edges, sources, finals, atoms)


def load_file(path) -> Instance | GraphInstance:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return load_document(doc)


def _guard_json(g: Guard):
    if g.clauses is None:
        return "true"
    return [[str(lit) for lit in c] for c in g.clauses]


def spec_document(spec: SpecAutomaton) -> dict:
    return {
        "states": list(spec.states),
        "init": spec.initial,
        "finals": sorted(spec.finals, key=spec.states.index),
        "transitions": [{"from": a, "to": b, "guard": _guard_json(g)}
                        for (a, b), g in spec.guards.items()],
    }


def instance_document(fsm: Fsm, spec: SpecAutomaton, propositions=None) -> dict:
    doc = {
        "fsm": {
            "states": list(fsm.states),
            "init": list(fsm.initial),
            "labels": {q: sorted(fsm.labels[q]) for q in fsm.states},
            "edges": [list(e) for e in fsm.edges],
        },
        "spec": spec_document(spec),
    }
    if propositions is not None:
        doc["propositions"] = list(propositions)
    return doc


def graph_document(graph: RevisionGraph) -> dict:
    """Serialize a graph whose nodes and atoms are strings."""
    for v in graph.nodes:
        if not isinstance(v, str):
            raise InputError("only graphs with string node names can be written as documents")
    return {"graph": {
        "nodes": list(graph.nodes),
        "sources": [graph.nodes[s] for s in graph.sources],
        "finals": [graph.nodes[f] for f in sorted(graph.finals)],
        "atoms": [str(a) for a in graph.atoms],
        "edges": [{"from": graph.nodes[u], "to": graph.nodes[v],
                   "label": [str(a) for a in graph.mask_atoms(m)]}
                  for u, row in enumerate(graph.adj) for v, m in row],
    }}


def _node_json(v):
    return list(v) if isinstance(v, tuple) else v


def _atom_json(a):
    if isinstance(a, RemovalAtom):
        return {"edge": list(a.edge), "clause": a.clause, "literal": str(a.literal)}
    return str(a)


def _atom_sort_key(a):
    if isinstance(a, RemovalAtom):
        return (0, a.edge, a.clause, a.literal.ap, a.literal.negated)
    return (1, str(a))


def outcome_document(outcome, instance: Instance | GraphInstance, graph: RevisionGraph,
                     wall_ms: float | None = None, extra: dict | None = None) -> dict:
    """Revision document for a heuristic or oracle outcome.

    ``wall_ms`` is omitted from ``stats`` when None so that output can be
    made byte-identical across runs.
    """
    status = outcome.status
    stats: dict[str, Any] = {}
    if isinstance(instance, Instance):
        stats["product_states"] = len(instance.fsm.states) * len(instance.spec.states)
        stats["product_transitions_unexpanded"] = graph.n_unexpanded
    else:
        stats["product_states"] = graph.n_nodes
        stats["product_transitions_unexpanded"] = graph.n_edges
    stats["product_transitions_expanded"] = graph.n_edges
    stats["revision_graph_nodes"] = graph.n_nodes
    stats["atom_universe"] = len(graph.atoms)
    if hasattr(outcome, "reachable_finals"):
        stats["reachable_finals"] = outcome.reachable_finals
    if wall_ms is not None:
        stats["wall_ms"] = round(wall_ms, 3)
    doc: dict[str, Any] = {"status": status, "stats": stats}
    if outcome.cost is not None and status != "infeasible":
        doc["cost"] = outcome.cost
    doc["atoms"] = [_atom_json(a) for a in sorted(outcome.atoms, key=_atom_sort_key)]
    if outcome.cycle:
        doc["witness"] = {"prefix": [_node_json(v) for v in outcome.prefix],
                          "cycle": [_node_json(v) for v in outcome.cycle]}
    if getattr(outcome, "ties", None):
        doc["ties"] = [_node_json(v) for v in outcome.ties]
    if extra:
        doc.update(extra)
    return doc


def _node_back(v):
    return tuple(v) if isinstance(v, list) else v


def parse_outcome_document(doc: dict) -> dict:
    """Inverse of :func:`outcome_document` for the solver-facing fields:
    returns status, cost, atom set and witness with Python types."""
    atoms = set()
    for i, a in enumerate(doc.get("atoms", [])):
        if isinstance(a, dict):
            edge = _need(a, "edge", f"atoms[{i}]", list)
            if len(edge) != 2:
                raise InputError(f"atoms[{i}].edge: expected [s, s']")
            lit = _wrap(f"atoms[{i}].literal", parse_literal, _need(a, "literal", f"atoms[{i}]", str))
            atoms.add(RemovalAtom(tuple(edge), _need(a, "clause", f"atoms[{i}]", int), lit))
        else:
            atoms.add(a)
    out = {"status": _need(doc, "status", "document", str), "cost": doc.get("cost"),
           "atoms": frozenset(atoms), "stats": dict(doc.get("stats", {}))}
    w = doc.get("witness")
    if w:
        out["prefix"] = tuple(_node_back(v) for v in w["prefix"])
        out["cycle"] = tuple(_node_back(v) for v in w["cycle"])
    else:
        out["prefix"] = out["cycle"] = ()
    return out


def product_stats(instance: Instance) -> dict:
    p = build_product(instance.fsm, instance.spec)
    return {"product_states": len(p.states), "product_transitions": p.n_transitions}

