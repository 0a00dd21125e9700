"""System FSMs, DNF-guarded specification automata and their product.

Propositions are plain strings.  A guard is either ``Guard.TRUE`` or an
ordered tuple of conjunctive clauses; a state pair with no guard has no
transition at all.  Clause order is significant: the position of a clause
is the index reported in revisions.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import ClassVar, Iterable, Mapping, Sequence

__all__ = [
    "InputError",
    "Literal",
    "Guard",
    "Fsm",
    "SpecAutomaton",
    "RemovalAtom",
    "Product",
    "Lasso",
    "parse_literal",
    "simplify_guard",
    "build_product",
    "is_satisfiable",
    "apply_revision",
    "relaxation_witness",
    "is_relaxation",
    "distance",
    "fully_relaxed",
]


class InputError(ValueError):
    """Raised for malformed or inconsistent model input."""


@dataclass(frozen=True, order=True)
class Literal:
    ap: str
    negated: bool = False

    def satisfied_by(self, label: frozenset[str]) -> bool:
        return (self.ap in label) != self.negated

    def __str__(self) -> str:
        return ("!" if self.negated else "") + self.ap


Clause = tuple[Literal, ...]


def parse_literal(token: str) -> Literal:
    token = token.strip()
    negated = token.startswith("!")
    name = token[1:].strip() if negated else token
    if not name or not (name[0].isalpha() or name[0] == "_") or not all(
        c.isalnum() or c in "_." for c in name
    ):
        raise InputError(f"bad literal {token!r}")
    return Literal(name, negated)


@dataclass(frozen=True)
class Guard:
    """Either TRUE (``clauses is None``) or a non-empty DNF."""

    clauses: tuple[Clause, ...] | None = None

    TRUE: ClassVar["Guard"]

    @property
    def is_true(self) -> bool:
        return self.clauses is None

    def satisfied_by(self, label: frozenset[str]) -> bool:
        if self.clauses is None:
            return True
        return any(all(lit.satisfied_by(label) for lit in c) for c in self.clauses)

    def propositions(self) -> set[str]:
        if self.clauses is None:
            return set()
        return {lit.ap for c in self.clauses for lit in c}

    def __str__(self) -> str:
        if self.clauses is None:
            return "true"
        return " | ".join(" & ".join(map(str, c)) for c in self.clauses)


Guard.TRUE = Guard(None)


def _simplify(raw, propositions: Iterable[str] | None = None) -> tuple[Guard | None, int]:
    """Returns the normalized guard (None for bottom) and the number of
    contradictory clauses dropped."""
    known = None if propositions is None else set(propositions)
    if isinstance(raw, str):
        if raw.strip() == "true":
            return Guard.TRUE, 0
        raise InputError(f"guard must be 'true' or a list of clauses, got {raw!r}")
    clauses: list[Clause] = []
    dropped = 0
    for raw_clause in raw:
        if isinstance(raw_clause, str):
            raise InputError(f"clause must be a list of literals, got {raw_clause!r}")
        lits: list[Literal] = []
        for token in raw_clause:
            if not isinstance(token, str):
                raise InputError(f"literal must be a string, got {token!r}")
            if token.strip() == "true":
                continue
            lit = parse_literal(token)
            if known is not None and lit.ap not in known:
                raise InputError(f"unknown proposition {lit.ap!r}")
            if lit not in lits:
                lits.append(lit)
        aps = [lit.ap for lit in lits]
        if len(set(aps)) != len(aps):
            dropped += 1
            continue
        if not lits:
            return Guard.TRUE, dropped
        clause = tuple(lits)
        if any(set(clause) == set(c) for c in clauses):
            continue
        clauses.append(clause)
    if not clauses:
        return None, dropped
    return Guard(tuple(clauses)), dropped


def simplify_guard(raw, propositions: Iterable[str] | None = None) -> Guard | None:
    """Normalize a raw DNF given as a list of clauses of literal tokens.

    ``"p"`` is a positive literal, ``"!p"`` a negative one.  Duplicate
    literals collapse, clauses mentioning both ``p`` and ``!p`` are dropped,
    an empty clause (or the bare string ``"true"``) makes the guard TRUE.
    Returns None when no clause survives, meaning no transition.
    """
    return _simplify(raw, propositions)[0]


@dataclass(frozen=True)
class Fsm:
    states: tuple[str, ...]
    initial: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    labels: Mapping[str, frozenset[str]]

    def __init__(self, states: Sequence[str], initial: Iterable[str],
                 edges: Iterable[tuple[str, str]],
                 labels: Mapping[str, Iterable[str]] | None = None):
        states = tuple(states)
        if len(set(states)) != len(states):
            raise InputError("duplicate FSM state names")
        order = {q: i for i, q in enumerate(states)}
        initial = tuple(sorted(set(initial), key=lambda q: order.get(q, -1)))
        if not initial:
            raise InputError("FSM needs at least one initial state")
        for q in initial:
            if q not in order:
                raise InputError(f"unknown FSM initial state {q!r}")
        edge_set = set()
        for a, b in edges:
            if a not in order or b not in order:
                raise InputError(f"FSM edge ({a!r}, {b!r}) references an unknown state")
            edge_set.add((a, b))
        labels = labels or {}
        for q in labels:
            if q not in order:
                raise InputError(f"label given for unknown FSM state {q!r}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(
            self, "edges", tuple(sorted(edge_set, key=lambda e: (order[e[0]], order[e[1]]))))
        object.__setattr__(
            self, "labels", {q: frozenset(labels.get(q, ())) for q in states})
        self._check_reachable()

    def _check_reachable(self) -> None:
        succ = self.successors()
        seen = set(self.initial)
        queue = deque(self.initial)
        while queue:
            q = queue.popleft()
            for r in succ[q]:
                if r not in seen:
                    seen.add(r)
                    queue.append(r)
        missing = [q for q in self.states if q not in seen]
        if missing:
            raise InputError(f"FSM states unreachable from the initial states: {missing}")

    def successors(self) -> dict[str, list[str]]:
        succ: dict[str, list[str]] = {q: [] for q in self.states}
        for a, b in self.edges:
            succ[a].append(b)
        return succ

    def propositions(self) -> set[str]:
        return set().union(*self.labels.values()) if self.labels else set()


@dataclass(frozen=True)
class SpecAutomaton:
    states: tuple[str, ...]
    initial: str
    finals: frozenset[str]
    guards: Mapping[tuple[str, str], Guard]
    dropped_clauses: int = field(default=0, compare=False)

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        if len(set(states)) != len(states):
            raise InputError("duplicate spec state names")
        order = {s: i for i, s in enumerate(states)}
        if self.initial not in order:
            raise InputError(f"unknown spec initial state {self.initial!r}")
        finals = frozenset(self.finals)
        if not finals:
            raise InputError("spec needs at least one final state")
        for s in finals:
            if s not in order:
                raise InputError(f"unknown spec final state {s!r}")
        object.__setattr__(self, "finals", finals)
        guards = {}
        for (a, b), g in self.guards.items():
            if a not in order or b not in order:
                raise InputError(f"spec transition ({a!r}, {b!r}) references an unknown state")
            if not isinstance(g, Guard):
                raise InputError(f"spec transition ({a!r}, {b!r}) needs a Guard")
            guards[(a, b)] = g
        object.__setattr__(
            self, "guards",
            dict(sorted(guards.items(), key=lambda kv: (order[kv[0][0]], order[kv[0][1]]))))

    @classmethod
    def from_raw(cls, states, initial, finals, transitions, propositions=None) -> "SpecAutomaton":
        """Build from ``(src, dst, raw_guard)`` triples, dropping bottom guards."""
        guards = {}
        dropped = 0
        for a, b, raw in transitions:
            if (a, b) in guards:
                raise InputError(f"duplicate spec transition ({a!r}, {b!r})")
            g, n = _simplify(raw, propositions)
            dropped += n
            if g is not None:
                guards[(a, b)] = g
        return cls(tuple(states), initial, frozenset(finals), guards, dropped)

    def propositions(self) -> set[str]:
        return set().union(*(g.propositions() for g in self.guards.values())) \
            if self.guards else set()


@dataclass(frozen=True, order=True)
class RemovalAtom:
    """One literal occurrence: ``literal`` inside clause ``clause`` of the
    guard on spec transition ``edge``."""

    edge: tuple[str, str]
    clause: int
    literal: Literal

    def __str__(self) -> str:
        return f"{self.literal}@({self.edge[0]},{self.edge[1]})#{self.clause}"


def distance(rev: Iterable[RemovalAtom]) -> int:
    """Number of literal occurrences removed."""
    return len(frozenset(rev))


@dataclass(frozen=True)
class Lasso:
    prefix: tuple
    cycle: tuple


@dataclass
class Product:
    """Explicit product automaton; states are ``(q, s)`` pairs."""

    states: list[tuple[str, str]]
    initials: list[tuple[str, str]]
    finals: frozenset
    succ: dict[tuple[str, str], list[tuple[str, str]]]

    @property
    def n_transitions(self) -> int:
        return sum(len(v) for v in self.succ.values())

    def has_transition(self, a, b) -> bool:
        return b in self.succ.get(a, ())


def build_product(fsm: Fsm, spec: SpecAutomaton) -> Product:
    states = [(q, s) for q in fsm.states for s in spec.states]
    out_guards: dict[str, list[tuple[str, Guard]]] = {s: [] for s in spec.states}
    for (a, b), g in spec.guards.items():
        out_guards[a].append((b, g))
    succ: dict[tuple[str, str], list[tuple[str, str]]] = {v: [] for v in states}
    fsucc = fsm.successors()
    for q in fsm.states:
        for q2 in fsucc[q]:
            label = fsm.labels[q2]
            for s in spec.states:
                for s2, g in out_guards[s]:
                    if g.satisfied_by(label):
                        succ[(q, s)].append((q2, s2))
    initials = [(q, spec.initial) for q in fsm.initial]
    finals = frozenset((q, s) for q in fsm.states for s in spec.finals)
    return Product(states, initials, finals, succ)


def _sccs(nodes, succ):
    """Iterative Tarjan; yields lists of nodes."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                yield comp


def _bfs_path(sources, target, succ, allowed=None):
    parent = {s: None for s in sources}
    queue = deque(sources)
    while queue:
        v = queue.popleft()
        if v == target:
            path = [v]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        for w in succ.get(v, ()):
            if w not in parent and (allowed is None or w in allowed):
                parent[w] = v
                queue.append(w)
    return None


def _reachable(sources, succ) -> set:
    seen = set(sources)
    queue = deque(sources)
    while queue:
        v = queue.popleft()
        for w in succ.get(v, ()):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def is_satisfiable(product: Product) -> Lasso | None:
    """Accepting lasso of the product, or None when its language is empty.

    A final state qualifies when it is reachable and lies in a non-trivial
    SCC (a self-loop counts).  The first such state in state order wins.
    """
    reach = _reachable(product.initials, product.succ)
    order = {v: i for i, v in enumerate(product.states)}
    nodes = [v for v in product.states if v in reach]
    succ = product.succ
    candidates = []
    for comp in _sccs(nodes, succ):
        members = set(comp)
        cyclic = len(comp) > 1 or comp[0] in succ.get(comp[0], ())
        if not cyclic:
            continue
        for v in comp:
            if v in product.finals:
                candidates.append((order[v], v, members))
    if not candidates:
        return None
    _, f, members = min(candidates, key=lambda c: c[0])
    prefix = _bfs_path(product.initials, f, succ)
    if f in succ.get(f, ()):
        cycle = [f, f]
    else:
        starts = [w for w in succ[f] if w in members]
        back = _bfs_path(starts, f, succ, allowed=members)
        cycle = [f] + back
    return Lasso(tuple(prefix), tuple(cycle))


def _check_atom(spec: SpecAutomaton, atom: RemovalAtom) -> Clause:
    g = spec.guards.get(atom.edge)
    if g is None or g.clauses is None:
        raise InputError(f"atom {atom} names a transition without a DNF guard")
    if not 0 <= atom.clause < len(g.clauses):
        raise InputError(f"atom {atom} clause index out of range")
    clause = g.clauses[atom.clause]
    if atom.literal not in clause:
        raise InputError(f"atom {atom} literal not in clause")
    return clause


def apply_revision(spec: SpecAutomaton, rev: Iterable[RemovalAtom]) -> SpecAutomaton:
    """Replace every named literal by true; a clause emptied this way turns
    its whole guard into TRUE.  States, initial and finals are untouched."""
    removed: dict[tuple[str, str], dict[int, set[Literal]]] = {}
    for atom in rev:
        _check_atom(spec, atom)
        removed.setdefault(atom.edge, {}).setdefault(atom.clause, set()).add(atom.literal)
    guards = dict(spec.guards)
    for edge, per_clause in removed.items():
        clauses = guards[edge].clauses
        new = []
        became_true = False
        for i, c in enumerate(clauses):
            kept = tuple(lit for lit in c if lit not in per_clause.get(i, ()))
            if not kept:
                became_true = True
                break
            new.append(kept)
        guards[edge] = Guard.TRUE if became_true else Guard(tuple(new))
    return SpecAutomaton(spec.states, spec.initial, spec.finals, guards, spec.dropped_clauses)


def fully_relaxed(spec: SpecAutomaton) -> SpecAutomaton:
    """Every guarded transition enabled unconditionally."""
    return SpecAutomaton(spec.states, spec.initial, spec.finals,
                         {e: Guard.TRUE for e in spec.guards}, spec.dropped_clauses)


def relaxation_witness(b1: SpecAutomaton, b2: SpecAutomaton) -> frozenset[RemovalAtom] | None:
    """Smallest removal set turning ``b1`` into ``b2``, or None if ``b2`` is
    not a relaxation of ``b1``.

    Clauses are matched by index.  A TRUE guard in ``b2`` is justified by
    emptying the smallest clause of ``b1`` (first one on ties).
    """
    if set(b1.states) != set(b2.states) or b1.initial != b2.initial or b1.finals != b2.finals:
        return None
    if set(b1.guards) != set(b2.guards):
        return None
    atoms: set[RemovalAtom] = set()
    for edge, g1 in b1.guards.items():
        g2 = b2.guards[edge]
        if g1.clauses is None:
            if g2.clauses is not None:
                return None
            continue
        if g2.clauses is None:
            i, c = min(enumerate(g1.clauses), key=lambda ic: (len(ic[1]), ic[0]))
            atoms.update(RemovalAtom(edge, i, lit) for lit in c)
            continue
        if len(g1.clauses) != len(g2.clauses):
            return None
        for i, (c1, c2) in enumerate(zip(g1.clauses, g2.clauses)):
            if not set(c2) <= set(c1):
                return None
            atoms.update(RemovalAtom(edge, i, lit) for lit in c1 if lit not in c2)
    return frozenset(atoms)


def is_relaxation(b1: SpecAutomaton, b2: SpecAutomaton) -> bool:
    return relaxation_witness(b1, b2) is not None
