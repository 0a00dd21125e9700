"""Minimal revision of Büchi specifications that are unsatisfiable on a system model."""
from .automata import (
    Fsm,
    Guard,
    InputError,
    Lasso,
    Literal,
    RemovalAtom,
    SpecAutomaton,
    apply_revision,
    build_product,
    distance,
    is_relaxation,
    is_satisfiable,
    simplify_guard,
)

__version__ = "0.1.0"
