"""Bundled example instances, loaded through importlib.resources.

``two_agent``          two objects moving among three locations each
``labeled_dag``        small graph where the heuristic overpays by one atom
``unbounded_m3..m6``   chained diamonds, heuristic cost m+1 versus optimum 3
``relaxation_quartet`` an original spec and three candidates for ordering
``trivial``            already satisfiable
``infeasible``         no accepting cycle even with every guard relaxed
"""
from __future__ import annotations

import json
from importlib import resources

from ..documents import GraphInstance, Instance, load_document, load_spec

__all__ = ["names", "load_raw", "load", "relaxation_quartet"]


def names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files(__name__).iterdir()
                  if p.name.endswith(".json"))


def load_raw(name: str) -> dict:
    res = resources.files(__name__) / f"{name}.json"
    if not res.is_file():
        raise KeyError(f"no bundled fixture named {name!r}; available: {', '.join(names())}")
    return json.loads(res.read_text(encoding="utf-8"))


def load(name: str) -> Instance | GraphInstance:
    return load_document(load_raw(name))


def relaxation_quartet() -> dict:
    """Name to SpecAutomaton for the four automata of the ordering fixture."""
    raw = load_raw("relaxation_quartet")
    return {k: load_spec(v, where=k)[0] for k, v in raw["specs"].items()}
