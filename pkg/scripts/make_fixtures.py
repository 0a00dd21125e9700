"""One-off generator for the bundled fixture JSON files (kept outside the package)."""
import json, pathlib
from specrev.documents import instance_document, graph_document, dumps
from specrev.automata import Fsm, SpecAutomaton
from specrev.bench import gen_unbounded_instance
from specrev.revgraph import RevisionGraph

out = pathlib.Path("/root/pkg/src/specrev/fixtures")

def two_agent():
    moves = [("1", "2"), ("2", "1"), ("2", "3"), ("3", "2")]
    states = [f"q1{i}_q2{j}" for i in "123" for j in "123"]
    edges = []
    for i in "123":
        for j in "123":
            for a, b in moves:
                if a == i: edges.append((f"q1{i}_q2{j}", f"q1{b}_q2{j}"))
                if a == j: edges.append((f"q1{i}_q2{j}", f"q1{i}_q2{b}"))
    labels = {f"q1{i}_q2{j}": [f"p1{i}", f"p2{j}"] for i in "123" for j in "123"}
    fsm = Fsm(states, ["q11_q21"], edges, labels)
    tr = [("s1", "s3", [["p13", "p23"]]), ("s2", "s3", [["p13", "p23"]]),
          ("s1", "s2", [["!p13"]]), ("s2", "s1", [["p23"]]),
          ("s3", "s4", [["!p13"]]), ("s4", "s3", [["p23"]]),
          ("s1", "s1", [["p23"]]), ("s2", "s2", [["!p13"]]),
          ("s3", "s3", [["p23"]]), ("s4", "s4", [["!p13"]])]
    spec = SpecAutomaton.from_raw(["s1", "s2", "s3", "s4"], "s1", ["s3"], tr)
    return instance_document(fsm, spec)

def labeled_dag():
    E = [("v1","v2",{"a1"}),("v1","v3",{"a1","a3"}),("v3","v4",{"a1","a4"}),("v2","v4",{"a2"}),
         ("v4","v5",{"a4"}),("v5","v6",{"a3"}),("v6","v5",{"a4"}),("v2","v2",{"a1"})]
    g = RevisionGraph.from_edges(["v1","v2","v3","v4","v5","v6"], E, ["v1"], ["v6"],
                                 atoms=["a1","a2","a3","a4"])
    return graph_document(g)

def trivial():
    fsm = Fsm(["q0","q1"], ["q0"], [("q0","q1"),("q1","q1")], {"q1": ["a"]})
    spec = SpecAutomaton.from_raw(["s0","s1"], "s0", ["s1"], [("s0","s1","true"),("s1","s1",[["a"]])])
    return instance_document(fsm, spec)

def infeasible():
    # the accepting state has no way back to itself, so no guard edit helps
    fsm = Fsm(["q0","q1"], ["q0"], [("q0","q1"),("q1","q0")], {"q0": ["a"], "q1": ["b"]})
    spec = SpecAutomaton.from_raw(["s0","s1"], "s0", ["s1"],
                                  [("s0","s0",[["a"]]),("s0","s1",[["a","b"]])])
    return instance_document(fsm, spec)

def quartet():
    from specrev.documents import spec_document
    base = [("0","0",[["!p0"],["p2"]]),("0","1",[["!p0","p1"]]),("0","2",[["!p0","p1","p2"]]),
            ("1","1",[["!p0"]]),("1","2",[["!p0","p2"]]),("2","2",[["!p0"]])]
    b1 = [("0","0","true"),("0","1",[["!p0","p1"]]),("0","2",[["p2"]]),
          ("1","1","true"),("1","2",[["!p0","p2"]]),("2","2",[["!p0"]])]
    b2 = [t for t in base if t[:2] != ("0","1")]
    b3 = base + [("2","0",[["p2"]])]
    mk = lambda tr: spec_document(SpecAutomaton.from_raw(["0","1","2"], "0", ["2"], tr))
    return {"specs": {"original": mk(base), "b1": mk(b1), "b2": mk(b2), "b3": mk(b3)},
            "expected": {"b1": "relaxation", "b2": "incomparable", "b3": "incomparable"}}

docs = {"two_agent": two_agent(), "labeled_dag": labeled_dag(), "trivial": trivial(),
        "infeasible": infeasible(), "relaxation_quartet": quartet()}
for m in range(3, 7):
    docs[f"unbounded_m{m}"] = instance_document(*gen_unbounded_instance(m))
for name, d in docs.items():
    (out / f"{name}.json").write_text(dumps(d))
print(sorted(docs))
