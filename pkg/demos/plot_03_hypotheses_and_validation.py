"""
Hypotheses from several models and agreement checks
===================================================

Serialize a graph into a prompt, collect hypotheses from offline mock
providers, measure cross-model consensus and run the replication gate.
"""

from importlib import resources

from adkg.hypoth import MockProvider, consensus, parse_hypotheses, serialize_graph_prompt
from adkg.kgraph import build_graph
from adkg.kgraph.generators import pathway_inputs
from adkg.validate import cohens_kappa, replication_check

g = build_graph(*pathway_inputs())
prompt = serialize_graph_prompt(g, 2000, "hypotheses")
print(prompt[:300], "...")

mock = MockProvider(name="local", graph=g, n_edges=3)
hyps = parse_hypotheses(mock.complete(prompt), mock.model_id)
for h in hyps:
    print(h.id, [(t.subject, t.relation, t.object) for t in h.triples])

# three bundled transcripts that only partly agree
folder = resources.files("adkg") / "data" / "mock_divergent"
by_model = {f.name: parse_hypotheses(f.read_text(), f.name) for f in sorted(folder.iterdir())}
print("consensus rate", round(consensus(by_model).rate, 3))

print("kappa", round(cohens_kappa([1, 1, 2, 2, 3, 3], [1, 1, 2, 3, 3, 3]), 3))
for name, r in replication_check({"tau~mmse": [-0.70, -0.74, -0.69]}).items():
    print(name, f"CV {r.dispersion_pct:.1f}%", "pass" if r.passed else "fail")
