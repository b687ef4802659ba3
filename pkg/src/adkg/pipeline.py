"""Pipeline stages. Each stage reads the previous stage's artifacts from the
output directory and writes its own; every artifact carries the config hash
and seed.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from adkg import report as report_mod
from adkg.config import PipelineConfig
from adkg.errors import AdkgError, DataError, ParseError, PipelineError, ProviderError
from adkg.hypoth import (
    Hypothesis,
    HttpProvider,
    MockLiterature,
    MockProvider,
    PubMedClient,
    Rubric,
    consensus,
    novelty_score,
    parse_hypotheses,
    serialize_graph_prompt,
    sort_hypotheses,
)
from adkg.ingest import Cohort, Group, Modality, ModalitySchema, impute, load_modality, log_transform
from adkg.ingest import cohort_to_csv, normalize_by_etiv, schema_from_dict
from adkg.kgraph import BuildReport, EffectRelation, KnowledgeGraph, build_graph, louvain
from adkg.kgraph.export import FORMATS, from_json, to_json
from adkg.kgraph.metrics import avg_path_length, betweenness, clustering_coefficient, local_clustering
from adkg.parallel import derived_seed, pmap, substream
from adkg.signal import read_eeg_csv, recordings_to_cohort, synthetic_recording, write_eeg_csv
from adkg.stats import ForestParams, Thresholds, pearson
from adkg.stats.battery import AnalysisOptions, analyze
from adkg.stats.logistic import logistic_regression
from adkg.stats.tables import (
    correlation_table,
    read_correlations,
    read_feature_stats,
    write_correlations,
    write_feature_stats,
)
from adkg.synth import generate_cohort, spec_from_dict
from adkg.validate import (
    CRITERIA,
    ValidationReport,
    graph_permutation_tests,
    pairwise_kappas,
    read_rater_scores,
    replication_check,
)

LOGGER = logging.getLogger(__name__)

STAGES = ("ingest", "analyze", "build-graph", "communities", "hypothesize", "validate", "report")

COHORT_MANIFEST = "cohorts/manifest.json"
FEATURE_STATS = "tables/feature_stats.csv"
CORRELATIONS = "tables/correlations.csv"
RELATIONS = "tables/relations.csv"
REPLICATION = "tables/replication.json"
SUMMARY = "tables/summary.json"
GRAPH = "graph/graph.json"
GRAPH_METRICS = "graph/metrics.json"
COMMUNITIES = "graph/communities.json"
HYPOTHESES = "hypotheses/hypotheses.json"
VALIDATION = "validation/validation.json"


def _clean(x):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, Modality) or isinstance(x, Group):
        return x.value
    return x


class Run:
    """Output directory plus configuration; knows how to stamp artifacts."""

    def __init__(self, cfg: PipelineConfig, out: Path):
        self.cfg = cfg
        self.out = Path(out)
        self.prov = cfg.provenance()
        self.workers = int(cfg["workers"])

    @property
    def stamp(self) -> str:
        return f"config_sha256={self.prov['config_sha256']} seed={self.prov['seed']}"

    def path(self, rel: str) -> Path:
        return self.out / rel

    def need(self, rel: str, producer: str) -> Path:
        p = self.path(rel)
        if not p.exists():
            raise PipelineError(f"missing prerequisite artifact {rel} (run '{producer}' first)")
        return p

    def write_text(self, rel: str, text: str) -> Path:
        p = self.path(rel)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(text.encode("utf-8"))
        return p

    def write_json(self, rel: str, obj: dict) -> Path:
        obj = dict(_clean(obj))
        obj["provenance"] = self.prov
        return self.write_text(rel, json.dumps(obj, sort_keys=True, indent=2) + "\n")

    def read_json(self, rel: str, producer: str) -> dict:
        return json.loads(self.need(rel, producer).read_text(encoding="utf-8"))

    def seed(self, *tags) -> int:
        return derived_seed(self.cfg.seed, *tags)


# ---------------------------------------------------------------- ingest

def _synthetic_eeg(run: Run, params: dict, bands, pairs) -> Cohort:
    fs = float(params.get("fs", 128))
    seconds = float(params.get("seconds", 20))
    sd = float(params.get("subject_sd", 0.15))
    alpha = params.get("alpha_amp", {"AD": 0.8, "CN": 1.0})
    beta = params.get("beta_amp", {"AD": 0.4, "CN": 0.5})
    subjects = []
    for g, n in params["n_per_group"].items():
        subjects.extend([Group(g)] * int(n))
    width = len(str(len(subjects)))
    seed = run.seed("eeg")

    def make(i):
        rng = substream(seed, i)
        group = subjects[i]
        scale = np.exp(sd * rng.standard_normal(2))
        return synthetic_recording(rng, f"eeg{i:0{width}d}", group, fs=fs, seconds=seconds,
                                   alpha_amp=float(alpha[group.value]) * scale[0],
                                   beta_amp=float(beta[group.value]) * scale[1],
                                   noise=float(params.get("noise", 1.0)), shared=float(params.get("shared", 0.5)))

    recs = pmap(make, range(len(subjects)), run.workers)
    entries = []
    for rec in recs:
        rel = f"eeg/{rec.subject_id}.csv"
        run.write_text(rel, write_eeg_csv(rec, run.stamp))
        entries.append({"file": f"{rec.subject_id}.csv", "subject_id": rec.subject_id, "group": rec.group.value})
    run.write_json("eeg/manifest.json", {"fs": fs, "recordings": entries})
    return _eeg_from_manifest(run, run.path("eeg/manifest.json"), bands, pairs)


def _eeg_from_manifest(run: Run, manifest: Path, bands, pairs, fs=None) -> Cohort:
    try:
        meta = json.loads(Path(manifest).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"EEG manifest not found: {manifest}") from None
    fs = float(meta.get("fs", fs or 0))
    entries = meta.get("recordings") or []
    if not entries:
        raise DataError(f"{manifest}: no recordings listed")

    def load(entry):
        rec = read_eeg_csv(Path(manifest).parent / entry["file"], float(entry.get("fs", fs)),
                           entry["subject_id"], entry["group"])
        return recordings_to_cohort([rec], bands, pairs)

    parts = pmap(load, entries, run.workers)
    first = parts[0]
    return Cohort(Modality.EEG, tuple(p.subject_ids[0] for p in parts), first.feature_names,
                  np.vstack([p.values for p in parts]), tuple(p.groups[0] for p in parts), notes=first.notes)


def ingest(run: Run) -> dict:
    cfg = run.cfg
    syn = cfg.get("synthetic") or {}
    bands = list(cfg["eeg_features"]["bands"])
    pairs = [tuple(p) for p in cfg["eeg_features"]["coherence_pairs"]]
    cohorts = {}

    for name, ds in (cfg.get("datasets") or {}).items():
        if "manifest" in ds:
            cohorts[name] = ("modality", _eeg_from_manifest(run, cfg.resolve(ds["manifest"]), bands, pairs,
                                                            ds.get("fs")))
        else:
            if "path" not in ds or "schema" not in ds:
                raise PipelineError(f"datasets.{name} needs path and schema (or an EEG manifest)")
            cohorts[name] = ("modality", load_modality(cfg.resolve(ds["path"]), schema_from_dict(ds["schema"])))

    def add(name, role, cohort):
        if name in cohorts:
            raise PipelineError(f"cohort {name!r} defined twice")
        cohorts[name] = (role, cohort)

    for name, spec in (syn.get("cohorts") or {}).items():
        add(name, "modality", generate_cohort(spec_from_dict(spec, seed=run.seed("cohort", name))))
    if "eeg" in syn:
        add("EEG", "modality", _synthetic_eeg(run, syn["eeg"], bands, pairs))
    corr_specs = syn.get("correlation_cohorts") or {}
    for name, spec in corr_specs.items():
        add(name, "correlation", generate_cohort(spec_from_dict(spec, seed=run.seed("cohort", name))))
    rep = syn.get("replication")
    if rep:
        base = corr_specs.get(rep["base"])
        if base is None:
            raise PipelineError(f"replication base {rep['base']!r} is not a correlation cohort")
        groups = list(base["n_per_group"])
        n = int(rep.get("n", 150))
        sizes = {g: n // len(groups) + (1 if i < n % len(groups) else 0) for i, g in enumerate(groups)}
        for k in range(int(rep.get("n_cohorts", 3))):
            spec = dict(base, n_per_group=sizes, id_prefix=f"rep{k + 1}_")
            add(f"replication_{k + 1}", "replication",
                generate_cohort(spec_from_dict(spec, seed=run.seed("replication", k))))

    modalities = [c.modality for role, c in cohorts.values() if role == "modality"]
    if len(set(modalities)) != len(modalities):
        raise PipelineError("each modality may appear in only one modality cohort")
    manifest = {}
    for name in sorted(cohorts):
        role, c = cohorts[name]
        rel = f"cohorts/{name}.csv"
        run.write_text(rel, cohort_to_csv(c, run.stamp))
        manifest[name] = {"file": f"{name}.csv", "modality": c.modality.value, "role": role,
                          "n": c.n, "groups": c.group_counts(), "features": list(c.feature_names)}
    run.write_json(COHORT_MANIFEST, {"cohorts": manifest})
    return manifest


def load_cohorts(run: Run, roles=("modality", "correlation", "replication")) -> dict:
    meta = run.read_json(COHORT_MANIFEST, "ingest")["cohorts"]
    out = {}
    for name, m in meta.items():
        if m["role"] not in roles:
            continue
        schema = ModalitySchema(Modality(m["modality"]), tuple(m["features"]))
        out[name] = (m["role"], load_modality(run.path(f"cohorts/{m['file']}"), schema))
    return out


# ---------------------------------------------------------------- analyze

def _options(run: Run, name: str) -> AnalysisOptions:
    d = dict(run.cfg["analysis"].get(name) or {})
    forest = ForestParams(**dict(d.pop("forest", {}) or {}), seed=run.seed("forest", name))
    if "ratio" in d:
        d["ratio"] = tuple(d["ratio"])
    return AnalysisOptions(**d, forest=forest, seed=run.seed("analysis", name), workers=run.workers)


def _preprocessed(cohort: Cohort, opts: AnalysisOptions) -> Cohort:
    c = impute(cohort, opts.max_missing_frac).cohort
    if cohort.modality is Modality.MRI and opts.volume_features:
        c = normalize_by_etiv(c, opts.volume_features)
    if opts.log_features:
        c = log_transform(c, opts.log_features)
    return c


def _relations(run: Run, cohorts: dict) -> list:
    rows = []
    for i, rel in enumerate(run.cfg["relations"]):
        if rel["cohort"] not in cohorts:
            raise PipelineError(f"relations[{i}]: unknown cohort {rel['cohort']!r}")
        c = impute(cohorts[rel["cohort"]][1]).cohort
        y = c.column(rel["outcome"])
        if not set(np.unique(y)) <= {0.0, 1.0}:
            raise DataError(f"relations[{i}]: outcome {rel['outcome']!r} must be 0/1")
        for pred in rel["predictors"]:
            x = c.column(pred)
            z = (x - x.mean()) / x.std()
            fit = logistic_regression(z[:, None], y.astype(int), names=(pred,))
            rows.append({"feature_a": pred, "feature_b": rel["outcome"], "effect": float(fit.odds_ratios[1]),
                         "source": "odds_ratio", "p": float(fit.wald_p[1]), "cohort": rel["cohort"]})
    return rows


def _write_relations(run: Run, rows) -> None:
    lines = [f"# {run.stamp}", "feature_a,feature_b,source,effect,p,cohort"]
    for r in rows:
        lines.append(f"{r['feature_a']},{r['feature_b']},{r['source']},{r['effect']!r},{r['p']!r},{r['cohort']}")
    run.write_text(RELATIONS, "\n".join(lines) + "\n")


def read_relations(text: str) -> list:
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")][1:]
    out = []
    for ln in rows:
        a, b, source, effect, p, _ = ln.split(",")
        out.append(EffectRelation(a, b, float(effect), source))
    return out


def analyze_stage(run: Run) -> dict:
    cohorts = load_cohorts(run)
    th = Thresholds(**run.cfg["thresholds"])
    stats, summary, modality_of, prepped = [], {}, {}, {}
    order = sorted((n for n, (role, _) in cohorts.items() if role == "modality"),
                   key=lambda n: list(Modality).index(cohorts[n][1].modality))
    for name in order:
        cohort = cohorts[name][1]
        opts = _options(run, name)
        LOGGER.info("analyzing %s (%d subjects)", name, cohort.n)
        res = analyze(cohort, opts, th)
        stats.extend(res.stats)
        summary[name] = {"modality": cohort.modality.value, **res.summary}
        for s in res.stats:
            modality_of[s.feature] = s.modality
        prepped[name] = _preprocessed(cohort, opts)
    run.write_text(FEATURE_STATS, write_feature_stats(stats, run.stamp))

    entries = []
    for name in run.cfg["correlations"]["cohorts"]:
        if name not in cohorts:
            raise PipelineError(f"correlations: unknown cohort {name!r}")
        c = prepped[name] if name in prepped else impute(cohorts[name][1]).cohort
        feats = [f for f in c.feature_names if f in modality_of]
        entries.extend(correlation_table(c, feats, modality_of))
    run.write_text(CORRELATIONS, write_correlations(entries, run.stamp))
    _write_relations(run, _relations(run, cohorts))

    rep = {}
    reps = sorted(n for n, (role, _) in cohorts.items() if role == "replication")
    for rel in run.cfg["validation"]["replicate"]:
        a, b = rel.split("~")
        rep[rel] = [pearson(cohorts[n][1].column(a), cohorts[n][1].column(b))[0] for n in reps]
    run.write_json(REPLICATION, {"cohorts": reps, "effects": rep, "effect": "pearson_r"})
    run.write_json(SUMMARY, {"modalities": summary})
    return summary


# ---------------------------------------------------------------- graph

def load_graph(run: Run) -> KnowledgeGraph:
    return from_json(run.need(GRAPH, "build-graph").read_text(encoding="utf-8"))


def build_graph_stage(run: Run) -> KnowledgeGraph:
    stats = read_feature_stats(run.need(FEATURE_STATS, "analyze").read_text(encoding="utf-8"))
    corr = read_correlations(run.need(CORRELATIONS, "analyze").read_text(encoding="utf-8"))
    rels = read_relations(run.need(RELATIONS, "analyze").read_text(encoding="utf-8"))
    rep = BuildReport()
    g = build_graph(stats, corr, Thresholds(**run.cfg["thresholds"]), rels,
                    run.cfg.get("node_attrs") or {}, rep)
    if len(g) == 0:
        raise DataError("no feature passed the node thresholds; the graph is empty")
    for fmt in run.cfg["graph"]["exports"]:
        if fmt not in FORMATS:
            raise PipelineError(f"unknown export format {fmt!r}")
        run.write_text(f"graph/graph.{fmt}", FORMATS[fmt](g, run.prov))
    if "json" not in run.cfg["graph"]["exports"]:
        run.write_text(GRAPH, to_json(g, run.prov))
    bc = betweenness(g)
    metrics = {
        "n_nodes": len(g),
        "n_edges": len(g.edges),
        "nodes_by_type": _count(n.node_type for n in g.nodes),
        "edges_by_category": _count(e.category for e in g.edges),
        "betweenness": bc,
        "local_clustering": local_clustering(g),
        "clustering_coefficient": clustering_coefficient(g),
        "avg_path_length": avg_path_length(g) if g.edges else None,
        "most_central": sorted(bc, key=lambda v: (-bc[v], v))[:10],
        "skipped_unselected": sorted({f"{a}~{b}" for a, b in rep.skipped_unselected}),
        "below_r_min": rep.below_threshold,
        "not_significant": rep.not_significant,
    }
    run.write_json(GRAPH_METRICS, metrics)
    return g


def _count(items) -> dict:
    out = {}
    for x in items:
        out[x] = out.get(x, 0) + 1
    return dict(sorted(out.items()))


def communities_stage(run: Run) -> dict:
    g = load_graph(run)
    res = louvain(g, float(run.cfg["graph"]["resolution"]), run.seed("louvain"))
    comms = [sorted(c) for c in res.communities]
    data = {"modularity": res.modularity, "levels": res.levels, "communities": comms,
            "partition": dict(sorted(res.partition.items())),
            "composition": [_count(g.node(v).modality.value for v in c) for c in comms]}
    run.write_json(COMMUNITIES, data)
    return data


# ---------------------------------------------------------------- hypotheses

def _provider(cfg: PipelineConfig, p: dict, g: KnowledgeGraph):
    if p["kind"] == "mock":
        rf = p.get("response_file")
        return MockProvider(p["name"], g, str(cfg.resolve(rf)) if rf else None, int(p.get("n_edges", 3)))
    for key in ("endpoint", "model"):
        if key not in p:
            raise PipelineError(f"provider {p['name']!r} needs {key}")
    return HttpProvider(p["name"], p["endpoint"], p["model"], p.get("credential_env"),
                        p.get("api_style", "openai"), float(p.get("timeout", 60.0)))


def _literature(cfg: PipelineConfig):
    lit = cfg["literature"]
    if lit.get("kind") == "pubmed":
        return PubMedClient(lit.get("endpoint", "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esearch.fcgi"))
    path = lit.get("path")
    return MockLiterature(cfg.resolve(path) if path else None, default=lit.get("default", 0))


def hyp_to_dict(h: Hypothesis) -> dict:
    d = {"id": h.id, "model_id": h.model_id, "narrative": h.narrative, "reasoning": h.reasoning,
         "triples": [{"subject": t.subject, "relation": t.relation, "object": t.object} for t in h.triples],
         "novelty": h.novelty, "scores": None}
    if h.scores:
        d["scores"] = {"biological_plausibility": h.scores.biological_plausibility,
                       "literature_support": h.scores.literature_support,
                       "testability": h.scores.testability, "impact": h.scores.impact}
    d.update({k: v for k, v in h.extra.items() if k not in d})
    return d


def _rater_files(run: Run) -> list:
    files = [run.cfg.resolve(p) for p in run.cfg["validation"]["raters"]]
    for f in files:
        if not f.exists():
            raise PipelineError(f"rater file not found: {f}")
    return files


def _rubrics(run: Run) -> dict:
    """Per-hypothesis rubric from the rounded mean of all raters' scores."""
    files = _rater_files(run)
    if not files:
        return {}
    merged = {}
    for f in files:
        for rater, per in read_rater_scores(Path(f).read_text(encoding="utf-8")).items():
            for crit, scores in per.items():
                for hid, v in scores.items():
                    merged.setdefault(hid, {}).setdefault(crit, []).append(v)
    out = {}
    for hid, per in merged.items():
        if set(per) == set(CRITERIA):
            out[hid] = Rubric(*(int(math.floor(sum(per[c]) / len(per[c]) + 0.5)) for c in CRITERIA))
    return out


def hypothesize_stage(run: Run) -> dict:
    g = load_graph(run)
    cfg = run.cfg
    budget = int(cfg["prompt"]["budget"])
    stages = list(cfg["prompt"]["stages"])
    if not stages or stages[-1] != "hypotheses":
        raise PipelineError("prompt.stages must end with 'hypotheses'")
    prompts = {s: serialize_graph_prompt(g, budget, s) for s in stages}
    for s, text in prompts.items():
        run.write_text(f"hypotheses/prompts/{s}.txt", f"# {run.stamp}\n{text}")
    specs = cfg["providers"]
    names = [p["name"] for p in specs]
    if len(set(names)) != len(names):
        raise PipelineError("provider names must be unique")
    providers = [_provider(cfg, p, g) for p in specs]

    def ask(provider):  # one in-flight request per provider
        return {s: provider.complete(prompts[s]) for s in stages}

    answers = pmap(ask, providers, max(1, min(run.workers, len(providers))))
    by_model, rejected = {}, []
    nodes = set(g.node_ids)
    for spec, provider, ans in zip(specs, providers, answers):
        for s, text in ans.items():
            run.write_text(f"hypotheses/raw/{spec['name']}.{s}.txt", f"# {run.stamp}\n{text}")
        try:
            hyps = parse_hypotheses(ans["hypotheses"], provider.model_id)
        except ParseError as exc:
            raise ParseError(f"provider {spec['name']}: {exc}", raw=exc.raw, position=exc.position) from None
        kept = []
        for h in hyps:
            bad = sorted(h.node_ids - nodes)
            if bad:
                LOGGER.warning("%s/%s references unknown node(s) %s; dropped", spec["name"], h.id, bad)
                rejected.append({"model": spec["name"], "id": h.id, "unknown_nodes": bad})
            else:
                kept.append(h)
        by_model[spec["name"]] = kept

    report = consensus(by_model) if len(by_model) >= 2 else None
    merged = {}
    for name in names:
        for h in by_model[name]:
            cur = merged.get(h.key)
            if cur is None:
                merged[h.key] = (h, [name])
            else:
                best = h if len(h.narrative) > len(cur[0].narrative) else cur[0]
                merged[h.key] = (best, cur[1] + [name])
    rubrics = _rubrics(run)
    lit = _literature(cfg)
    ref_year = int(cfg["literature"]["reference_year"])
    window = int(cfg["literature"]["window_years"])
    final = []
    for key, (h, models) in merged.items():
        hid = h.content_id()
        extra = {"models": sorted(models), "consensus": len(set(models)) / len(names)}
        try:
            nov = novelty_score(h, lit, ref_year, window)
            novelty = nov.score
            extra.update(literature_hits=nov.hits, literature_query=nov.query)
        except ProviderError as exc:
            LOGGER.warning("novelty for %s left unscored: %s", hid, exc)
            novelty = None
            extra["novelty_error"] = str(exc)
        final.append(replace(h, id=hid, model_id=",".join(sorted(set(models))), novelty=novelty,
                             scores=rubrics.get(hid), extra=extra))
    final = sort_hypotheses(final)
    data = {
        "hypotheses": [hyp_to_dict(h) for h in final],
        "by_model": {m: [hyp_to_dict(h) for h in sorted(by_model[m], key=lambda x: x.id)] for m in names},
        "rejected": rejected,
        "consensus": None if report is None else {"rate": report.rate, "pairwise": report.pairwise,
                                                  "counts": report.counts},
        "metric": "mean pairwise Jaccard of canonical triple sets",
    }
    run.write_json(HYPOTHESES, data)
    return data


# ---------------------------------------------------------------- validate

def validate_stage(run: Run) -> ValidationReport:
    g = load_graph(run)
    v = run.cfg["validation"]
    res = graph_permutation_tests(g, v["metrics"], int(v["n_null"]), run.seed("nulls"), v.get("direction") or {},
                                  v["null_model"], int(v["swaps_per_edge"]),
                                  float(run.cfg["graph"]["resolution"]), run.workers)
    rep = ValidationReport(graph_metric_pvalues=res)
    hyp_path = run.path(HYPOTHESES)
    if hyp_path.exists():
        c = json.loads(hyp_path.read_text(encoding="utf-8")).get("consensus")
        rep.consensus_rate = None if c is None else c["rate"]
    else:
        rep.notes.append("no hypotheses artifact; consensus not reported")
    files = _rater_files(run)
    if files:
        scores = {}
        for f in files:
            for rater, per in read_rater_scores(Path(f).read_text(encoding="utf-8")).items():
                if rater in scores:
                    raise DataError(f"rater {rater!r} appears in more than one file")
                scores[rater] = per
        try:
            rep.kappas = pairwise_kappas(scores)
        except DataError as exc:
            rep.notes.append(f"kappa not computed: {exc}")
    if v["replicate"]:
        effects = run.read_json(REPLICATION, "analyze")["effects"]
        missing = [r for r in v["replicate"] if r not in effects]
        if missing:
            raise PipelineError(f"{REPLICATION} lacks {missing}; re-run 'analyze'")
        rep.replication = replication_check({r: effects[r] for r in v["replicate"]},
                                            float(v["replication_threshold_pct"]))
        rep.notes.append("replication effects are Pearson r in independently seeded validation cohorts")
    rep.notes.append(f"null model: {v['null_model']}, {v['swaps_per_edge']} swaps per edge, "
                     "metrics on the unweighted topology")
    run.write_text(VALIDATION, rep.to_json(run.prov))
    run.write_text("validation/validation.md", f"<!-- {run.stamp} -->\n{rep.to_markdown(run.prov)}")
    return rep


# ---------------------------------------------------------------- report

def report_stage(run: Run) -> None:
    stats = read_feature_stats(run.need(FEATURE_STATS, "analyze").read_text(encoding="utf-8"))
    summary = run.read_json(SUMMARY, "analyze")["modalities"]
    metrics = run.read_json(GRAPH_METRICS, "build-graph")
    comms = run.read_json(COMMUNITIES, "communities")
    hyps = json.loads(run.path(HYPOTHESES).read_text(encoding="utf-8")) if run.path(HYPOTHESES).exists() else None
    val = json.loads(run.path(VALIDATION).read_text(encoding="utf-8")) if run.path(VALIDATION).exists() else None
    rcfg = run.cfg.get("report") or {}
    cohorts = load_cohorts(run, roles=("modality", "correlation"))
    heat = scatter = None
    if rcfg.get("heatmap_cohort"):
        name = rcfg["heatmap_cohort"]
        if name not in cohorts:
            raise PipelineError(f"report.heatmap_cohort {name!r} is not a cohort")
        c = cohorts[name][1]
        feats = rcfg.get("heatmap_features") or list(c.feature_names)
        heat = report_mod.correlation_matrix(c, feats)
        run.write_text("report/heatmap.svg", report_mod.heatmap_svg(*heat, title=f"Pearson r ({name} cohort)",
                                                                  stamp=run.stamp))
        sf = rcfg.get("scatter_features")
        if sf:
            scatter = sf
            run.write_text("report/scatter_matrix.svg",
                           report_mod.scatter_matrix_svg(c, sf, seed=run.seed("scatter"), stamp=run.stamp))
    text = report_mod.markdown_report(run.prov, stats, summary, metrics, comms, hyps, val, heat, scatter)
    run.write_text("report/report.md", f"<!-- {run.stamp} -->\n{text}")


RUNNERS = {
    "ingest": ingest,
    "analyze": analyze_stage,
    "build-graph": build_graph_stage,
    "communities": communities_stage,
    "hypothesize": hypothesize_stage,
    "validate": validate_stage,
    "report": report_stage,
}


def run_stage(stage: str, cfg: PipelineConfig, out) -> None:
    run = Run(cfg, Path(out))
    stages = STAGES if stage == "all" else (stage,)
    for s in stages:
        if s not in RUNNERS:
            raise PipelineError(f"unknown stage {s!r}")
        LOGGER.info("stage %s", s)
        RUNNERS[s](run)


__all__ = ["STAGES", "Run", "run_stage", "AdkgError"]
