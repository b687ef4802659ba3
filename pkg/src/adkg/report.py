"""Markdown report and SVG figures built from rect/circle/text primitives."""

from __future__ import annotations

import io
from html import escape

import numpy as np

from adkg.ingest import Cohort, impute
from adkg.stats.univariate import pearson

AMBIGUITY_NOTES = (
    "Tau elevation is quoted as 2.8-fold in some descriptions and 1.5 to 2-fold in others; "
    "the fold changes below are the ones measured in these data.",
    "Node types: imaging, molecular, clinical and genetic are the four primary types. "
    "EEG features are kept as a fifth type ('eeg') rather than folded into imaging.",
    "EEG percent changes are montage averages (the *_mean features), not single channels.",
    "Missing values are filled with the group mean; features missing in more than 20% of "
    "subjects are dropped before testing.",
    "EEG significance uses a max-statistic permutation correction in place of cluster-based "
    "correction; p_raw for EEG is the per-feature permutation p from the same relabelings.",
    "Clinical odds ratios are per standard deviation for continuous variables and per unit "
    "for 0/1 variables, so the OR gate is scale-aware.",
    "Cross-modality correlations come from a joint correlation cohort, because the modality "
    "cohorts share no subjects.",
)


def correlation_matrix(cohort: Cohort, features) -> tuple:
    c = impute(cohort).cohort
    k = len(features)
    r = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            r[i, j] = r[j, i] = pearson(c.column(features[i]), c.column(features[j]))[0]
    return list(features), r


def _color(r: float) -> str:
    """Diverging blue (-1) / white (0) / red (+1)."""
    t = max(-1.0, min(1.0, r))
    if t >= 0:
        g = int(round(255 * (1 - t)))
        return f"#ff{g:02x}{g:02x}"
    g = int(round(255 * (1 + t)))
    return f"#{g:02x}{g:02x}ff"


def heatmap_svg(features, r, title: str = "Pearson r", stamp: str = "", cell: int = 44) -> str:
    k = len(features)
    left, top = 150, 60
    w, h = left + k * cell + 20, top + k * cell + 120
    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
              f'font-family="sans-serif" font-size="11">\n')
    if stamp:
        out.write(f"<!-- {escape(stamp)} -->\n")
    out.write(f'<text x="{left}" y="24" font-size="14">{escape(title)}</text>\n')
    for i, a in enumerate(features):
        y = top + i * cell
        out.write(f'<text x="{left - 6}" y="{y + cell / 2 + 4:.1f}" text-anchor="end">{escape(a)}</text>\n')
        for j, b in enumerate(features):
            x = left + j * cell
            v = float(r[i, j])
            out.write(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{_color(v)}" '
                      f'stroke="#ffffff" data-row="{escape(a)}" data-col="{escape(b)}" data-r="{v:.4f}"/>\n')
            out.write(f'<text x="{x + cell / 2:.1f}" y="{y + cell / 2 + 4:.1f}" text-anchor="middle">'
                      f"{v:.2f}</text>\n")
    for j, b in enumerate(features):
        x = left + j * cell + cell / 2
        y = top + k * cell + 8
        out.write(f'<text x="{x:.1f}" y="{y}" text-anchor="end" '
                  f'transform="rotate(-60 {x:.1f} {y})">{escape(b)}</text>\n')
    out.write("</svg>\n")
    return out.getvalue()


def scatter_matrix_svg(cohort: Cohort, features, seed: int = 0, stamp: str = "", panel: int = 150,
                       max_points: int = 400, bins: int = 20) -> str:
    c = impute(cohort).cohort
    data = np.column_stack([c.column(f) for f in features])
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(data), size=min(max_points, len(data)), replace=False))
    k = len(features)
    pad = 40
    size = pad + k * panel + 10
    lo, hi = data.min(axis=0), data.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)

    def sx(j, v):
        return 6 + (v - lo[j]) / span[j] * (panel - 12)

    out = io.StringIO()
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
              f'font-family="sans-serif" font-size="11">\n')
    if stamp:
        out.write(f"<!-- {escape(stamp)} -->\n")
    for i in range(k):
        for j in range(k):
            x0, y0 = pad + j * panel, pad + i * panel
            out.write(f'<g transform="translate({x0},{y0})" data-row="{escape(features[i])}" '
                      f'data-col="{escape(features[j])}">\n')
            out.write(f'<rect width="{panel - 4}" height="{panel - 4}" fill="none" stroke="#999999"/>\n')
            if i == j:
                counts, _ = np.histogram(data[:, j], bins=bins, range=(lo[j], hi[j]))
                top = counts.max() or 1
                bw = (panel - 12) / bins
                for b, n in enumerate(counts):
                    bh = n / top * (panel - 30)
                    out.write(f'<rect x="{6 + b * bw:.1f}" y="{panel - 8 - bh:.1f}" width="{bw:.1f}" '
                              f'height="{bh:.1f}" fill="#7799cc"/>\n')
                out.write(f'<text x="8" y="14">{escape(features[i])}</text>\n')
            else:
                for v in idx:
                    px = sx(j, data[v, j])
                    py = panel - 4 - sx(i, data[v, i])
                    out.write(f'<circle cx="{px:.1f}" cy="{py:.1f}" r="1.5" fill="#334466" fill-opacity="0.5"/>\n')
                r = pearson(data[:, i], data[:, j])[0]
                out.write(f'<text x="8" y="14" data-r="{r:.4f}">r = {r:.2f}</text>\n')
            out.write("</g>\n")
    out.write("</svg>\n")
    return out.getvalue()


def _fmt(x, digits=3) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return f"{x:.{digits}g}"
    return str(x)


def _modality_section(buf, name, stats, summ):
    sel = [s for s in stats if s.selected]
    buf.write(f"### {name}\n\n")
    n = summ.get("n", {})
    if n:
        buf.write("Subjects: " + ", ".join(f"{g} {c}" for g, c in n.items()) + ".\n\n")
    if sel:
        buf.write("| feature | test | effect | p_adj |\n|---|---|---|---|\n")
        for s in sorted(sel, key=lambda s: (s.p_adj, s.feature)):
            buf.write(f"| {s.feature} | {s.test} | {s.effect:.3f} | {s.p_adj:.3g} |\n")
        buf.write("\n")
    else:
        buf.write("No feature passed the node thresholds.\n\n")
    if summ.get("percent_change_vs_cn"):
        buf.write("Percent change AD vs CN: " + ", ".join(
            f"{f} {v:+.1f}%" for f, v in summ["percent_change_vs_cn"].items()) + ".\n\n")
    if summ.get("percent_change_vs_cn_montage_avg"):
        buf.write("Montage-average band power change AD vs CN: " + ", ".join(
            f"{f} {v:+.1f}%" for f, v in summ["percent_change_vs_cn_montage_avg"].items()) + ".\n\n")
    if summ.get("fold_change_ad_vs_cn"):
        buf.write("Fold change AD/CN: " + ", ".join(
            f"{f} {v:.2f}" for f, v in summ["fold_change_ad_vs_cn"].items()) + ".\n\n")
    if summ.get("ratio_auc"):
        ra = summ["ratio_auc"]
        buf.write(f"ROC AUC of {ra['ratio']} for AD vs CN: {ra['auc']:.3f}.\n\n")
    if summ.get("odds_ratio"):
        buf.write("| variable | OR | 95% CI | scale |\n|---|---|---|---|\n")
        for f, o in summ["odds_ratio"].items():
            buf.write(f"| {f} | {o['or']:.2f} | {o['ci95'][0]:.2f} to {o['ci95'][1]:.2f} | {o['scale']} |\n")
        buf.write("\n")
    if summ.get("enrichment"):
        buf.write("| gene set | overlap | p | p_adj |\n|---|---|---|---|\n")
        for gs, e in summ["enrichment"].items():
            buf.write(f"| {gs} | {e['overlap']} | {e['p']:.3g} | {e['p_adj']:.3g} |\n")
        buf.write("\n")
    cls = summ.get("classification")
    if cls:
        top = list(cls["gini_importance"].items())[:5]
        buf.write(f"Random forest {cls['cv_folds']}-fold CV accuracy {cls['cv_accuracy_mean']:.3f} "
                  f"(sd {cls['cv_accuracy_sd']:.3f}); top Gini importances: "
                  + ", ".join(f"{f} {v:.3f}" for f, v in top) + ".\n\n")
    if summ.get("dropped_for_missingness"):
        buf.write("Dropped for missingness: " + ", ".join(summ["dropped_for_missingness"]) + ".\n\n")


def markdown_report(prov, stats, summary, metrics, comms, hyps=None, val=None, heat=None, scatter=None) -> str:
    buf = io.StringIO()
    buf.write("# Multimodal Alzheimer's knowledge graph report\n\n")
    buf.write(f"Config hash `{prov['config_sha256']}`, seed {prov['seed']}.\n\n")
    buf.write("## Per-modality findings\n\n")
    for name, summ in summary.items():
        _modality_section(buf, name, [s for s in stats if s.modality.value == summ["modality"]], summ)

    buf.write("## Knowledge graph\n\n")
    buf.write(f"{metrics['n_nodes']} nodes and {metrics['n_edges']} edges.\n\n")
    buf.write("Nodes by type: " + ", ".join(f"{k} {v}" for k, v in metrics["nodes_by_type"].items()) + ".\n\n")
    buf.write("Edges by category: " + ", ".join(f"{k} {v}" for k, v in metrics["edges_by_category"].items())
              + ".\n\n")
    buf.write(f"Average clustering {_fmt(metrics['clustering_coefficient'])}, average shortest path "
              f"{_fmt(metrics['avg_path_length'])}.\n\n")
    bc = metrics["betweenness"]
    buf.write("| most central node | betweenness |\n|---|---|\n")
    for v in metrics["most_central"][:5]:
        buf.write(f"| {v} | {bc[v]:.3f} |\n")
    buf.write("\n")
    if metrics.get("skipped_unselected"):
        buf.write("Relationships skipped because an endpoint was not selected: "
                  + ", ".join(metrics["skipped_unselected"]) + ".\n\n")

    buf.write("## Communities\n\n")
    buf.write(f"Louvain found {len(comms['communities'])} communities, modularity Q = {comms['modularity']:.3f}.\n\n")
    buf.write("| community | size | modalities |\n|---|---|---|\n")
    for i, (c, comp) in enumerate(zip(comms["communities"], comms["composition"]), start=1):
        buf.write(f"| {i} | {len(c)} | " + ", ".join(f"{k} {v}" for k, v in comp.items()) + " |\n")
    buf.write("\n")

    buf.write("## Hypotheses\n\n")
    if hyps is None:
        buf.write("Hypothesis stage not run.\n\n")
    else:
        cons = hyps.get("consensus")
        if cons:
            buf.write(f"Model agreement (mean pairwise Jaccard of canonical triples): {cons['rate']:.3f}.\n\n")
        buf.write("| id | triples | models | consensus | novelty | impact |\n|---|---|---|---|---|---|\n")
        for h in hyps["hypotheses"]:
            trip = "; ".join(f"{t['subject']} {t['relation']} {t['object']}" for t in h["triples"])
            impact = h["scores"]["impact"] if h.get("scores") else None
            buf.write(f"| {h['id']} | {trip} | {', '.join(h['models'])} | {h['consensus']:.2f} | "
                      f"{_fmt(h['novelty'])} | {_fmt(impact)} |\n")
        buf.write("\n")

    buf.write("## Validation\n\n")
    if val is None:
        buf.write("Validation stage not run.\n\n")
    else:
        buf.write("| metric | observed | null mean | p |\n|---|---|---|---|\n")
        for m, r in sorted(val["graph_metric_pvalues"].items()):
            buf.write(f"| {m} | {r['observed']:.4f} | {r['null_mean']:.4f} | {r['p']:.4g} |\n")
        buf.write("\n")
        if val.get("kappas"):
            ks = [v for per in val["kappas"].values() for v in per.values()]
            buf.write(f"Cohen's kappa over {len(val['kappas'])} rater pairs: mean {np.mean(ks):.3f}, "
                      f"range {min(ks):.3f} to {max(ks):.3f}.\n\n")
        if val.get("replication"):
            buf.write("| relationship | CV % | pass |\n|---|---|---|\n")
            for rel, r in sorted(val["replication"].items()):
                buf.write(f"| {rel} | {r['dispersion_pct']:.1f} | {r['passed']} |\n")
            buf.write("\n")

    buf.write("## Figures\n\n")
    if heat is not None:
        feats, r = heat
        buf.write("- `heatmap.svg`: correlation heatmap")
        if "Tau_phospho" in feats and "MMSE" in feats:
            buf.write(f" (Tau_phospho vs MMSE r = {r[feats.index('Tau_phospho'), feats.index('MMSE')]:.2f})")
        buf.write("\n")
    if scatter:
        buf.write(f"- `scatter_matrix.svg`: scatter matrix of {', '.join(scatter)}\n")
    buf.write("\n## Notes on interpretation\n\n")
    for n in AMBIGUITY_NOTES:
        buf.write(f"- {n}\n")
    return buf.getvalue()

