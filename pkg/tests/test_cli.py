import json
import re

import pytest

from adkg.cli import main
from adkg.config import PipelineConfig, bundled_config_path

# plain-text artifacts use "key=value"; GraphML and DOT embed the provenance dict
STAMP = re.compile(r'config_sha256"?[=:] ?"?([0-9a-f]{64})"?,? "?seed"?[=:] ?(\d+)')


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_prerequisite_missing_exits_2(tmp_path, capsys):
    assert main(["build-graph", "--out", str(tmp_path / "o")]) == 2
    assert "feature_stats" in capsys.readouterr().err


def test_unknown_stage_exits_2(capsys):
    assert main(["frobnicate"]) == 2


def test_workers_must_be_positive(tmp_path):
    assert main(["ingest", "--workers", "0", "--out", str(tmp_path)]) == 2


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = write(tmp_path, "c.yaml", "seed: 1\nbogus: 2\n")
    assert main(["ingest", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "bogus" in capsys.readouterr().err


def test_missing_seed_exits_2(tmp_path):
    cfg = write(tmp_path, "c.yaml", "workers: 1\n")
    assert main(["ingest", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_data_error_exits_1(tmp_path, capsys):
    write(tmp_path, "clin.csv", "subject_id,group,MMSE,Age\ns1,AD,20,70\ns2,CN,abc,71\n")
    cfg = write(tmp_path, "c.yaml", "seed: 3\ndatasets:\n"
                "  Clinical: {path: clin.csv, schema: {modality: Clinical, required: [MMSE]}}\n")
    assert main(["ingest", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "DataError" in err and "line 3" in err and "MMSE" in err


def test_every_artifact_is_stamped(offline_run):
    digest = PipelineConfig.load(bundled_config_path()).override(offline=True).digest()
    files = [p for p in offline_run.rglob("*") if p.is_file()]
    assert len(files) > 50
    for p in files:
        text = p.read_text(encoding="utf-8")
        if p.suffix == ".json":
            prov = json.loads(text)["provenance"]
            assert prov == {"config_sha256": digest, "seed": 20250611}, p
        else:
            m = STAMP.search(text)
            assert m and m.group(1) == digest and m.group(2) == "20250611", p


def test_expected_artifacts(offline_run):
    for rel in ["tables/feature_stats.csv", "graph/graph.json", "graph/graph.graphml", "graph/graph.dot",
                "hypotheses/hypotheses.json", "validation/validation.json", "report/report.md",
                "report/heatmap.svg"]:
        assert (offline_run / rel).is_file(), rel


def test_heatmap_cell_matches_planted_correlation(offline_run):
    svg = (offline_run / "report" / "heatmap.svg").read_text()
    cells = {(a, b): float(r) for a, b, r in
             re.findall(r'data-row="([^"]+)" data-col="([^"]+)" data-r="([^"]+)"', svg)}
    assert cells[("Tau_phospho", "MMSE")] == pytest.approx(-0.72, abs=0.08)
    assert cells[("MMSE", "Tau_phospho")] == cells[("Tau_phospho", "MMSE")]


def test_seed_override_changes_stamp(tmp_path):
    out = tmp_path / "o"
    assert main(["ingest", "--seed", "7", "--out", str(out)]) == 0
    head = (out / "cohorts" / "MRI.csv").read_text().splitlines()[0]
    assert head.endswith("seed=7")
    manifest = json.loads((out / "cohorts" / "manifest.json").read_text())
    assert manifest["provenance"]["seed"] == 7
