"""Pipeline configuration: a single YAML file with strict key checking."""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import yaml

from adkg.errors import PipelineError

# allowed keys per section; None means "free-form mapping"
SCHEMA = {
    "seed": int,
    "workers": int,
    "thresholds": {"p": float, "d": float, "odds_ratio": float, "log2fc": float, "r_min": float},
    "datasets": None,
    "synthetic": {
        "cohorts": None,
        "eeg": {"n_per_group": None, "fs": float, "seconds": float, "alpha_amp": None, "beta_amp": None,
                "subject_sd": float, "noise": float, "shared": float},
        "correlation_cohorts": None,
        "replication": {"base": str, "n_cohorts": int, "n": int},
    },
    "eeg_features": {"bands": list, "coherence_pairs": list},
    "analysis": None,
    "correlations": {"cohorts": list},
    "relations": list,
    "node_attrs": None,
    "graph": {"resolution": float, "exports": list},
    "validation": {"n_null": int, "swaps_per_edge": int, "null_model": str, "metrics": list,
                   "direction": None, "replicate": list, "replication_threshold_pct": float, "raters": list},
    "providers": list,
    "prompt": {"budget": int, "stages": list},
    "literature": {"kind": str, "path": str, "default": int, "endpoint": str,
                   "reference_year": int, "window_years": int},
    "report": {"heatmap_cohort": str, "heatmap_features": list, "scatter_features": list},
}

ANALYSIS_KEYS = {"volume_features", "log_features", "exclude", "max_missing_frac", "n_perm", "ratio",
                 "forest", "cv_folds", "classify", "enet_lambda", "enet_mix", "gene_sets"}
FOREST_KEYS = {"n_trees", "max_depth", "min_leaf", "mtry"}
PROVIDER_KEYS = {"name", "kind", "endpoint", "model", "credential_env", "api_style", "response_file",
                 "n_edges", "timeout"}
DATASET_KEYS = {"path", "schema", "manifest", "fs"}
SCHEMA_KEYS = {"modality", "required", "group_column", "id_column", "group_aliases"}
RELATION_KEYS = {"cohort", "outcome", "predictors"}

DEFAULTS = {
    "workers": 1,
    "thresholds": {"p": 0.05, "d": 0.5, "odds_ratio": 1.5, "log2fc": 2.0, "r_min": 0.3},
    "graph": {"resolution": 1.0, "exports": ["json", "graphml", "dot"]},
    "validation": {"n_null": 1000, "swaps_per_edge": 10, "null_model": "degree_preserving",
                   "metrics": ["clustering", "path_length", "modularity"], "direction": {},
                   "replicate": [], "replication_threshold_pct": 15.0, "raters": []},
    "prompt": {"budget": 20000, "stages": ["known", "novel", "hypotheses"]},
    "literature": {"kind": "mock", "default": 0, "reference_year": 2025, "window_years": 10},
    "providers": [{"name": "mock", "kind": "mock"}],
    "correlations": {"cohorts": []},
    "relations": [],
    "analysis": {},
    "eeg_features": {"bands": ["delta", "theta", "alpha", "beta"], "coherence_pairs": []},
}


def _check(d, schema, path):
    if not isinstance(d, dict):
        raise PipelineError(f"config section {path or '<root>'} must be a mapping")
    for k, v in d.items():
        where = f"{path}.{k}" if path else k
        if k not in schema:
            raise PipelineError(f"unknown config key {where!r}")
        rule = schema[k]
        if isinstance(rule, dict):
            _check(v, rule, where)
        elif rule is float and not isinstance(v, (int, float)):
            raise PipelineError(f"config key {where!r} must be a number")
        elif rule in (int, str, list) and not isinstance(v, rule):
            raise PipelineError(f"config key {where!r} must be {rule.__name__}")


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise PipelineError(f"{where} must be a mapping")
    bad = sorted(set(d) - set(allowed))
    if bad:
        raise PipelineError(f"unknown config key(s) {bad} in {where}")


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


class PipelineConfig:
    """Validated configuration plus the directory relative paths resolve against."""

    def __init__(self, data: dict, base_dir: Path):
        _check(data, SCHEMA, "")
        if "seed" not in data:
            raise PipelineError("config must set a seed")
        for name, mod in (data.get("analysis") or {}).items():
            _check_keys(mod, ANALYSIS_KEYS, f"analysis.{name}")
            if "forest" in mod:
                _check_keys(mod["forest"], FOREST_KEYS, f"analysis.{name}.forest")
        for name, ds in (data.get("datasets") or {}).items():
            _check_keys(ds, DATASET_KEYS, f"datasets.{name}")
            if "schema" in ds:
                _check_keys(ds["schema"], SCHEMA_KEYS, f"datasets.{name}.schema")
        for i, p in enumerate(data.get("providers") or []):
            _check_keys(p, PROVIDER_KEYS, f"providers[{i}]")
            if p.get("kind") not in ("mock", "http"):
                raise PipelineError(f"providers[{i}].kind must be 'mock' or 'http'")
        for i, r in enumerate(data.get("relations") or []):
            _check_keys(r, RELATION_KEYS, f"relations[{i}]")
        self.data = _merge(DEFAULTS, data)
        th = self.data["thresholds"]
        if any(v <= 0 for v in th.values()):
            raise PipelineError("thresholds must be positive")
        self.base_dir = Path(base_dir)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise PipelineError(f"config file not found: {path}") from None
        except yaml.YAMLError as exc:
            raise PipelineError(f"config does not parse: {exc}") from None
        return cls(data or {}, path.parent)

    def __getitem__(self, key):
        return self.data[key]

    def get(self, key, default=None):
        return self.data.get(key, default)

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    def override(self, *, seed=None, offline=False, workers=None) -> "PipelineConfig":
        data = copy.deepcopy(self.data)
        if seed is not None:
            data["seed"] = int(seed)
        if offline:
            data["providers"] = [{**{k: v for k, v in p.items() if k in ("name", "response_file", "n_edges")},
                                  "kind": "mock"} for p in data["providers"]]
            if data["literature"].get("kind") != "mock":
                data["literature"] = {**data["literature"], "kind": "mock"}
        if workers is not None:
            data["workers"] = int(workers)
        out = PipelineConfig.__new__(PipelineConfig)
        out.data, out.base_dir = data, self.base_dir
        return out

    def resolve(self, rel) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p

    def digest(self) -> str:
        """Hash of everything that can change artifacts (worker count excluded)."""
        d = {k: v for k, v in self.data.items() if k != "workers"}
        return hashlib.sha256(json.dumps(d, sort_keys=True, default=str).encode()).hexdigest()

    def provenance(self) -> dict:
        return {"config_sha256": self.digest(), "seed": self.seed}


def bundled_config_path() -> Path:
    return Path(__file__).parent / "data" / "synthetic.yaml"
