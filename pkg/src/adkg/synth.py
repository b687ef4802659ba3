"""Seeded synthetic cohorts with planted effect sizes and correlations.

Draws are multivariate normal through a Cholesky factor of the requested
correlation matrix, scaled per feature and shifted by group means. Binary
variables come from thresholding a latent Gaussian column at the quantile
matching the target prevalence; ``lognormal`` features are exponentiated
after the shift so they stay positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import ndtri

from adkg.errors import DataError
from adkg.ingest import Cohort, Group, Modality


@dataclass
class CohortSpec:
    modality: Modality
    feature_names: Sequence[str]
    n_per_group: Mapping[str, int]
    seed: int
    means: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    sds: Mapping[str, float] = field(default_factory=dict)
    correlation: np.ndarray | None = None
    target_effects: Sequence[Mapping] = ()
    binary: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    lognormal: Sequence[str] = ()
    id_prefix: str = "s"

    def index(self, feature: str) -> int:
        try:
            return list(self.feature_names).index(feature)
        except ValueError:
            raise DataError(f"unknown feature {feature!r} in cohort spec") from None

    def resolved_correlation(self) -> np.ndarray:
        p = len(self.feature_names)
        c = np.eye(p) if self.correlation is None else np.array(self.correlation, dtype=float)
        if c.shape != (p, p):
            raise DataError(f"correlation must be {p}x{p}, got {c.shape}")
        c = c.copy()
        for eff in self.target_effects:
            if "pair" in eff:
                a, b = (self.index(x) for x in eff["pair"])
                c[a, b] = c[b, a] = float(eff["r"])
        return c

    def resolved_means(self) -> dict:
        p = len(self.feature_names)
        # unspecified entries inherit the CN mean, then 0
        base = np.zeros(p)
        for f, m in (self.means.get("CN") or {}).items():
            base[self.index(f)] = m
        out = {}
        for g in self.n_per_group:
            row = base.copy()
            for f, m in (self.means.get(g) or {}).items():
                row[self.index(f)] = m
            out[g] = row
        sds = self.resolved_sds()
        for eff in self.target_effects:
            if "feature" in eff:
                j = self.index(eff["feature"])
                grp = eff.get("group", "AD")
                ref = eff.get("reference", "CN")
                if grp not in out or ref not in out:
                    raise DataError(f"effect on {eff['feature']!r} references absent group")
                out[grp][j] = out[ref][j] + float(eff["d"]) * sds[j]
        return out

    def resolved_sds(self) -> np.ndarray:
        s = np.ones(len(self.feature_names))
        for f, v in self.sds.items():
            s[self.index(f)] = v
        if np.any(s <= 0):
            raise DataError("standard deviations must be positive")
        return s


def check_correlation(c: np.ndarray) -> None:
    if not np.allclose(c, c.T, atol=1e-12):
        raise DataError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(c), 1.0, atol=1e-12):
        raise DataError("correlation matrix must have unit diagonal")
    if np.any(np.abs(c) > 1.0 + 1e-12):
        raise DataError("correlations must lie in [-1, 1]")
    lo = float(np.linalg.eigvalsh(c).min())
    if lo < -1e-9:
        raise DataError(f"correlation matrix is not positive semidefinite (min eigenvalue {lo:.6g})")


def _factor(c: np.ndarray) -> np.ndarray:
    jitter = 0.0
    for _ in range(8):
        try:
            return np.linalg.cholesky(c + jitter * np.eye(len(c)))
        except np.linalg.LinAlgError:
            jitter = 1e-12 if jitter == 0.0 else jitter * 100
    raise DataError("correlation matrix could not be factorized")


def generate_cohort(spec: CohortSpec) -> Cohort:
    c = spec.resolved_correlation()
    check_correlation(c)
    for g, n in spec.n_per_group.items():
        Group(g)
        if n < 2:
            raise DataError(f"group {g} needs at least 2 subjects, got {n}")
    L = _factor(c)
    means = spec.resolved_means()
    sds = spec.resolved_sds()
    rng = np.random.default_rng(np.random.SeedSequence(int(spec.seed)))
    n_total = sum(spec.n_per_group.values())
    p = len(spec.feature_names)
    z = rng.standard_normal((n_total, p)) @ L.T

    values = np.empty_like(z)
    groups = []
    start = 0
    for g, n in spec.n_per_group.items():
        block = slice(start, start + n)
        values[block] = z[block] * sds + means[g]
        for f, prev in spec.binary.items():
            j = spec.index(f)
            rate = prev.get(g)
            if rate is None or not 0.0 < rate < 1.0:
                raise DataError(f"binary feature {f!r} needs a prevalence in (0,1) for group {g}")
            values[block, j] = (z[block, j] > ndtri(1.0 - rate)).astype(float)
        groups.extend([Group(g)] * n)
        start += n
    for f in spec.lognormal:
        j = spec.index(f)
        values[:, j] = np.exp(values[:, j])
    width = len(str(n_total))
    ids = tuple(f"{spec.id_prefix}{i:0{width}d}" for i in range(n_total))
    return Cohort(spec.modality, ids, tuple(spec.feature_names), values, tuple(groups),
                  notes=(f"synthetic cohort, seed {spec.seed}",))


def spec_from_dict(d: Mapping, seed: int | None = None) -> CohortSpec:
    corr = d.get("correlation")
    effects = []
    for e in d.get("target_effects", ()):
        e = dict(e)
        if "pair" in e:
            e["pair"] = tuple(e["pair"])
        effects.append(e)
    return CohortSpec(
        modality=Modality(d["modality"]),
        feature_names=list(d["features"]),
        n_per_group=dict(d["n_per_group"]),
        seed=int(d.get("seed", 0) if seed is None else seed),
        means={g: dict(m) for g, m in (d.get("means") or {}).items()},
        sds=dict(d.get("sds") or {}),
        correlation=None if corr is None else np.array(corr, dtype=float),
        target_effects=effects,
        binary={f: dict(v) for f, v in (d.get("binary") or {}).items()},
        lognormal=list(d.get("lognormal", ())),
        id_prefix=d.get("id_prefix", "s"),
    )
