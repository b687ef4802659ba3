"""Loading and preprocessing of per-modality cohort tables.

Each modality arrives as its own CSV with its own subjects. Subject ids are
kept as opaque strings and are never matched across cohorts.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from adkg.errors import DataError, SchemaError

LOGGER = logging.getLogger(__name__)

MISSING_MARKERS = frozenset({"", "NA", "na", "NaN", "nan"})


class Modality(str, Enum):
    MRI = "MRI"
    EEG = "EEG"
    BIOMARKER = "Biomarker"
    CLINICAL = "Clinical"
    GENE_EXPRESSION = "GeneExpression"


class Group(str, Enum):
    AD = "AD"
    MCI = "MCI"
    CN = "CN"


DEFAULT_GROUP_ALIASES = {
    "ad": Group.AD,
    "alzheimer": Group.AD,
    "alzheimers": Group.AD,
    "demented": Group.AD,
    "mci": Group.MCI,
    "converted": Group.MCI,
    "cn": Group.CN,
    "control": Group.CN,
    "nondemented": Group.CN,
    "hc": Group.CN,
}


@dataclass(frozen=True)
class SubjectRow:
    subject_id: str
    values: tuple
    group: Group


@dataclass(frozen=True)
class ModalitySchema:
    """Column expectations for one modality's CSV file."""

    modality: Modality
    required: tuple = ()
    group_column: str = "group"
    id_column: str | None = "subject_id"
    group_aliases: Mapping[str, Group] = field(default_factory=dict)

    def resolve_group(self, label: str) -> Group:
        key = label.strip().lower()
        aliases = {k.lower(): Group(v) for k, v in self.group_aliases.items()}
        if key in aliases:
            return aliases[key]
        if key in DEFAULT_GROUP_ALIASES:
            return DEFAULT_GROUP_ALIASES[key]
        raise SchemaError(f"unknown group label {label!r}")


@dataclass(frozen=True, eq=False)
class Cohort:
    """One modality's subjects x features table.

    ``values`` is an (n_subjects, n_features) float array with NaN marking
    missing cells.
    """

    modality: Modality
    subject_ids: tuple
    feature_names: tuple
    values: np.ndarray
    groups: tuple
    notes: tuple = ()

    def __post_init__(self):
        n, p = self.values.shape
        if len(self.subject_ids) != n or len(self.groups) != n:
            raise DataError("subject ids, groups and value rows disagree in length")
        if len(self.feature_names) != p:
            raise DataError("feature names and value columns disagree in length")
        if len(set(self.feature_names)) != p:
            raise SchemaError("feature names must be unique within a cohort")
        if len(set(self.subject_ids)) != n:
            raise SchemaError("subject ids must be unique within a cohort")
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def subjects(self) -> list[SubjectRow]:
        out = []
        for sid, row, g in zip(self.subject_ids, self.values, self.groups):
            vals = tuple(None if math.isnan(v) else float(v) for v in row)
            out.append(SubjectRow(sid, vals, g))
        return out

    def column(self, feature: str) -> np.ndarray:
        try:
            j = self.feature_names.index(feature)
        except ValueError:
            raise SchemaError(f"feature {feature!r} not in {self.modality.value} cohort") from None
        return self.values[:, j]

    def group_mask(self, group: Group | str) -> np.ndarray:
        g = Group(group)
        return np.array([x is g for x in self.groups], dtype=bool)

    def group_counts(self) -> dict:
        return {g.value: int(self.group_mask(g).sum()) for g in Group if self.group_mask(g).any()}

    def require_two_groups(self):
        if len({g for g in self.groups}) < 2:
            raise DataError(f"{self.modality.value} cohort needs at least two groups")

    def with_values(self, values, feature_names=None, note=None) -> "Cohort":
        notes = self.notes + ((note,) if note else ())
        return replace(
            self,
            values=np.array(values, dtype=float),
            feature_names=tuple(feature_names if feature_names is not None else self.feature_names),
            notes=notes,
        )


def _parse_cell(text: str, line: int, column: str) -> float:
    if text.strip() in MISSING_MARKERS:
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise DataError(f"line {line}: cannot parse {text!r} in column {column!r}") from None


def read_cohort_csv(source, schema: ModalitySchema) -> Cohort:
    """Parse CSV text (or an open file) into a Cohort. Lines starting with '#' are skipped."""
    if isinstance(source, str):
        source = io.StringIO(source)
    lines = [(i + 1, ln) for i, ln in enumerate(source) if not ln.startswith("#")]
    if not lines:
        raise SchemaError("missing header row")
    reader = csv.reader([ln for _, ln in lines])
    header = [h.strip() for h in next(reader)]
    line_numbers = [i for i, _ in lines[1:]]
    for col in (*schema.required, schema.group_column):
        if col not in header:
            raise SchemaError(f"missing required column {col!r}")
    if schema.id_column and schema.id_column not in header:
        raise SchemaError(f"missing required column {schema.id_column!r}")
    skip = {schema.group_column, schema.id_column}
    features = [h for h in header if h not in skip]
    ids, groups, rows = [], [], []
    for lineno, rec in zip(line_numbers, reader):
        if not rec or all(not c.strip() for c in rec):
            continue
        if len(rec) != len(header):
            raise DataError(f"line {lineno}: expected {len(header)} cells, got {len(rec)}")
        cells = dict(zip(header, rec))
        ids.append(cells[schema.id_column].strip() if schema.id_column else f"row{len(ids)}")
        groups.append(schema.resolve_group(cells[schema.group_column]))
        rows.append([_parse_cell(cells[f], lineno, f) for f in features])
    if not rows:
        raise DataError("empty dataset")
    values = np.array(rows, dtype=float).reshape(len(rows), len(features))
    cohort = Cohort(schema.modality, tuple(ids), tuple(features), values, tuple(groups))
    LOGGER.info("loaded %s cohort: %d rows, %d features", schema.modality.value, cohort.n, len(features))
    return cohort


def load_modality(path, schema: ModalitySchema) -> Cohort:
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        return read_cohort_csv(fh, schema)


def cohort_to_csv(cohort: Cohort, header_comment: str | None = None, digits: int = 10) -> str:
    """Serialize in the same layout ``read_cohort_csv`` consumes."""
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["subject_id", "group", *cohort.feature_names])
    for sid, g, row in zip(cohort.subject_ids, cohort.groups, cohort.values):
        w.writerow([sid, g.value, *("NA" if math.isnan(v) else f"{v:.{digits}g}" for v in row)])
    return buf.getvalue()


def normalize_by_etiv(cohort: Cohort, volume_features: Sequence[str], etiv: str = "eTIV") -> Cohort:
    """Divide each listed volume by the subject's estimated total intracranial volume."""
    tiv = cohort.column(etiv)
    for sid, v in zip(cohort.subject_ids, tiv):
        if math.isnan(v) or v <= 0:
            raise DataError(f"subject {sid}: eTIV must be positive, got {v}")
    values = np.array(cohort.values, dtype=float)
    for f in volume_features:
        if f == etiv:
            raise DataError("eTIV cannot normalize itself")
        j = cohort.feature_names.index(f) if f in cohort.feature_names else None
        if j is None:
            raise SchemaError(f"feature {f!r} not in cohort")
        values[:, j] = values[:, j] / tiv
    return cohort.with_values(values, note=f"normalized by {etiv}: {', '.join(volume_features)}")


def log_transform(cohort: Cohort, features: Iterable[str]) -> Cohort:
    values = np.array(cohort.values, dtype=float)
    features = list(features)
    for f in features:
        j = cohort.feature_names.index(f) if f in cohort.feature_names else None
        if j is None:
            raise SchemaError(f"feature {f!r} not in cohort")
        col = values[:, j]
        bad = np.flatnonzero(~np.isnan(col) & (col <= 0))
        if bad.size:
            sid = cohort.subject_ids[bad[0]]
            raise DataError(f"log of nonpositive value in {f!r} for subject {sid}")
        values[:, j] = np.log(col)
    return cohort.with_values(values, note=f"natural log: {', '.join(features)}")


@dataclass(frozen=True)
class ImputationResult:
    cohort: Cohort
    dropped: tuple
    filled: int


def impute(cohort: Cohort, max_missing_frac: float = 0.20) -> ImputationResult:
    """Drop features missing above the threshold, fill the rest with group-wise means.

    Deterministic group-mean filling stands in for stochastic multiple
    imputation; the substitution is recorded in the cohort notes.
    """
    if not 0.0 <= max_missing_frac <= 1.0:
        raise DataError("max_missing_frac must lie in [0, 1]")
    miss = np.isnan(cohort.values)
    frac = miss.mean(axis=0)
    keep = [j for j in range(len(cohort.feature_names)) if frac[j] <= max_missing_frac]
    dropped = tuple(cohort.feature_names[j] for j in range(len(cohort.feature_names)) if j not in keep)
    if dropped:
        LOGGER.info("dropping features above %.0f%% missing: %s", 100 * max_missing_frac, dropped)
    values = np.array(cohort.values[:, keep], dtype=float)
    names = [cohort.feature_names[j] for j in keep]
    filled = int(np.isnan(values).sum())
    if filled == 0 and not dropped:
        return ImputationResult(cohort, (), 0)
    for g in set(cohort.groups):
        mask = cohort.group_mask(g)
        block = values[mask]
        for j, name in enumerate(names):
            col = block[:, j]
            holes = np.isnan(col)
            if not holes.any():
                continue
            if holes.all():
                raise DataError(f"feature {name!r} entirely missing in group {g.value}")
            col[holes] = col[~holes].mean()
            block[:, j] = col
        values[mask] = block
    note = f"group-mean imputation ({filled} cells); dropped {list(dropped)}"
    return ImputationResult(cohort.with_values(values, names, note=note), dropped, filled)


def schema_from_dict(d: Mapping) -> ModalitySchema:
    aliases = {k: Group(v) for k, v in (d.get("group_aliases") or {}).items()}
    return ModalitySchema(
        modality=Modality(d["modality"]),
        required=tuple(d.get("required", ())),
        group_column=d.get("group_column", "group"),
        id_column=d.get("id_column", "subject_id"),
        group_aliases=aliases,
    )
