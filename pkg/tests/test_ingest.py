import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adkg.errors import DataError, SchemaError
from adkg.ingest import (Cohort, Group, Modality, ModalitySchema, cohort_to_csv, impute, load_modality,
                         log_transform, normalize_by_etiv, read_cohort_csv)
from adkg.synth import CohortSpec, generate_cohort

MRI = ModalitySchema(Modality.MRI, required=("BrainVolume", "CorticalThickness", "eTIV", "ASF"))
CLIN = ModalitySchema(Modality.CLINICAL, required=("MMSE",))


def _cohort(values, groups=None, names=None, modality=Modality.MRI):
    values = np.array(values, dtype=float)
    n, p = values.shape
    groups = groups or [Group.AD] * n
    names = names or [f"f{j}" for j in range(p)]
    return Cohort(modality, tuple(f"s{i}" for i in range(n)), tuple(names), values, tuple(groups))


def test_mri_file_with_paper_group_sizes(tmp_path):
    spec = CohortSpec(Modality.MRI, ["BrainVolume", "CorticalThickness", "eTIV", "ASF"],
                      {"AD": 146, "CN": 190}, seed=3, means={"CN": {"eTIV": 1500, "ASF": 1.2}},
                      sds={"eTIV": 150, "ASF": 0.1})
    path = tmp_path / "mri.csv"
    path.write_text(cohort_to_csv(generate_cohort(spec)))
    c = load_modality(path, MRI)
    assert c.modality is Modality.MRI and c.n == 336
    assert c.group_counts() == {"AD": 146, "CN": 190}


def test_header_only_is_empty_dataset():
    with pytest.raises(DataError, match="empty dataset"):
        read_cohort_csv("subject_id,group,MMSE\n", CLIN)


def test_missing_required_column_is_named():
    with pytest.raises(SchemaError, match="MMSE"):
        read_cohort_csv("subject_id,group,Age\na,AD,70\n", CLIN)


def test_unparseable_cell_reports_line():
    text = "subject_id,group,MMSE\na,AD,20\nb,CN,abc\n"
    with pytest.raises(DataError, match="line 3"):
        read_cohort_csv(text, CLIN)


def test_missing_markers_and_group_aliases():
    text = "# comment\nsubject_id,group,MMSE\na,Demented,\nb,nondemented,NA\nc,Control,29\n"
    c = read_cohort_csv(text, CLIN)
    assert c.groups == (Group.AD, Group.CN, Group.CN)
    assert np.isnan(c.values[:2, 0]).all() and c.values[2, 0] == 29


def test_duplicate_subject_ids_rejected_within_cohort():
    with pytest.raises(SchemaError):
        read_cohort_csv("subject_id,group,MMSE\na,AD,1\na,CN,2\n", CLIN)


def test_subject_ids_may_repeat_across_cohorts():
    a = read_cohort_csv("subject_id,group,MMSE\nx,AD,1\ny,CN,2\n", CLIN)
    b = read_cohort_csv("subject_id,group,BrainVolume,CorticalThickness,eTIV,ASF\nx,AD,1,2,3,4\n", MRI)
    assert a.subject_ids[0] == b.subject_ids[0]


@pytest.mark.parametrize("vol,tiv,want", [(1500, 1500, 1.0), (1200, 1600, 0.75)])
def test_normalize_by_etiv(vol, tiv, want):
    c = normalize_by_etiv(_cohort([[vol, tiv]], names=["BrainVolume", "eTIV"]), ["BrainVolume"])
    assert c.column("BrainVolume")[0] == pytest.approx(want)


@pytest.mark.parametrize("tiv", [0.0, -5.0, math.nan])
def test_normalize_rejects_bad_etiv_naming_subject(tiv):
    c = _cohort([[1.0, 1500], [1.0, tiv]], names=["BrainVolume", "eTIV"])
    with pytest.raises(DataError, match="s1"):
        normalize_by_etiv(c, ["BrainVolume"])


@pytest.mark.parametrize("v,want", [(1.0, 0.0), (math.e ** 2, 2.0)])
def test_log_transform(v, want):
    assert log_transform(_cohort([[v]]), ["f0"]).values[0, 0] == pytest.approx(want, abs=1e-15)


def test_log_of_zero_names_feature_and_subject():
    with pytest.raises(DataError, match="f0.*s0|s0.*f0"):
        log_transform(_cohort([[0.0]]), ["f0"])


def test_feature_above_missing_threshold_dropped():
    col = [math.nan] * 3 + [1.0] * 7
    c = _cohort(np.column_stack([col, np.arange(10.0)]))
    res = impute(c, 0.20)
    assert res.dropped == ("f0",)
    assert res.cohort.feature_names == ("f1",)
    assert res.cohort.n == 10


def test_group_mean_fill():
    res = impute(_cohort([[2.0], [math.nan], [4.0]]), max_missing_frac=0.5)
    assert res.cohort.values[1, 0] == 3.0
    assert res.filled == 1
    assert any("imputation" in n for n in res.cohort.notes)


def test_fill_uses_own_group_only():
    c = _cohort([[2.0], [math.nan], [100.0], [4.0]], groups=[Group.AD, Group.AD, Group.CN, Group.AD])
    assert impute(c, 0.5).cohort.values[1, 0] == 3.0


def test_complete_cohort_unchanged():
    c = _cohort([[1.0, 2.0], [3.0, 4.0]])
    res = impute(c)
    assert res.cohort is c and res.dropped == () and res.filled == 0


def test_feature_missing_in_whole_group_errors():
    c = _cohort([[math.nan], [1.0], [2.0], [3.0], [4.0], [5.0]],
                groups=[Group.AD] + [Group.CN] * 5)
    with pytest.raises(DataError, match="entirely missing"):
        impute(c, 0.5)


values_strategy = st.lists(st.lists(st.one_of(st.floats(0.1, 1e4), st.just(math.nan)), min_size=3, max_size=3),
                           min_size=4, max_size=12)


@settings(max_examples=60, deadline=None)
@given(values_strategy)
def test_impute_is_idempotent_and_keeps_rows(rows):
    groups = [Group.AD if i % 2 else Group.CN for i in range(len(rows))]
    c = _cohort(rows, groups=groups)
    try:
        once = impute(c, 0.5).cohort
    except DataError:
        return
    assert once.n == c.n
    twice = impute(once, 0.5).cohort
    np.testing.assert_array_equal(once.values, twice.values)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(1.0, 1e5), st.floats(500.0, 3000.0)), min_size=1, max_size=20))
def test_normalize_roundtrip(rows):
    c = _cohort(rows, names=["BrainVolume", "eTIV"])
    back = normalize_by_etiv(c, ["BrainVolume"]).column("BrainVolume") * c.column("eTIV")
    np.testing.assert_allclose(back, c.column("BrainVolume"), rtol=1e-12)
