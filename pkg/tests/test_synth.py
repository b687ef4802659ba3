import numpy as np
import pytest

from adkg.errors import DataError
from adkg.ingest import Group, Modality, ModalitySchema, cohort_to_csv, read_cohort_csv
from adkg.stats.univariate import cohens_d
from adkg.synth import CohortSpec, check_correlation, generate_cohort, spec_from_dict


def _offdiag(r):
    return r[~np.eye(len(r), dtype=bool)]


def test_identity_correlation_gives_near_zero_r():
    spec = CohortSpec(Modality.CLINICAL, [f"x{i}" for i in range(5)], {"CN": 5000}, seed=11)
    r = np.corrcoef(generate_cohort(spec).values.T)
    assert np.abs(_offdiag(r)).max() < 0.05


def test_unit_mean_shift_gives_d_near_one():
    spec = CohortSpec(Modality.MRI, ["v"], {"AD": 5000, "CN": 5000}, seed=4, means={"AD": {"v": 1.0}})
    c = generate_cohort(spec)
    d = cohens_d(c.column("v")[c.group_mask("AD")], c.column("v")[c.group_mask("CN")])
    assert 0.9 <= d <= 1.1


def test_target_effect_sets_d_in_sd_units():
    spec = CohortSpec(Modality.MRI, ["v"], {"AD": 4000, "CN": 4000}, seed=5, sds={"v": 3.0},
                      means={"CN": {"v": 10.0}}, target_effects=[{"feature": "v", "d": -1.5}])
    c = generate_cohort(spec)
    d = cohens_d(c.column("v")[c.group_mask("AD")], c.column("v")[c.group_mask("CN")])
    assert d == pytest.approx(-1.5, abs=0.1)


def test_unspecified_group_means_inherit_reference():
    spec = CohortSpec(Modality.MRI, ["a", "b"], {"AD": 10, "CN": 10}, seed=0,
                      means={"CN": {"a": 5.0, "b": 7.0}, "AD": {"a": 4.0}})
    m = spec.resolved_means()
    assert list(m["AD"]) == [4.0, 7.0]


def test_tau_mmse_target_correlation():
    spec = CohortSpec(Modality.BIOMARKER, ["Tau_phospho", "MMSE"], {"CN": 2000}, seed=20,
                      target_effects=[{"pair": ("Tau_phospho", "MMSE"), "r": -0.72}])
    c = generate_cohort(spec)
    r = np.corrcoef(c.column("Tau_phospho"), c.column("MMSE"))[0, 1]
    assert -0.80 <= r <= -0.64


def test_large_sample_converges_to_spec():
    corr = np.array([[1.0, 0.5, -0.3], [0.5, 1.0, 0.2], [-0.3, 0.2, 1.0]])
    spec = CohortSpec(Modality.CLINICAL, ["a", "b", "c"], {"CN": 10000}, seed=8, correlation=corr)
    r = np.corrcoef(generate_cohort(spec).values.T)
    assert np.abs(r - corr).max() < 0.03


def test_non_psd_rejected_with_eigenvalue():
    corr = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])
    spec = CohortSpec(Modality.CLINICAL, ["a", "b", "c"], {"CN": 10}, seed=1, correlation=corr)
    with pytest.raises(DataError, match="eigenvalue -0.8"):
        generate_cohort(spec)


@pytest.mark.parametrize("bad", [
    np.array([[1.0, 0.2], [0.3, 1.0]]),
    np.array([[0.9, 0.0], [0.0, 1.0]]),
    np.array([[1.0, 1.2], [1.2, 1.0]]),
])
def test_correlation_invariants_checked(bad):
    with pytest.raises(DataError):
        check_correlation(bad)


def test_too_few_subjects_rejected():
    with pytest.raises(DataError):
        generate_cohort(CohortSpec(Modality.MRI, ["v"], {"AD": 1, "CN": 5}, seed=0))


def test_same_seed_bit_identical_and_seed_matters():
    spec = dict(modality="Clinical", features=["a", "b"], n_per_group={"AD": 30, "CN": 30},
                means={"AD": {"a": 1.0}}, target_effects=[{"pair": ["a", "b"], "r": 0.4}])
    x = generate_cohort(spec_from_dict(spec, seed=9)).values
    y = generate_cohort(spec_from_dict(spec, seed=9)).values
    z = generate_cohort(spec_from_dict(spec, seed=10)).values
    assert x.tobytes() == y.tobytes()
    assert not np.array_equal(x, z)


def test_binary_prevalence_and_lognormal_positive():
    spec = CohortSpec(Modality.CLINICAL, ["Hypertension", "CRP"], {"AD": 4000, "CN": 4000}, seed=2,
                      binary={"Hypertension": {"AD": 0.7, "CN": 0.35}}, lognormal=["CRP"])
    c = generate_cohort(spec)
    h = c.column("Hypertension")
    assert set(np.unique(h)) == {0.0, 1.0}
    assert h[c.group_mask("AD")].mean() == pytest.approx(0.70, abs=0.03)
    assert h[c.group_mask("CN")].mean() == pytest.approx(0.35, abs=0.03)
    assert (c.column("CRP") > 0).all()


def test_csv_roundtrip():
    spec = CohortSpec(Modality.BIOMARKER, ["Amyloid", "Tau_total"], {"AD": 5, "MCI": 4, "CN": 3}, seed=6)
    c = generate_cohort(spec)
    back = read_cohort_csv(cohort_to_csv(c, digits=17), ModalitySchema(Modality.BIOMARKER))
    assert back.subject_ids == c.subject_ids and back.groups == c.groups
    np.testing.assert_array_equal(back.values, c.values)
    assert back.groups.count(Group.MCI) == 4
