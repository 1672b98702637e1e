from collections import Counter

import pytest

from carenotes.bundle import serialize_case_bundle
from carenotes.model import UrgencyLabel, validate_case
from carenotes.simulate import CohortSpec, generate_case, generate_cohort
from carenotes.triage import TriageConfig, classify, detect_trends, summarize_adherence

CONFIG = TriageConfig.default()


def label_of(case) -> UrgencyLabel:
    return classify(
        case, summarize_adherence(case), detect_trends(case, CONFIG), CONFIG
    ).label


def test_label_targeting_thousand_seed_sweep():
    for seed in range(1000):
        target = list(UrgencyLabel)[seed % 3]
        condition = ("hypertension", "type2_diabetes")[seed % 2]
        case = generate_case(seed, target, condition)
        assert validate_case(case) == []
        assert label_of(case) is target


def test_same_seed_byte_identical():
    a = serialize_case_bundle(generate_case(5, UrgencyLabel.ATTENTION))
    b = serialize_case_bundle(generate_case(5, UrgencyLabel.ATTENTION))
    assert a == b


def test_different_seeds_differ_same_histogram():
    mix = {UrgencyLabel.URGENT: 3, UrgencyLabel.ATTENTION: 2, UrgencyLabel.STABLE: 1}
    cohort_a = generate_cohort(CohortSpec(seed=1, mix=mix))
    cohort_b = generate_cohort(CohortSpec(seed=2, mix=mix))
    assert [serialize_case_bundle(c) for c in cohort_a] != [
        serialize_case_bundle(c) for c in cohort_b
    ]
    hist_a = Counter(label_of(c).value for c in cohort_a)
    hist_b = Counter(label_of(c).value for c in cohort_b)
    assert hist_a == hist_b == {"urgent": 3, "attention": 2, "stable": 1}


def test_minimal_cohort_single_stable():
    cohort = generate_cohort(
        CohortSpec(seed=4, mix={UrgencyLabel.STABLE: 1})
    )
    assert len(cohort) == 1
    assert label_of(cohort[0]) is UrgencyLabel.STABLE


def test_cohort_mix_14_8_2():
    spec = CohortSpec(
        seed=7,
        mix={UrgencyLabel.URGENT: 14, UrgencyLabel.ATTENTION: 8, UrgencyLabel.STABLE: 2},
    )
    cohort = generate_cohort(spec)
    assert len(cohort) == 24
    assert len({c.case_id for c in cohort}) == 24
    hist = Counter(label_of(c).value for c in cohort)
    assert hist == {"urgent": 14, "attention": 8, "stable": 2}


def test_urgent_variants_alternate_by_seed():
    even = generate_case(40, UrgencyLabel.URGENT)
    odd = generate_case(41, UrgencyLabel.URGENT)
    result_even = classify(
        even, summarize_adherence(even), detect_trends(even, CONFIG), CONFIG
    )
    result_odd = classify(
        odd, summarize_adherence(odd), detect_trends(odd, CONFIG), CONFIG
    )
    assert result_even.failsafe_triggered
    assert result_even.rule_floor is UrgencyLabel.STABLE
    assert not result_odd.failsafe_triggered
    assert result_odd.rule_floor is UrgencyLabel.URGENT


def test_unknown_condition_rejected():
    with pytest.raises(ValueError):
        generate_case(1, UrgencyLabel.STABLE, condition="gout")


def test_period_days_respected():
    case = generate_case(3, UrgencyLabel.STABLE, period_days=14)
    assert case.reporting_period.days == 14
    assert all(len(s.samples) == 14 for s in case.vitals)
