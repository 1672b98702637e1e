from dataclasses import replace
from datetime import date, datetime

import pytest

from carenotes.model import (
    DialogueTurn,
    MedicationRecord,
    MonitoringTask,
    Patient,
    PatientCase,
    ReportingPeriod,
    Sex,
    Speaker,
    UrgencyLabel,
    VitalSample,
    VitalSeries,
    VitalType,
    severity_max,
    validate_case,
)
from carenotes.simulate import generate_case

LABELS = (UrgencyLabel.STABLE, UrgencyLabel.ATTENTION, UrgencyLabel.URGENT)


def make_case(**overrides) -> PatientCase:
    base = PatientCase(
        case_id="case-1",
        patient=Patient(age=67, sex=Sex.FEMALE),
        conditions=("hypertension",),
        medications=(
            MedicationRecord(
                name="Lisinopril",
                dose="10 mg",
                schedule=1,
                refill_dates=(date(2025, 3, 1),),
                recorded_doses=7,
            ),
        ),
        vitals=(
            VitalSeries(
                vital_type=VitalType.SYSTOLIC_BP,
                unit="mmHg",
                samples=(
                    VitalSample(datetime(2025, 3, 1, 8), 120.0),
                    VitalSample(datetime(2025, 3, 2, 8), 122.0),
                ),
            ),
        ),
        dialogue=(
            DialogueTurn(
                speaker=Speaker.PATIENT,
                timestamp=datetime(2025, 3, 3, 10),
                text="All good this week.",
            ),
        ),
        monitoring_tasks=(
            MonitoringTask(
                task_id="bp-daily",
                condition="hypertension",
                description="Measure blood pressure",
                required_frequency=1.0,
                critical=True,
                completion_timestamps=(datetime(2025, 3, 1, 9),),
            ),
        ),
        reporting_period=ReportingPeriod(date(2025, 3, 1), date(2025, 3, 7)),
    )
    return replace(base, **overrides)


def test_well_formed_case_has_no_issues():
    assert validate_case(make_case()) == []


def test_unsorted_vital_samples_flagged():
    case = make_case(
        vitals=(
            VitalSeries(
                vital_type=VitalType.SYSTOLIC_BP,
                unit="mmHg",
                samples=(
                    VitalSample(datetime(2025, 3, 2, 8), 122.0),
                    VitalSample(datetime(2025, 3, 1, 8), 120.0),
                ),
            ),
        )
    )
    issues = validate_case(case)
    assert len(issues) == 1
    assert issues[0].field_path == "vitals[0].samples"


def test_task_referencing_absent_condition_flagged():
    # Start from a simulator case, then corrupt the task's condition ref.
    case = generate_case(11, UrgencyLabel.STABLE)
    assert validate_case(case) == []
    bad_task = replace(case.monitoring_tasks[0], condition="asthma")
    corrupted = replace(
        case, monitoring_tasks=(bad_task,) + case.monitoring_tasks[1:]
    )
    issues = validate_case(corrupted)
    assert len(issues) == 1
    assert issues[0].field_path == "monitoring_tasks[0].condition"
    assert "asthma" in issues[0].rule


def test_sample_after_period_end_flagged():
    case = make_case(
        vitals=(
            VitalSeries(
                vital_type=VitalType.GLUCOSE,
                unit="mg/dL",
                samples=(VitalSample(datetime(2025, 3, 9, 8), 110.0),),
            ),
        )
    )
    issues = validate_case(case)
    assert [i.field_path for i in issues] == ["vitals[0].samples[0].timestamp"]


def test_nonfinite_value_and_empty_unit_flagged():
    case = make_case(
        vitals=(
            VitalSeries(
                vital_type=VitalType.GLUCOSE,
                unit="",
                samples=(VitalSample(datetime(2025, 3, 2, 8), float("nan")),),
            ),
        )
    )
    paths = {i.field_path for i in validate_case(case)}
    assert paths == {"vitals[0].unit", "vitals[0].samples[0].value"}
    infinite = make_case(
        vitals=(
            VitalSeries(
                vital_type=VitalType.GLUCOSE,
                unit="mg/dL",
                samples=(VitalSample(datetime(2025, 3, 2, 8), float("inf")),),
            ),
        )
    )
    assert [i.field_path for i in validate_case(infinite)] == [
        "vitals[0].samples[0].value"
    ]


def test_sample_before_period_start_is_allowed():
    case = make_case(
        vitals=(
            VitalSeries(
                vital_type=VitalType.GLUCOSE,
                unit="mg/dL",
                samples=(VitalSample(datetime(2025, 2, 20, 8), 110.0),),
            ),
        )
    )
    assert validate_case(case) == []


def test_inverted_period_flagged():
    case = make_case(
        reporting_period=ReportingPeriod(date(2025, 3, 7), date(2025, 3, 1)),
        vitals=(),
        monitoring_tasks=(),
    )
    assert any(i.field_path == "reporting_period" for i in validate_case(case))


def test_completion_outside_period_flagged():
    case = make_case(
        monitoring_tasks=(
            MonitoringTask(
                task_id="bp-daily",
                condition="hypertension",
                description="Measure blood pressure",
                required_frequency=1.0,
                critical=True,
                completion_timestamps=(datetime(2025, 2, 1, 9),),
            ),
        )
    )
    issues = validate_case(case)
    assert [i.field_path for i in issues] == [
        "monitoring_tasks[0].completion_timestamps[0]"
    ]


def test_validate_case_is_pure():
    case = make_case()
    first = validate_case(case)
    second = validate_case(case)
    assert first == second
    corrupted = make_case(case_id="")
    assert validate_case(corrupted) == validate_case(corrupted)


def test_period_days_inclusive():
    assert ReportingPeriod(date(2025, 3, 1), date(2025, 3, 7)).days == 7
    assert ReportingPeriod(date(2025, 3, 1), date(2025, 3, 1)).days == 1


# -- severity_max: exhaustive over all 9 pairs ---------------------------------


def test_severity_max_examples():
    assert severity_max(UrgencyLabel.STABLE, UrgencyLabel.STABLE) is UrgencyLabel.STABLE
    assert severity_max(UrgencyLabel.ATTENTION, UrgencyLabel.URGENT) is UrgencyLabel.URGENT
    assert severity_max(UrgencyLabel.URGENT, UrgencyLabel.STABLE) is UrgencyLabel.URGENT


def test_severity_max_commutative_idempotent_associative():
    for a in LABELS:
        assert severity_max(a, a) is a
        for b in LABELS:
            assert severity_max(a, b) is severity_max(b, a)
            for c in LABELS:
                assert severity_max(severity_max(a, b), c) is severity_max(
                    a, severity_max(b, c)
                )


def test_severity_max_urgent_absorbing_stable_identity():
    for label in LABELS:
        assert severity_max(label, UrgencyLabel.URGENT) is UrgencyLabel.URGENT
        assert severity_max(label, UrgencyLabel.STABLE) is label
