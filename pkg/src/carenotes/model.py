"""Shared domain types and their validation invariants. No I/O here.

All types are frozen dataclasses over tuples, so values are immutable after
construction and safe to share across concurrent readers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime
from enum import Enum


class Sex(str, Enum):
    FEMALE = "female"
    MALE = "male"
    OTHER = "other"


class VitalType(str, Enum):
    SYSTOLIC_BP = "systolic_bp"
    DIASTOLIC_BP = "diastolic_bp"
    GLUCOSE = "glucose"
    HEART_RATE = "heart_rate"
    WEIGHT = "weight"


class Speaker(str, Enum):
    PATIENT = "patient"
    CLINICIAN = "clinician"
    SYSTEM = "system"


class AdherenceSignal(str, Enum):
    REPORTED_MISSED_DOSE = "reported_missed_dose"
    REPORTED_SIDE_EFFECT = "reported_side_effect"
    REPORTED_ADHERENT = "reported_adherent"
    NONE = "none"


class UrgencyLabel(str, Enum):
    """Case urgency with total severity order stable < attention < urgent."""

    STABLE = "stable"
    ATTENTION = "attention"
    URGENT = "urgent"


_SEVERITY = {UrgencyLabel.STABLE: 0, UrgencyLabel.ATTENTION: 1, UrgencyLabel.URGENT: 2}


def severity(label: UrgencyLabel) -> int:
    return _SEVERITY[label]


def severity_max(a: UrgencyLabel, b: UrgencyLabel) -> UrgencyLabel:
    """Return the higher-severity of two labels."""
    return a if _SEVERITY[a] >= _SEVERITY[b] else b


class SectionTopic(str, Enum):
    """Report section topics, in the fixed order sections appear."""

    MEDICATIONS = "medications"
    VITALS = "vitals"
    ADHERENCE = "adherence"
    DIALOGUE_HIGHLIGHTS = "dialogue_highlights"
    PLAN = "plan"


TOPIC_ORDER = (
    SectionTopic.MEDICATIONS,
    SectionTopic.VITALS,
    SectionTopic.ADHERENCE,
    SectionTopic.DIALOGUE_HIGHLIGHTS,
    SectionTopic.PLAN,
)


@dataclass(frozen=True)
class Patient:
    age: int
    sex: Sex


@dataclass(frozen=True)
class MedicationRecord:
    """One prescribed medication over the reporting period.

    Expected doses are derived (schedule x days in period), never stored;
    recorded doses may exceed them, so over-use stays representable.
    """

    name: str
    dose: str
    schedule: int  # doses per day
    refill_dates: tuple[date, ...] = ()
    recorded_doses: int = 0

    def expected_doses(self, days_in_period: int) -> int:
        return self.schedule * days_in_period


@dataclass(frozen=True)
class VitalSample:
    timestamp: datetime
    value: float


@dataclass(frozen=True)
class VitalSeries:
    vital_type: VitalType
    unit: str
    samples: tuple[VitalSample, ...] = ()


@dataclass(frozen=True)
class MonitoringTask:
    task_id: str
    condition: str
    description: str
    required_frequency: float  # occurrences per day
    critical: bool
    completion_timestamps: tuple[datetime, ...] = ()


@dataclass(frozen=True)
class DialogueTurn:
    speaker: Speaker
    timestamp: datetime
    text: str
    adherence_signal: AdherenceSignal = AdherenceSignal.NONE


@dataclass(frozen=True)
class ReportingPeriod:
    start: date
    end: date

    @property
    def days(self) -> int:
        """Number of calendar days in the period, endpoints inclusive."""
        return (self.end - self.start).days + 1


@dataclass(frozen=True)
class PatientCase:
    """The unified per-patient bundle consumed by triage, drafting and charts."""

    case_id: str
    patient: Patient
    conditions: tuple[str, ...]
    medications: tuple[MedicationRecord, ...]
    vitals: tuple[VitalSeries, ...]
    dialogue: tuple[DialogueTurn, ...]
    monitoring_tasks: tuple[MonitoringTask, ...]
    reporting_period: ReportingPeriod


@dataclass(frozen=True)
class ValidationIssue:
    field_path: str
    rule: str

    def __str__(self) -> str:
        return f"{self.field_path}: {self.rule}"


def validate_case(case: PatientCase) -> list[ValidationIssue]:
    """Check every domain invariant; returns an empty list iff all hold.

    Issues are data, not failures: callers decide whether to raise. The input
    is never mutated.
    """
    issues: list[ValidationIssue] = []
    period = case.reporting_period

    if not case.case_id:
        issues.append(ValidationIssue("case_id", "must be non-empty"))
    if case.patient.age < 0:
        issues.append(ValidationIssue("patient.age", "must be >= 0"))
    if period.start > period.end:
        issues.append(
            ValidationIssue("reporting_period", "start must be <= end")
        )

    for i, med in enumerate(case.medications):
        path = f"medications[{i}]"
        if not med.name:
            issues.append(ValidationIssue(f"{path}.name", "must be non-empty"))
        if med.schedule < 1:
            issues.append(
                ValidationIssue(f"{path}.schedule", "must be a positive integer")
            )
        if med.recorded_doses < 0:
            issues.append(
                ValidationIssue(f"{path}.recorded_doses", "must be >= 0")
            )

    for i, series in enumerate(case.vitals):
        path = f"vitals[{i}]"
        if not series.unit:
            issues.append(ValidationIssue(f"{path}.unit", "must be non-empty"))
        for j, sample in enumerate(series.samples):
            if not math.isfinite(sample.value):
                issues.append(
                    ValidationIssue(f"{path}.samples[{j}].value", "must be finite")
                )
            if period.start <= period.end and sample.timestamp.date() > period.end:
                issues.append(
                    ValidationIssue(
                        f"{path}.samples[{j}].timestamp",
                        "must lie within or before the period end",
                    )
                )
        stamps = [s.timestamp for s in series.samples]
        if any(b <= a for a, b in zip(stamps, stamps[1:])):
            issues.append(
                ValidationIssue(
                    f"{path}.samples",
                    "timestamps must be strictly ascending",
                )
            )

    known_conditions = set(case.conditions)
    for i, task in enumerate(case.monitoring_tasks):
        path = f"monitoring_tasks[{i}]"
        if task.condition not in known_conditions:
            issues.append(
                ValidationIssue(
                    f"{path}.condition",
                    f"references absent condition {task.condition!r}",
                )
            )
        if not task.required_frequency > 0:
            issues.append(
                ValidationIssue(f"{path}.required_frequency", "must be > 0")
            )
        for j, ts in enumerate(task.completion_timestamps):
            if period.start <= period.end and not (
                period.start <= ts.date() <= period.end
            ):
                issues.append(
                    ValidationIssue(
                        f"{path}.completion_timestamps[{j}]",
                        "must lie within the reporting period",
                    )
                )

    for i, turn in enumerate(case.dialogue):
        if not turn.text:
            issues.append(
                ValidationIssue(f"dialogue[{i}].text", "must be non-empty")
            )

    return issues
