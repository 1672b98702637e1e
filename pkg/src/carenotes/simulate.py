"""Seeded synthetic cohort generator for desk-scale testing.

Generation is constructive: each case's vitals, dose counts, dialogue and
task completions are built to satisfy the triage rule predicates for the
requested target label under the shipped default config in rule-only mode,
so cohort mixes come out exactly as requested without rejection sampling.

Urgent cases alternate (by seed parity) between a fail-safe variant, where a
critical monitoring task is missed, and an indicator variant driven by vital
deviations plus low adherence. Out-of-range samples are placed symmetrically
around the period midpoint so they never push the fitted slope over its alert
threshold.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta

from .bundle import extract_signal
from .model import (
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
)

PERIOD_START = date(2025, 3, 1)

# Primary vital per condition: (vital, unit, in-range base value, spike above high).
_CONDITION_VITALS = {
    "hypertension": (VitalType.SYSTOLIC_BP, "mmHg", 118.0, 150.0),
    "type2_diabetes": (VitalType.GLUCOSE, "mg/dL", 120.0, 205.0),
}

_CONDITION_MEDS = {
    "hypertension": (("Lisinopril", "10 mg", 1), ("Amlodipine", "5 mg", 1)),
    "type2_diabetes": (("Metformin", "500 mg", 2), ("Glipizide", "5 mg", 1)),
}

_CONDITION_TASKS = {
    "hypertension": "Measure blood pressure",
    "type2_diabetes": "Check fasting glucose",
}

_ADHERENT_PHRASES = (
    "I have been taking my medication every day as prescribed.",
    "All doses went fine, no trouble with the schedule.",
)
_MISSED_PHRASES = (
    "I skipped my pills twice this week.",
    "I forgot my evening dose a few times.",
    "I missed a couple of doses, I think.",
)
_NEUTRAL_PHRASES = (
    "Feeling about the same as last week.",
    "Nothing new to report on my end.",
)
_CLINICIAN_PHRASES = (
    "Thanks for the update. Keep logging your readings.",
    "Noted. We will go over the numbers at your next visit.",
)


@dataclass(frozen=True)
class CohortSpec:
    seed: int
    mix: dict[UrgencyLabel, int]
    period_days: int = 7
    conditions: tuple[str, ...] = ("hypertension", "type2_diabetes")


def _symmetric_days(count: int, days: int, rng: random.Random) -> list[int]:
    """Day indices for out-of-range samples whose slope contributions cancel:
    symmetric pairs around the midpoint, plus the middle day when available."""
    picked: list[int] = []
    pairs = [(i, days - 1 - i) for i in range(days // 2)]
    rng.shuffle(pairs)
    if count % 2 == 1:
        if days % 2 == 1:
            picked.append(days // 2)
        else:
            picked.append(days // 2)  # half-day offset; negligible slope shift
        count -= 1
    for lo, hi in pairs:
        if count <= 0:
            break
        if lo in picked or hi in picked:
            continue
        picked.extend((lo, hi))
        count -= 2
    return sorted(picked)


def _dose_counts(
    meds: list[tuple[str, str, int]],
    days: int,
    low: float,
    high: float,
    rng: random.Random,
) -> list[int]:
    """Recorded-dose counts whose pooled rate lands strictly inside (low, high).

    Requires sum(expected) >= 6 so the 1-dose granularity fits the band;
    callers fall back to other rule variants below that.
    """
    expected = [schedule * days for _, _, schedule in meds]
    total_expected = sum(expected)
    target = rng.uniform(low + 0.05, high - 0.05)
    total = min(total_expected, round(target * total_expected))
    while total > 0 and total / total_expected >= high - 0.02:
        total -= 1
    while total < total_expected and total / total_expected <= low + 0.02:
        total += 1
    counts = [0] * len(expected)
    remaining = total
    while remaining > 0:  # round-robin keeps the exact total
        for i, exp in enumerate(expected):
            if remaining > 0 and counts[i] < exp:
                counts[i] += 1
                remaining -= 1
    return counts


def generate_case(
    seed: int,
    target: UrgencyLabel,
    condition: str = "hypertension",
    period_days: int = 7,
) -> PatientCase:
    """Deterministic case whose rule-only classification equals `target`
    under the shipped default config."""
    if condition not in _CONDITION_VITALS:
        raise ValueError(f"unknown condition {condition!r}")
    rng = random.Random(f"{seed}:{target.value}:{condition}:{period_days}")
    days = max(1, period_days)
    period = ReportingPeriod(PERIOD_START, PERIOD_START + timedelta(days=days - 1))

    med_bank = _CONDITION_MEDS[condition]
    meds = list(med_bank[: 1 + seed % 2])
    total_expected = sum(schedule * days for _, _, schedule in meds)

    failsafe_variant = target is UrgencyLabel.URGENT and seed % 2 == 0
    # Dose granularity must fit the adherence band, else fall back to the
    # deviation-driven variant.
    attention_by_adherence = (
        target is UrgencyLabel.ATTENTION and seed % 2 == 1 and total_expected >= 6
    )

    vital, unit, base, spike = _CONDITION_VITALS[condition]
    jitter = 1.0 if days <= 3 else 3.0

    if target is UrgencyLabel.URGENT and not failsafe_variant:
        deviation_count = min(days, 3 + seed % 2)
    elif target is UrgencyLabel.ATTENTION and not attention_by_adherence:
        deviation_count = min(days, 1 + seed % 2, 2)
    else:
        deviation_count = 0
    spike_days = set(_symmetric_days(deviation_count, days, rng))

    samples = []
    for day in range(days):
        ts = datetime.combine(period.start + timedelta(days=day), time(8, 0))
        if day in spike_days:
            value = spike + rng.uniform(0.0, 8.0)
        else:
            value = base + rng.uniform(-jitter, jitter)
        samples.append(VitalSample(timestamp=ts, value=round(value, 1)))
    heart_rate = tuple(
        VitalSample(
            timestamp=datetime.combine(period.start + timedelta(days=d), time(8, 5)),
            value=round(72.0 + rng.uniform(-jitter, jitter), 1),
        )
        for d in range(days)
    )
    vitals = (
        VitalSeries(vital_type=vital, unit=unit, samples=tuple(samples)),
        VitalSeries(vital_type=VitalType.HEART_RATE, unit="bpm", samples=heart_rate),
    )

    if target is UrgencyLabel.URGENT and not failsafe_variant:
        if total_expected >= 6:
            counts = _dose_counts(meds, days, 0.20, 0.45, rng)
        else:
            counts = [(schedule * days) // 4 for _, _, schedule in meds]
    elif attention_by_adherence:
        counts = _dose_counts(meds, days, 0.55, 0.78, rng)
    else:
        counts = [schedule * days for _, _, schedule in meds]
    medications = tuple(
        MedicationRecord(
            name=name,
            dose=dose,
            schedule=schedule,
            refill_dates=(period.start,),
            recorded_doses=count,
        )
        for (name, dose, schedule), count in zip(meds, counts)
    )

    completion_days = list(range(days))
    if failsafe_variant:
        missing = 1 + seed % min(3, days)
        for day in rng.sample(range(days), min(missing, days)):
            completion_days.remove(day)
    critical_task = MonitoringTask(
        task_id=f"task-{condition}-critical",
        condition=condition,
        description=_CONDITION_TASKS[condition],
        required_frequency=1.0,
        critical=True,
        completion_timestamps=tuple(
            datetime.combine(period.start + timedelta(days=d), time(9, 0))
            for d in completion_days
        ),
    )
    symptom_days = sorted(rng.sample(range(days), max(1, days // 2)))
    symptom_task = MonitoringTask(
        task_id=f"task-{condition}-symptoms",
        condition=condition,
        description="Note any new symptoms",
        required_frequency=1.0,
        critical=False,
        completion_timestamps=tuple(
            datetime.combine(period.start + timedelta(days=d), time(19, 0))
            for d in symptom_days
        ),
    )

    if target is UrgencyLabel.URGENT and not failsafe_variant:
        patient_phrase = rng.choice(_MISSED_PHRASES)
    elif attention_by_adherence:
        patient_phrase = rng.choice(_MISSED_PHRASES)
    elif target is UrgencyLabel.ATTENTION:
        patient_phrase = rng.choice(_NEUTRAL_PHRASES)
    else:
        patient_phrase = rng.choice(_ADHERENT_PHRASES)
    mid = min(days - 1, 2)
    dialogue = tuple(
        DialogueTurn(
            speaker=speaker,
            timestamp=datetime.combine(
                period.start + timedelta(days=mid), time(10, minute)
            ),
            text=text,
            adherence_signal=extract_signal(speaker, text),
        )
        for speaker, minute, text in (
            (Speaker.PATIENT, 0, patient_phrase),
            (Speaker.CLINICIAN, 5, rng.choice(_CLINICIAN_PHRASES)),
        )
    )

    return PatientCase(
        case_id=f"sim-{seed:06d}",
        patient=Patient(age=rng.randint(45, 85), sex=rng.choice(list(Sex))),
        conditions=(condition,),
        medications=medications,
        vitals=vitals,
        dialogue=dialogue,
        monitoring_tasks=(critical_task, symptom_task),
        reporting_period=period,
    )


def generate_cohort(spec: CohortSpec) -> list[PatientCase]:
    """Exactly the requested per-label counts, deterministic in spec.seed."""
    cases = []
    index = 0
    for label in (UrgencyLabel.URGENT, UrgencyLabel.ATTENTION, UrgencyLabel.STABLE):
        for _ in range(spec.mix.get(label, 0)):
            condition = spec.conditions[index % len(spec.conditions)]
            cases.append(
                generate_case(
                    seed=spec.seed * 1000 + index,
                    target=label,
                    condition=condition,
                    period_days=spec.period_days,
                )
            )
            index += 1
    return cases
