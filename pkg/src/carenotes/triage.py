"""Risk assessment: adherence summary, vital trends, urgency classification.

The label pipeline is deliberately conservative:

  1. deterministic rules compute a floor (stable/attention/urgent),
  2. an optional external estimate can raise the label, never lower it,
  3. any missed critical monitoring task forces urgent (fail-safe), no matter
     what every other indicator says.

When the external estimator is unavailable, errors, or times out, the rules
alone classify the case and the fallback is noted in the rationale.
"""

from __future__ import annotations

import concurrent.futures
import json
import math
from dataclasses import dataclass
from datetime import datetime, time
from importlib import resources
from typing import Callable, Optional

from .errors import SchemaViolation
from .model import (
    PatientCase,
    UrgencyLabel,
    VitalType,
    severity,
    severity_max,
)


@dataclass(frozen=True)
class MedicationAdherence:
    name: str
    expected_doses: int
    recorded_doses: int
    adherence_rate: float  # recorded/expected, may exceed 1.0


@dataclass(frozen=True)
class TaskCoverage:
    task_id: str
    critical: bool
    required_count: int
    completed_count: int
    coverage_ratio: float


@dataclass(frozen=True)
class AdherenceSummary:
    per_medication: tuple[MedicationAdherence, ...]
    overall_adherence_rate: float  # dose-weighted, clamped to [0, 1]
    gap_days: int
    missed_dose_reports: int
    task_coverage: tuple[TaskCoverage, ...]


@dataclass(frozen=True)
class VitalTrend:
    vital_type: VitalType
    slope: Optional[float]  # units/day; absent when fewer than 2 samples
    deviation_count: int
    last_value: Optional[float]
    sample_count: int


@dataclass(frozen=True)
class TrendFindings:
    per_vital: tuple[VitalTrend, ...]

    @property
    def deviations_total(self) -> int:
        return sum(t.deviation_count for t in self.per_vital)


@dataclass(frozen=True)
class TriageResult:
    label: UrgencyLabel
    rationale: tuple[str, ...]
    failsafe_triggered: bool
    missed_critical_tasks: tuple[str, ...]
    rule_floor: UrgencyLabel
    model_estimate: Optional[UrgencyLabel]
    deviations_total: int


@dataclass(frozen=True)
class TriageConfig:
    """Rule thresholds. Shipped defaults are non-clinical placeholders."""

    vital_thresholds: dict[str, dict[VitalType, tuple[float, float]]]
    slope_alert_threshold: dict[VitalType, float]
    deviation_urgent_count: int = 3
    deviation_attention_count: int = 1
    adherence_urgent_below: float = 0.50
    adherence_attention_below: float = 0.80
    critical_coverage_minimum: float = 1.0
    estimator_timeout_seconds: float = 30.0

    def __post_init__(self):
        if not 0 <= self.adherence_urgent_below < self.adherence_attention_below <= 1:
            raise ValueError(
                "need 0 <= adherence_urgent_below < adherence_attention_below <= 1"
            )
        if self.deviation_urgent_count < 1 or self.deviation_attention_count < 1:
            raise ValueError("deviation counts must be >= 1")
        for profile, bounds in self.vital_thresholds.items():
            for vital, (low, high) in bounds.items():
                if not low < high:
                    raise ValueError(
                        f"threshold low < high violated for {profile}/{vital.value}"
                    )

    @staticmethod
    def from_dict(doc: dict) -> "TriageConfig":
        try:
            thresholds = {
                profile: {
                    VitalType(v): (float(low), float(high))
                    for v, (low, high) in bounds.items()
                }
                for profile, bounds in doc["vital_thresholds"].items()
            }
            slopes = {
                VitalType(v): float(s)
                for v, s in doc["slope_alert_threshold"].items()
            }
            return TriageConfig(
                vital_thresholds=thresholds,
                slope_alert_threshold=slopes,
                deviation_urgent_count=int(doc["deviation_urgent_count"]),
                deviation_attention_count=int(doc["deviation_attention_count"]),
                adherence_urgent_below=float(doc["adherence_urgent_below"]),
                adherence_attention_below=float(doc["adherence_attention_below"]),
                critical_coverage_minimum=float(doc["critical_coverage_minimum"]),
                estimator_timeout_seconds=float(
                    doc.get("estimator_timeout_seconds", 30.0)
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation("triage_config", str(exc)) from None

    @staticmethod
    def load(path) -> "TriageConfig":
        with open(path, "rb") as fh:
            return TriageConfig.from_dict(json.load(fh))

    @staticmethod
    def default() -> "TriageConfig":
        raw = (
            resources.files("carenotes.data")
            .joinpath("default_triage_config.json")
            .read_text()
        )
        return TriageConfig.from_dict(json.loads(raw))


def resolve_thresholds(
    case: PatientCase, config: TriageConfig
) -> dict[VitalType, tuple[float, float]]:
    """Per-case bounds: start from the default profile, then intersect each
    applicable condition profile (tighter bound wins on both sides)."""
    resolved = dict(config.vital_thresholds.get("default", {}))
    for condition in case.conditions:
        for vital, (low, high) in config.vital_thresholds.get(condition, {}).items():
            if vital in resolved:
                cur_low, cur_high = resolved[vital]
                resolved[vital] = (max(cur_low, low), min(cur_high, high))
            else:
                resolved[vital] = (low, high)
    for vital, (low, high) in resolved.items():
        if not low < high:
            raise ValueError(
                f"contradictory thresholds for {vital.value}: [{low}, {high}]"
            )
    return resolved


def summarize_adherence(case: PatientCase) -> AdherenceSummary:
    """Dose counts, task coverage and dialogue-reported misses for one case.

    Zero-medication cases get overall rate 1.0 by convention (monitoring-only
    patients exist); classify() notes the convention in its rationale.
    gap_days is the schedule-implied lower bound on zero-dose days, since the
    bundle records dose totals, not per-day logs.
    """
    days = case.reporting_period.days
    per_med = []
    total_expected = 0
    total_recorded = 0
    total_schedule = 0
    for med in case.medications:
        expected = med.expected_doses(days)
        per_med.append(
            MedicationAdherence(
                name=med.name,
                expected_doses=expected,
                recorded_doses=med.recorded_doses,
                adherence_rate=med.recorded_doses / expected if expected else 0.0,
            )
        )
        total_expected += expected
        total_recorded += med.recorded_doses
        total_schedule += med.schedule

    if total_expected:
        overall = min(1.0, total_recorded / total_expected)
        covered_days = math.ceil(total_recorded / max(1, total_schedule))
        gap_days = max(0, days - covered_days)
    else:
        overall = 1.0
        gap_days = 0

    missed_reports = sum(
        1
        for turn in case.dialogue
        if turn.adherence_signal.value == "reported_missed_dose"
    )

    coverage = []
    for task in case.monitoring_tasks:
        required = max(1, math.ceil(task.required_frequency * days))
        completed = len(task.completion_timestamps)
        coverage.append(
            TaskCoverage(
                task_id=task.task_id,
                critical=task.critical,
                required_count=required,
                completed_count=completed,
                coverage_ratio=completed / required,
            )
        )

    return AdherenceSummary(
        per_medication=tuple(per_med),
        overall_adherence_rate=overall,
        gap_days=gap_days,
        missed_dose_reports=missed_reports,
        task_coverage=tuple(coverage),
    )


def day_offset(ts: datetime, case: PatientCase) -> float:
    """Fractional days since the period start (midnight)."""
    start = datetime.combine(case.reporting_period.start, time.min)
    return (ts - start).total_seconds() / 86400.0


def least_squares_slope(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    if sxx == 0:
        return 0.0
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    return sxy / sxx


def detect_trends(case: PatientCase, config: TriageConfig) -> TrendFindings:
    """Per-series least-squares slope and out-of-range sample counts against
    the case's resolved condition thresholds."""
    bounds = resolve_thresholds(case, config)
    trends = []
    for series in case.vitals:
        xs = [day_offset(s.timestamp, case) for s in series.samples]
        ys = [s.value for s in series.samples]
        slope = least_squares_slope(xs, ys) if len(xs) >= 2 else None
        low_high = bounds.get(series.vital_type)
        if low_high:
            low, high = low_high
            deviations = sum(1 for y in ys if y < low or y > high)
        else:
            deviations = 0
        trends.append(
            VitalTrend(
                vital_type=series.vital_type,
                slope=slope,
                deviation_count=deviations,
                last_value=ys[-1] if ys else None,
                sample_count=len(ys),
            )
        )
    return TrendFindings(per_vital=tuple(trends))


def classify(
    case: PatientCase,
    adherence: AdherenceSummary,
    trends: TrendFindings,
    config: TriageConfig,
    model_estimate: Optional[UrgencyLabel] = None,
) -> TriageResult:
    """Pure urgency classification; see module docstring for the pipeline.

    Each rationale entry is "<rule_id>: <text>" where the rule's predicate is
    re-checkable from the summary/trend inputs alone.
    """
    rationale: list[str] = []
    deviations = trends.deviations_total
    rate = adherence.overall_adherence_rate

    if not adherence.per_medication:
        rationale.append(
            "zero_medications: no medications on record; adherence rate"
            " defaults to 1.00 by convention"
        )

    floor = UrgencyLabel.STABLE
    if deviations >= config.deviation_urgent_count:
        floor = UrgencyLabel.URGENT
        rationale.append(
            f"dev_urgent: {deviations} vital readings out of range"
            f" (>= {config.deviation_urgent_count})"
        )
    if rate < config.adherence_urgent_below:
        floor = UrgencyLabel.URGENT
        rationale.append(
            f"adh_urgent: overall adherence {rate:.2f}"
            f" below {config.adherence_urgent_below:.2f}"
        )
    if floor is not UrgencyLabel.URGENT:
        if deviations >= config.deviation_attention_count:
            floor = UrgencyLabel.ATTENTION
            rationale.append(
                f"dev_attention: {deviations} vital readings out of range"
                f" (>= {config.deviation_attention_count})"
            )
        if rate < config.adherence_attention_below:
            floor = UrgencyLabel.ATTENTION
            rationale.append(
                f"adh_attention: overall adherence {rate:.2f}"
                f" below {config.adherence_attention_below:.2f}"
            )
        for trend in trends.per_vital:
            alert = config.slope_alert_threshold.get(trend.vital_type)
            if trend.slope is not None and alert is not None and abs(trend.slope) > alert:
                floor = UrgencyLabel.ATTENTION
                rationale.append(
                    f"slope_attention: {trend.vital_type.value} slope"
                    f" {trend.slope:+.2f}/day exceeds alert threshold {alert}"
                )
        if adherence.missed_dose_reports >= 1:
            floor = UrgencyLabel.ATTENTION
            rationale.append(
                f"dialogue_attention: {adherence.missed_dose_reports}"
                " missed-dose report(s) in dialogue"
            )

    label = severity_max(floor, model_estimate or UrgencyLabel.STABLE)
    if model_estimate is not None:
        if severity(model_estimate) > severity(floor):
            rationale.append(
                f"estimate_applied: model estimate {model_estimate.value}"
                f" raised label above rule floor {floor.value}"
            )
        elif severity(model_estimate) < severity(floor):
            rationale.append(
                f"estimate_below_floor: model estimate {model_estimate.value}"
                f" not allowed to lower rule floor {floor.value}"
            )

    missed_critical = tuple(
        tc.task_id
        for tc in adherence.task_coverage
        if tc.critical and tc.coverage_ratio < config.critical_coverage_minimum
    )
    failsafe = bool(missed_critical)
    if failsafe:
        label = UrgencyLabel.URGENT
        for tc in adherence.task_coverage:
            if tc.critical and tc.coverage_ratio < config.critical_coverage_minimum:
                rationale.append(
                    f"failsafe: critical task {tc.task_id} completed"
                    f" {tc.completed_count} of {tc.required_count} required;"
                    " escalated to urgent"
                )

    if not rationale:
        rationale.append("no_rule_fired: all indicators within limits")

    return TriageResult(
        label=label,
        rationale=tuple(rationale),
        failsafe_triggered=failsafe,
        missed_critical_tasks=missed_critical,
        rule_floor=floor,
        model_estimate=model_estimate,
        deviations_total=deviations,
    )


Estimator = Callable[[PatientCase, AdherenceSummary, TrendFindings], UrgencyLabel]


def run_triage(
    case: PatientCase,
    config: TriageConfig,
    estimator: Optional[Estimator] = None,
) -> TriageResult:
    """Summarize, detect trends, optionally consult the estimator, classify.

    Estimator calls are bounded by config.estimator_timeout_seconds; on error
    or timeout the rules classify alone and the rationale records the
    fallback.
    """
    adherence = summarize_adherence(case)
    trends = detect_trends(case, config)
    estimate: Optional[UrgencyLabel] = None
    fallback_note: Optional[str] = None
    if estimator is not None:
        pool = concurrent.futures.ThreadPoolExecutor(max_workers=1)
        future = pool.submit(estimator, case, adherence, trends)
        try:
            estimate = future.result(timeout=config.estimator_timeout_seconds)
        except concurrent.futures.TimeoutError:
            future.cancel()
            fallback_note = (
                "estimator_fallback: external estimate timed out;"
                " rule-only classification"
            )
        except Exception as exc:
            fallback_note = (
                "estimator_fallback: external estimate failed"
                f" ({type(exc).__name__}); rule-only classification"
            )
        finally:
            pool.shutdown(wait=False)
    result = classify(case, adherence, trends, config, estimate)
    if fallback_note:
        result = TriageResult(
            label=result.label,
            rationale=result.rationale + (fallback_note,),
            failsafe_triggered=result.failsafe_triggered,
            missed_critical_tasks=result.missed_critical_tasks,
            rule_floor=result.rule_floor,
            model_estimate=result.model_estimate,
            deviations_total=result.deviations_total,
        )
    return result


def triage_case(
    store,
    case_id: str,
    config: TriageConfig,
    estimator: Optional[Estimator] = None,
) -> TriageResult:
    """Triage one stored case and persist the result (audit: `triaged`).

    Raises UnknownCase if the case is not in the store. Re-triage overwrites
    the stored result; queue order is untouched.
    """
    case = store.get_case(case_id)
    result = run_triage(case, config, estimator)
    store.put_triage(case_id, triage_result_to_dict(result))
    return result


def triage_result_to_dict(result: TriageResult) -> dict:
    return {
        "label": result.label.value,
        "rationale": list(result.rationale),
        "failsafe_triggered": result.failsafe_triggered,
        "missed_critical_tasks": list(result.missed_critical_tasks),
        "rule_floor": result.rule_floor.value,
        "model_estimate": result.model_estimate.value if result.model_estimate else None,
        "deviations_total": result.deviations_total,
    }


def triage_result_from_dict(doc: dict) -> TriageResult:
    return TriageResult(
        label=UrgencyLabel(doc["label"]),
        rationale=tuple(doc["rationale"]),
        failsafe_triggered=doc["failsafe_triggered"],
        missed_critical_tasks=tuple(doc["missed_critical_tasks"]),
        rule_floor=UrgencyLabel(doc["rule_floor"]),
        model_estimate=(
            UrgencyLabel(doc["model_estimate"]) if doc["model_estimate"] else None
        ),
        deviations_total=doc["deviations_total"],
    )
