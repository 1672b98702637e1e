"""Time-aligned chart specifications paired with draft sections.

ChartSpecs are render-agnostic data (points, threshold lines, annotations);
the UI and the HTML export turn them into SVG. x-coordinates are fractional
days since the period start, so charts align with the daily monitoring
cadence and with the trend math in triage.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import PatientCase, SectionTopic
from .triage import TriageConfig, TriageResult, day_offset, resolve_thresholds


@dataclass(frozen=True)
class ChartPoint:
    x: float  # days since period start
    y: float


@dataclass(frozen=True)
class ThresholdLine:
    label: str
    y: float


@dataclass(frozen=True)
class Annotation:
    x: float
    text: str


@dataclass(frozen=True)
class ChartSpec:
    chart_id: str
    topic: SectionTopic
    subject: str  # vital type or medication name
    points: tuple[ChartPoint, ...]
    threshold_lines: tuple[ThresholdLine, ...] = ()
    annotations: tuple[Annotation, ...] = ()
    caption: str = ""
    empty: bool = False


def build_charts(
    case: PatientCase, triage: TriageResult, config: TriageConfig
) -> list[ChartSpec]:
    """One chart per vital series plus one adherence chart per medication.

    Vital charts carry the case's resolved threshold lines and one annotation
    per out-of-range sample, so the annotation count matches the triage
    deviation count for the same vital. Empty series still produce a spec
    (empty=True) whose caption states the gap. Deterministic.
    """
    period = case.reporting_period
    bounds = resolve_thresholds(case, config)
    charts: list[ChartSpec] = []

    for i, series in enumerate(case.vitals):
        chart_id = f"vital-{series.vital_type.value}-{i}"
        if not series.samples:
            charts.append(
                ChartSpec(
                    chart_id=chart_id,
                    topic=SectionTopic.VITALS,
                    subject=series.vital_type.value,
                    points=(),
                    caption=(
                        f"No {series.vital_type.value} readings were recorded"
                        f" between {period.start} and {period.end}."
                    ),
                    empty=True,
                )
            )
            continue
        points = tuple(
            ChartPoint(x=round(day_offset(s.timestamp, case), 4), y=s.value)
            for s in series.samples
        )
        low_high = bounds.get(series.vital_type)
        lines = ()
        annotations = []
        if low_high:
            low, high = low_high
            lines = (
                ThresholdLine(label=f"low {low:g}", y=low),
                ThresholdLine(label=f"high {high:g}", y=high),
            )
            for point, sample in zip(points, series.samples):
                if sample.value < low:
                    annotations.append(
                        Annotation(x=point.x, text=f"below {low:g}: {sample.value:g}")
                    )
                elif sample.value > high:
                    annotations.append(
                        Annotation(x=point.x, text=f"above {high:g}: {sample.value:g}")
                    )
        charts.append(
            ChartSpec(
                chart_id=chart_id,
                topic=SectionTopic.VITALS,
                subject=series.vital_type.value,
                points=points,
                threshold_lines=lines,
                annotations=tuple(annotations),
                caption=(
                    f"{series.vital_type.value} ({series.unit}) from"
                    f" {period.start} to {period.end}; {len(points)} readings,"
                    f" {len(annotations)} outside range."
                ),
            )
        )

    for i, med in enumerate(case.medications):
        # The bundle stores dose totals, not a per-day log; doses are laid out
        # front-to-back, each day filled up to the schedule.
        remaining = med.recorded_doses
        points = []
        for day in range(period.days):
            taken = min(med.schedule, remaining)
            remaining -= taken
            points.append(ChartPoint(x=float(day), y=float(taken)))
        charts.append(
            ChartSpec(
                chart_id=f"adherence-{i}-{_slug(med.name)}",
                topic=SectionTopic.ADHERENCE,
                subject=med.name,
                points=tuple(points),
                threshold_lines=(
                    ThresholdLine(label=f"expected {med.schedule}/day", y=float(med.schedule)),
                ),
                caption=(
                    f"{med.name}: recorded doses per day against the expected"
                    f" {med.schedule}/day between {period.start} and {period.end}."
                ),
            )
        )

    return charts


def _slug(name: str) -> str:
    return "".join(c.lower() if c.isalnum() else "-" for c in name).strip("-")


def chart_to_dict(chart: ChartSpec) -> dict:
    return {
        "chart_id": chart.chart_id,
        "topic": chart.topic.value,
        "subject": chart.subject,
        "points": [{"x": p.x, "y": p.y} for p in chart.points],
        "threshold_lines": [
            {"label": t.label, "y": t.y} for t in chart.threshold_lines
        ],
        "annotations": [{"x": a.x, "text": a.text} for a in chart.annotations],
        "caption": chart.caption,
        "empty": chart.empty,
    }


def chart_from_dict(doc: dict) -> ChartSpec:
    return ChartSpec(
        chart_id=doc["chart_id"],
        topic=SectionTopic(doc["topic"]),
        subject=doc["subject"],
        points=tuple(ChartPoint(p["x"], p["y"]) for p in doc["points"]),
        threshold_lines=tuple(
            ThresholdLine(t["label"], t["y"]) for t in doc["threshold_lines"]
        ),
        annotations=tuple(Annotation(a["x"], a["text"]) for a in doc["annotations"]),
        caption=doc["caption"],
        empty=doc["empty"],
    )
