"""Bounded draft generation: sectioned reports in a fixed topic order.

Every report has five sections (medications, vitals, adherence, dialogue
highlights, plan), each with exactly three text moves: what happened, why it
matters, what to do next. Missing data becomes an explicit gap statement
instead of a guess, and every number in template text is copied from the case
bundle or from the derived adherence/trend summaries — never computed fresh.

Two backends produce the same shape: the deterministic template, and an
external chat-completion service prompted per section. A malformed, failed or
timed-out external section silently falls back to the template section
(recorded in its origin), so a misbehaving model can only ever degrade one
section to deterministic text. Nothing in this module can approve, export, or
touch a review session.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import os
import re
from dataclasses import dataclass, replace
from datetime import datetime
from enum import Enum
from importlib import resources
from typing import Optional

import requests

from .charts import ChartSpec, chart_to_dict
from .errors import ServiceUnreachable, TopicMismatch
from .model import (
    PatientCase,
    SectionTopic,
    TOPIC_ORDER,
    UrgencyLabel,
    VitalSeries,
)
from .triage import (
    AdherenceSummary,
    TriageResult,
    day_offset,
    least_squares_slope,
    summarize_adherence,
    triage_result_from_dict,
)


class MoveTag(str, Enum):
    WHAT_HAPPENED = "what_happened"
    WHY_IT_MATTERS = "why_it_matters"
    WHAT_TO_DO = "what_to_do"


MOVE_ORDER = (MoveTag.WHAT_HAPPENED, MoveTag.WHY_IT_MATTERS, MoveTag.WHAT_TO_DO)

MOVE_HEADINGS = {
    MoveTag.WHAT_HAPPENED: "What happened:",
    MoveTag.WHY_IT_MATTERS: "Why it matters:",
    MoveTag.WHAT_TO_DO: "What to do next:",
}


class Origin(str, Enum):
    TEMPLATE = "template"
    EXTERNAL_MODEL = "external_model"


class Backend(str, Enum):
    TEMPLATE = "template"
    EXTERNAL = "external"


@dataclass(frozen=True)
class Move:
    tag: MoveTag
    text: str


@dataclass(frozen=True)
class DraftSection:
    section_id: str
    topic: SectionTopic
    moves: tuple[Move, Move, Move]
    gap_statements: tuple[str, ...] = ()
    chart_refs: tuple[str, ...] = ()
    origin: Origin = Origin.TEMPLATE


@dataclass(frozen=True)
class DraftReport:
    case_id: str
    sections: tuple[DraftSection, ...]
    urgency: UrgencyLabel
    generated_at: datetime
    generator_config_digest: str


@dataclass(frozen=True)
class GeneratorConfig:
    backend: Backend = Backend.TEMPLATE
    model_id: str = "Qwen3-8B"
    temperature: float = 0.7
    max_tokens: int = 1200
    endpoint_url: str = ""
    timeout_seconds: int = 30
    max_concurrency: int = 4
    fallback_to_template: bool = True

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")

    def digest(self) -> str:
        doc = {
            "backend": self.backend.value,
            "model_id": self.model_id,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def detect_gaps(case: PatientCase) -> dict[SectionTopic, list[str]]:
    """One fixed-format gap statement per missing data class per topic.

    A fully populated case maps to an empty dict.
    """
    start = case.reporting_period.start
    end = case.reporting_period.end
    gaps: dict[SectionTopic, list[str]] = {}

    med_gaps = []
    if not case.medications:
        med_gaps.append(f"No medications were on record between {start} and {end}.")
    else:
        for med in case.medications:
            if med.recorded_doses == 0:
                med_gaps.append(
                    f"No doses of {med.name} were recorded between {start} and {end}."
                )
    if med_gaps:
        gaps[SectionTopic.MEDICATIONS] = med_gaps

    vital_gaps = []
    if not case.vitals:
        vital_gaps.append(
            f"No vital readings were recorded between {start} and {end}."
        )
    else:
        for series in case.vitals:
            if not series.samples:
                vital_gaps.append(
                    f"No {series.vital_type.value} readings were recorded"
                    f" between {start} and {end}."
                )
    if vital_gaps:
        gaps[SectionTopic.VITALS] = vital_gaps

    adherence_gaps = []
    if not case.medications and not case.monitoring_tasks:
        adherence_gaps.append(
            "No medication or monitoring-task records were available"
            f" between {start} and {end}."
        )
    else:
        for task in case.monitoring_tasks:
            if not task.completion_timestamps:
                adherence_gaps.append(
                    f"No completions of '{task.description}' were recorded"
                    f" between {start} and {end}."
                )
    if adherence_gaps:
        gaps[SectionTopic.ADHERENCE] = adherence_gaps

    if not case.dialogue:
        gaps[SectionTopic.DIALOGUE_HIGHLIGHTS] = [
            f"No dialogue was recorded between {start} and {end}."
        ]

    return gaps


def _series_slope(series: VitalSeries, case: PatientCase) -> Optional[float]:
    if len(series.samples) < 2:
        return None
    xs = [day_offset(s.timestamp, case) for s in series.samples]
    ys = [s.value for s in series.samples]
    return least_squares_slope(xs, ys)


def _deviation_counts(charts: list[ChartSpec]) -> dict[str, int]:
    return {
        c.subject: len(c.annotations)
        for c in charts
        if c.topic is SectionTopic.VITALS
    }


def _medications_moves(
    case: PatientCase, summary: AdherenceSummary, gap_statements: list[str]
) -> tuple[str, str, str]:
    if not case.medications:
        return (
            " ".join(gap_statements),
            "Without a medication list, dose adherence cannot be assessed"
            " for this period.",
            "Confirm the current medication list with the patient.",
        )
    parts = []
    for med, adh in zip(case.medications, summary.per_medication):
        parts.append(
            f"{med.name} {med.dose}, {med.schedule} dose(s) per day:"
            f" {adh.recorded_doses} of {adh.expected_doses} expected doses recorded"
        )
    happened = (
        f"{len(case.medications)} medication(s) were on record between"
        f" {case.reporting_period.start} and {case.reporting_period.end}:"
        f" {'; '.join(parts)}."
    )
    matters = (
        "Recorded doses give an overall adherence rate of"
        f" {summary.overall_adherence_rate:.2f} for this period."
    )
    if summary.missed_dose_reports:
        matters += (
            f" Dialogue included {summary.missed_dose_reports}"
            " missed-dose report(s)."
        )
    if summary.overall_adherence_rate < 1.0:
        todo = (
            "Review the missed doses with the patient and confirm the"
            " medication list stays appropriate."
        )
    else:
        todo = (
            "Doses were recorded as scheduled; confirm the medication list"
            " stays appropriate."
        )
    return happened, matters, todo


def _vitals_moves(
    case: PatientCase, charts: list[ChartSpec], gap_statements: list[str]
) -> tuple[str, str, str]:
    populated = [s for s in case.vitals if s.samples]
    if not populated:
        return (
            " ".join(gap_statements),
            "Without readings, trends and range checks cannot be assessed"
            " for this period.",
            "Collect the scheduled readings next period.",
        )
    deviations = _deviation_counts(charts)
    parts = []
    for series in populated:
        last = series.samples[-1].value
        parts.append(
            f"{series.vital_type.value} ({series.unit}):"
            f" {len(series.samples)} readings, most recent {last:g}"
        )
    happened = "; ".join(parts) + "."
    flagged = [
        (series, deviations.get(series.vital_type.value, 0))
        for series in populated
        if deviations.get(series.vital_type.value, 0) > 0
    ]
    if flagged:
        matters = (
            " ".join(
                f"{series.vital_type.value} had {count} reading(s) outside"
                " the configured range."
                for series, count in flagged
            )
        )
        slope = _series_slope(flagged[0][0], case)
        if slope is not None:
            matters += (
                f" {flagged[0][0].vital_type.value} moved {slope:+.2f}"
                f" {flagged[0][0].unit} per day on average."
            )
        todo = "Review the flagged readings before approving the plan."
    else:
        matters = "All recorded readings stayed inside the configured ranges."
        todo = "Continue the current monitoring cadence."
    return happened, matters, todo


def _adherence_moves(
    case: PatientCase,
    summary: AdherenceSummary,
    triage: TriageResult,
    gap_statements: list[str],
) -> tuple[str, str, str]:
    if not case.medications and not case.monitoring_tasks:
        return (
            " ".join(gap_statements),
            "Without medication or task records, adherence cannot be"
            " assessed for this period.",
            "Set up dose and task logging for the next period.",
        )
    parts = []
    for task, coverage in zip(case.monitoring_tasks, summary.task_coverage):
        parts.append(
            f"'{task.description}': {coverage.completed_count} of"
            f" {coverage.required_count} required completions"
        )
    happened = "; ".join(parts) + "." if parts else "No monitoring tasks were assigned."
    if case.medications:
        happened += f" {summary.gap_days} day(s) had no recorded doses."
    if triage.missed_critical_tasks:
        matters = (
            "Critical monitoring fell short of its required completions,"
            " so the case was escalated."
        )
        todo = "Address the missed critical monitoring before the next period."
    elif any(c.coverage_ratio < 1.0 for c in summary.task_coverage):
        matters = "Some monitoring tasks fell short of their required completions."
        todo = "Go over the monitoring routine with the patient."
    else:
        matters = "Monitoring tasks were completed as required."
        todo = "Keep the monitoring schedule unchanged."
    return happened, matters, todo


def _dialogue_moves(
    case: PatientCase, summary: AdherenceSummary, gap_statements: list[str]
) -> tuple[str, str, str]:
    if not case.dialogue:
        return (
            " ".join(gap_statements),
            "Without dialogue, patient-reported adherence cannot be assessed.",
            "Invite the patient to report how dosing went this period.",
        )
    happened = f"{len(case.dialogue)} dialogue turn(s) were recorded."
    quoted = None
    for turn in reversed(case.dialogue):
        if turn.speaker.value == "patient":
            quoted = turn
            break
    if quoted is not None:
        happened += f' The patient said: "{quoted.text}"'
    signals = {t.adherence_signal.value for t in case.dialogue}
    if summary.missed_dose_reports:
        matters = (
            f"{summary.missed_dose_reports} turn(s) reported missed doses."
        )
        todo = "Follow up on the reported missed doses at the next contact."
    elif "reported_side_effect" in signals:
        matters = "A possible side effect was mentioned."
        todo = "Ask about the reported side effect at the next contact."
    else:
        matters = "No adherence problems were reported in dialogue."
        todo = "No dialogue follow-up is needed this period."
    return happened, matters, todo


def _plan_moves(
    summary: AdherenceSummary, triage: TriageResult
) -> tuple[str, str, str]:
    happened = f"This case is labeled {triage.label.value}."
    if triage.failsafe_triggered:
        happened += " A missed critical monitoring task forced the urgent label."
    matters = (
        f"The rules counted {triage.deviations_total} out-of-range reading(s)"
        f" and an overall adherence rate of {summary.overall_adherence_rate:.2f}."
    )
    if triage.label is UrgencyLabel.URGENT:
        todo = (
            "Prioritize outreach, confirm medications, set a follow-up"
            " interval, and approve after review."
        )
    elif triage.label is UrgencyLabel.ATTENTION:
        todo = (
            "Confirm medications, set a follow-up interval, and approve"
            " after review."
        )
    else:
        todo = (
            "Confirm medications, set a routine follow-up interval, and"
            " approve after review."
        )
    return happened, matters, todo


def generate_template_draft(
    case: PatientCase, triage: TriageResult, charts: list[ChartSpec]
) -> DraftReport:
    """Deterministic report: same inputs, byte-identical sections.

    Every numeric claim is copied from the case bundle or from the derived
    adherence/trend values; empty topics get their gap statement as the
    what-happened move.
    """
    summary = summarize_adherence(case)
    gaps = detect_gaps(case)
    sections = []
    for topic in TOPIC_ORDER:
        gap_statements = gaps.get(topic, [])
        if topic is SectionTopic.MEDICATIONS:
            texts = _medications_moves(case, summary, gap_statements)
        elif topic is SectionTopic.VITALS:
            texts = _vitals_moves(case, charts, gap_statements)
        elif topic is SectionTopic.ADHERENCE:
            texts = _adherence_moves(case, summary, triage, gap_statements)
        elif topic is SectionTopic.DIALOGUE_HIGHLIGHTS:
            texts = _dialogue_moves(case, summary, gap_statements)
        else:
            texts = _plan_moves(summary, triage)
        sections.append(
            DraftSection(
                section_id=topic.value,
                topic=topic,
                moves=tuple(
                    Move(tag=tag, text=text)
                    for tag, text in zip(MOVE_ORDER, texts)
                ),
                gap_statements=tuple(gap_statements),
                origin=Origin.TEMPLATE,
            )
        )
    report = DraftReport(
        case_id=case.case_id,
        sections=tuple(sections),
        urgency=triage.label,
        generated_at=datetime.utcnow().replace(microsecond=0),
        generator_config_digest=GeneratorConfig(backend=Backend.TEMPLATE).digest(),
    )
    return pair_charts(report, charts)


def pair_charts(report: DraftReport, charts: list[ChartSpec]) -> DraftReport:
    """Assign every chart to the one section sharing its topic.

    The result is a partition: each chart id appears in exactly one section's
    chart_refs; sections without matching charts keep empty refs.
    """
    known = {section.topic for section in report.sections}
    for chart in charts:
        if chart.topic not in known:
            raise TopicMismatch(
                f"chart {chart.chart_id} has topic {chart.topic.value}"
                " with no matching section"
            )
    sections = tuple(
        replace(
            section,
            chart_refs=tuple(
                c.chart_id for c in charts if c.topic is section.topic
            ),
        )
        for section in report.sections
    )
    return replace(report, sections=sections)


# -- external backend ---------------------------------------------------------


def _prompt_instructions() -> str:
    return (
        resources.files("carenotes.data").joinpath("prompt_template.txt").read_text()
    )


def _section_payload(
    case: PatientCase,
    section: DraftSection,
    summary: AdherenceSummary,
    charts: list[ChartSpec],
) -> str:
    from . import bundle  # local import keeps module load light

    case_doc = bundle.case_to_dict(case)
    data: dict = {"topic": section.topic.value}
    if section.topic is SectionTopic.MEDICATIONS:
        data["medications"] = case_doc["medications"]
        data["per_medication_adherence"] = [
            {
                "name": m.name,
                "expected_doses": m.expected_doses,
                "recorded_doses": m.recorded_doses,
            }
            for m in summary.per_medication
        ]
    elif section.topic is SectionTopic.VITALS:
        data["vitals"] = case_doc["vitals"]
    elif section.topic is SectionTopic.ADHERENCE:
        data["task_coverage"] = [
            {
                "task_id": c.task_id,
                "required_count": c.required_count,
                "completed_count": c.completed_count,
            }
            for c in summary.task_coverage
        ]
        data["overall_adherence_rate"] = round(summary.overall_adherence_rate, 2)
    elif section.topic is SectionTopic.DIALOGUE_HIGHLIGHTS:
        data["dialogue"] = case_doc["dialogue"]
    else:
        data["charts"] = [chart_to_dict(c) for c in charts]
    data["gap_statements"] = list(section.gap_statements)
    data["reporting_period"] = case_doc["reporting_period"]
    return json.dumps(data, indent=2)


_HEADING_RE = re.compile(
    r"^\s*what happened:\s*(?P<happened>.*?)"
    r"^\s*why it matters:\s*(?P<matters>.*?)"
    r"^\s*what to do next:\s*(?P<todo>.*)$",
    re.IGNORECASE | re.DOTALL | re.MULTILINE,
)


def parse_three_moves(text: str) -> Optional[tuple[str, str, str]]:
    """Extract the three labeled move blocks; None on any shape mismatch."""
    match = _HEADING_RE.search(text)
    if not match:
        return None
    moves = tuple(
        " ".join(match.group(name).split())
        for name in ("happened", "matters", "todo")
    )
    if not all(moves):
        return None
    return moves  # type: ignore[return-value]


def _request_section(
    endpoint: str,
    api_key: str,
    config: GeneratorConfig,
    instructions: str,
    payload: str,
) -> tuple[str, str, str]:
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    response = requests.post(
        endpoint,
        json={
            "model": config.model_id,
            "temperature": config.temperature,
            "max_tokens": config.max_tokens,
            "messages": [
                {"role": "system", "content": instructions},
                {"role": "user", "content": payload},
            ],
        },
        headers=headers,
        timeout=config.timeout_seconds,
    )
    response.raise_for_status()
    content = response.json()["choices"][0]["message"]["content"]
    moves = parse_three_moves(content)
    if moves is None:
        raise ValueError("response did not contain the three labeled moves")
    return moves


def generate_external_draft(
    case: PatientCase,
    triage: TriageResult,
    charts: list[ChartSpec],
    config: GeneratorConfig,
) -> DraftReport:
    """One service request per section; any failed section falls back to the
    template section with origin recorded, unless fallback is disabled."""
    template = generate_template_draft(case, triage, charts)
    endpoint = config.endpoint_url or os.environ.get("ADHERENCE_GEN_URL", "")
    api_key = os.environ.get("ADHERENCE_GEN_KEY", "")
    if not endpoint:
        if config.fallback_to_template:
            return replace(
                template,
                generator_config_digest=config.digest(),
                generated_at=datetime.utcnow().replace(microsecond=0),
            )
        raise ServiceUnreachable("no generation endpoint configured")

    summary = summarize_adherence(case)
    instructions = _prompt_instructions()

    def fetch(section: DraftSection) -> DraftSection:
        payload = _section_payload(case, section, summary, charts)
        moves = _request_section(endpoint, api_key, config, instructions, payload)
        return replace(
            section,
            moves=tuple(
                Move(tag=tag, text=text) for tag, text in zip(MOVE_ORDER, moves)
            ),
            origin=Origin.EXTERNAL_MODEL,
        )

    sections: list[DraftSection] = []
    with concurrent.futures.ThreadPoolExecutor(
        max_workers=max(1, config.max_concurrency)
    ) as pool:
        futures = {pool.submit(fetch, s): s for s in template.sections}
        results: dict[str, DraftSection] = {}
        for future, section in futures.items():
            try:
                results[section.section_id] = future.result()
            except Exception as exc:
                if not config.fallback_to_template:
                    raise ServiceUnreachable(
                        f"section {section.section_id}: {exc}"
                    ) from exc
                results[section.section_id] = section  # template fallback
    sections = [results[s.section_id] for s in template.sections]

    return DraftReport(
        case_id=case.case_id,
        sections=tuple(sections),
        urgency=triage.label,
        generated_at=datetime.utcnow().replace(microsecond=0),
        generator_config_digest=config.digest(),
    )


# -- orchestration and persistence ---------------------------------------------


def draft_case(store, case_id: str, config: GeneratorConfig, triage_config=None) -> DraftReport:
    """Build charts and a draft for a triaged case; persist both.

    Raises UnknownCase / MissingTriage per the store contract; appends the
    `drafted` audit event via the store.
    """
    from .charts import build_charts
    from .triage import TriageConfig

    case = store.get_case(case_id)
    triage = triage_result_from_dict(store.get_triage(case_id))
    triage_config = triage_config or TriageConfig.default()
    charts = build_charts(case, triage, triage_config)
    if config.backend is Backend.EXTERNAL:
        report = generate_external_draft(case, triage, charts, config)
    else:
        report = generate_template_draft(case, triage, charts)
    store.put_draft(
        case_id, report_to_dict(report), [chart_to_dict(c) for c in charts]
    )
    return report


def report_to_dict(report: DraftReport) -> dict:
    return {
        "case_id": report.case_id,
        "urgency": report.urgency.value,
        "generated_at": report.generated_at.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "generator_config_digest": report.generator_config_digest,
        "sections": [
            {
                "section_id": s.section_id,
                "topic": s.topic.value,
                "moves": [{"tag": m.tag.value, "text": m.text} for m in s.moves],
                "gap_statements": list(s.gap_statements),
                "chart_refs": list(s.chart_refs),
                "origin": s.origin.value,
            }
            for s in report.sections
        ],
    }


def report_from_dict(doc: dict) -> DraftReport:
    return DraftReport(
        case_id=doc["case_id"],
        urgency=UrgencyLabel(doc["urgency"]),
        generated_at=datetime.strptime(doc["generated_at"], "%Y-%m-%dT%H:%M:%SZ"),
        generator_config_digest=doc["generator_config_digest"],
        sections=tuple(
            DraftSection(
                section_id=s["section_id"],
                topic=SectionTopic(s["topic"]),
                moves=tuple(
                    Move(tag=MoveTag(m["tag"]), text=m["text"]) for m in s["moves"]
                ),
                gap_statements=tuple(s["gap_statements"]),
                chart_refs=tuple(s["chart_refs"]),
                origin=Origin(s["origin"]),
            )
            for s in doc["sections"]
        ),
    )
