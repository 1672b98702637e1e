"""Single-pass review workflow: open, edit inline, confirm, approve, export.

The physician is the author of record. Sessions move one way, in_review ->
approved; approval is gated on the medication checkbox and a selected
follow-up interval, and an approved session rejects every further mutation.
Edits use optimistic concurrency (the caller supplies the text it believes it
is replacing), and the append-only edit list replays from the draft to the
final note exactly.

Approval writes the immutable note, a self-contained HTML export with the
urgency badge and inline SVG charts, and `approved` + `exported` audit events
that always carry the physician actor — there is no code path here or
anywhere else that lets the system actor emit either event.
"""

from __future__ import annotations

import html as html_escape
from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Optional

from . import metrics
from .charts import ChartSpec, chart_from_dict
from .drafting import MOVE_ORDER, DraftReport, report_from_dict
from .errors import (
    Approved,
    PreconditionUnmet,
    SessionExists,
    StaleEdit,
    UnknownSection,
)
from .model import SectionTopic, UrgencyLabel
from .store import AuditAction, CaseStore, digest_doc


class SessionStatus(str, Enum):
    IN_REVIEW = "in_review"
    APPROVED = "approved"


class FollowUpInterval(str, Enum):
    ONE_WEEK = "1_week"
    TWO_WEEKS = "2_weeks"
    ONE_MONTH = "1_month"
    THREE_MONTHS = "3_months"
    NONE_SELECTED = "none_selected"


BADGE_COLORS = {
    UrgencyLabel.URGENT: "#c62828",
    UrgencyLabel.ATTENTION: "#ef6c00",
    UrgencyLabel.STABLE: "#2e7d32",
}


@dataclass(frozen=True)
class EditRecord:
    seq: int
    section_id: str
    move_tag: str
    before_text: str
    after_text: str
    timestamp: datetime


@dataclass
class ReviewSession:
    case_id: str
    physician_id: str
    status: SessionStatus
    section_texts: dict[str, dict[str, str]]  # section_id -> move_tag -> text
    edits: list[EditRecord] = field(default_factory=list)
    medications_confirmed: bool = False
    follow_up_interval: FollowUpInterval = FollowUpInterval.NONE_SELECTED
    opened_at: datetime = field(
        default_factory=lambda: datetime.utcnow().replace(microsecond=0)
    )
    approved_at: Optional[datetime] = None


@dataclass(frozen=True)
class NoteSection:
    section_id: str
    topic: SectionTopic
    moves: dict[str, str]  # move_tag -> final text
    chart_refs: tuple[str, ...]
    gap_statements: tuple[str, ...]


@dataclass(frozen=True)
class ApprovedNote:
    case_id: str
    physician_id: str
    sections: tuple[NoteSection, ...]
    urgency: UrgencyLabel
    follow_up_interval: FollowUpInterval
    modification_rate: float
    scope_bucket: metrics.ScopeBucket
    export_digest: str
    approved_at: datetime


def _section_texts_from_report(report: DraftReport) -> dict[str, dict[str, str]]:
    return {
        section.section_id: {move.tag.value: move.text for move in section.moves}
        for section in report.sections
    }


def note_text(section_texts: dict[str, dict[str, str]], section_order: list[str]) -> str:
    """Canonical flattened text used for edit metrics: moves in fixed order."""
    lines = []
    for section_id in section_order:
        moves = section_texts[section_id]
        for tag in MOVE_ORDER:
            lines.append(moves[tag.value])
    return "\n".join(lines)


def open_session(store: CaseStore, case_id: str, physician_id: str) -> ReviewSession:
    """Initialize a session from the stored draft; one session per case."""
    with store.case_lock(case_id):
        draft = report_from_dict(store.get_draft(case_id))  # UnknownCase/MissingDraft
        if store.has_session(case_id):
            raise SessionExists(case_id)
        session = ReviewSession(
            case_id=case_id,
            physician_id=physician_id,
            status=SessionStatus.IN_REVIEW,
            section_texts=_section_texts_from_report(draft),
        )
        store.save_session(case_id, session_to_dict(session))
        return session


def load_session(store: CaseStore, case_id: str) -> ReviewSession:
    return session_from_dict(store.get_session(case_id))


def _require_in_review(session: ReviewSession) -> None:
    if session.status is not SessionStatus.IN_REVIEW:
        raise Approved(session.case_id)


def edit_section(
    store: CaseStore,
    session: ReviewSession,
    section_id: str,
    move_tag: str,
    expected_before: str,
    after_text: str,
) -> EditRecord:
    """Replace one move's text if it still reads as the editor expected.

    Subsequent reads see after_text immediately; a mismatched expected_before
    raises StaleEdit without changing anything.
    """
    with store.case_lock(session.case_id):
        _require_in_review(session)
        if section_id not in session.section_texts:
            raise UnknownSection(section_id)
        moves = session.section_texts[section_id]
        if move_tag not in moves:
            raise UnknownSection(f"{section_id}/{move_tag}")
        current = moves[move_tag]
        if current != expected_before:
            raise StaleEdit(f"{section_id}/{move_tag}")
        record = EditRecord(
            seq=len(session.edits) + 1,
            section_id=section_id,
            move_tag=move_tag,
            before_text=current,
            after_text=after_text,
            timestamp=datetime.utcnow().replace(microsecond=0),
        )
        moves[move_tag] = after_text
        session.edits.append(record)
        store.save_session(session.case_id, session_to_dict(session))
        store.append_audit(
            session.physician_id,
            AuditAction.EDITED,
            session.case_id,
            digest_doc(_edit_to_dict(record)),
        )
        return record


def confirm_medications(store: CaseStore, session: ReviewSession, value: bool) -> None:
    with store.case_lock(session.case_id):
        _require_in_review(session)
        session.medications_confirmed = value
        digest = store.save_session(session.case_id, session_to_dict(session))
        store.append_audit(
            session.physician_id, AuditAction.CONFIRMED_MEDS, session.case_id, digest
        )


def set_follow_up(
    store: CaseStore, session: ReviewSession, interval: FollowUpInterval
) -> None:
    with store.case_lock(session.case_id):
        _require_in_review(session)
        session.follow_up_interval = interval
        digest = store.save_session(session.case_id, session_to_dict(session))
        store.append_audit(
            session.physician_id, AuditAction.SET_FOLLOW_UP, session.case_id, digest
        )


def apply_edits(
    base_texts: dict[str, dict[str, str]], edits: list[EditRecord]
) -> dict[str, dict[str, str]]:
    """Replay an edit list over draft texts (used to audit reconstruction)."""
    texts = {sid: dict(moves) for sid, moves in base_texts.items()}
    for record in sorted(edits, key=lambda e: e.seq):
        texts[record.section_id][record.move_tag] = record.after_text
    return texts


def approve(store: CaseStore, session: ReviewSession) -> ApprovedNote:
    """Close the session irreversibly and export the physician-approved note.

    Requires the medication confirmation and a selected follow-up interval;
    computes the modification rate against the original draft text.
    """
    with store.case_lock(session.case_id):
        _require_in_review(session)
        if not session.medications_confirmed:
            raise PreconditionUnmet("medications_confirmed")
        if session.follow_up_interval is FollowUpInterval.NONE_SELECTED:
            raise PreconditionUnmet("follow_up_interval")

        draft = report_from_dict(store.get_draft(session.case_id))
        order = [s.section_id for s in draft.sections]
        original = note_text(_section_texts_from_report(draft), order)
        final = note_text(session.section_texts, order)
        rate = metrics.modification_rate(original, final)
        bucket = metrics.scope_bucket(rate)

        session.status = SessionStatus.APPROVED
        session.approved_at = datetime.utcnow().replace(microsecond=0)
        store.save_session(session.case_id, session_to_dict(session))

        sections = tuple(
            NoteSection(
                section_id=s.section_id,
                topic=s.topic,
                moves=dict(session.section_texts[s.section_id]),
                chart_refs=s.chart_refs,
                gap_statements=s.gap_statements,
            )
            for s in draft.sections
        )
        charts = [chart_from_dict(d) for d in store.get_charts(session.case_id)]
        note = ApprovedNote(
            case_id=session.case_id,
            physician_id=session.physician_id,
            sections=sections,
            urgency=draft.urgency,
            follow_up_interval=session.follow_up_interval,
            modification_rate=rate,
            scope_bucket=bucket,
            export_digest="",
            approved_at=session.approved_at,
        )
        html = render_note_html(note, charts)
        export_digest = store.write_export(session.case_id, html)
        note = replace(note, export_digest=export_digest)
        note_digest = store.put_note(session.case_id, note_to_dict(note))
        store.append_audit(
            session.physician_id, AuditAction.APPROVED, session.case_id, note_digest
        )
        store.append_audit(
            session.physician_id, AuditAction.EXPORTED, session.case_id, export_digest
        )
        return note


# -- HTML export -----------------------------------------------------------


def _svg_chart(chart: ChartSpec) -> str:
    width, height, pad = 380, 170, 34
    esc = html_escape.escape
    if chart.empty or not chart.points:
        return (
            f'<svg width="{width}" height="60" role="img">'
            f'<text x="8" y="34" font-size="12" fill="#666">{esc(chart.caption)}</text>'
            "</svg>"
        )
    xs = [p.x for p in chart.points]
    ys = [p.y for p in chart.points] + [t.y for t in chart.threshold_lines]
    x_min, x_max = min(xs), max(xs)
    y_min, y_max = min(ys + [0.0] if chart.topic is SectionTopic.ADHERENCE else ys), max(ys)
    x_span = (x_max - x_min) or 1.0
    y_span = (y_max - y_min) or 1.0
    y_min -= 0.08 * y_span
    y_max += 0.08 * y_span
    y_span = y_max - y_min

    def sx(x: float) -> float:
        return pad + (x - x_min) / x_span * (width - 2 * pad)

    def sy(y: float) -> float:
        return height - pad - (y - y_min) / y_span * (height - 2 * pad)

    parts = [f'<svg width="{width}" height="{height}" role="img">']
    for t in chart.threshold_lines:
        y = sy(t.y)
        parts.append(
            f'<line x1="{pad}" y1="{y:.1f}" x2="{width - pad}" y2="{y:.1f}"'
            ' stroke="#999" stroke-dasharray="4 3"/>'
        )
        parts.append(
            f'<text x="{width - pad + 2}" y="{y + 3:.1f}" font-size="9"'
            f' fill="#666">{esc(t.label)}</text>'
        )
    if chart.topic is SectionTopic.ADHERENCE:
        bar_w = max(4.0, (width - 2 * pad) / max(1, len(chart.points)) * 0.6)
        base_y = sy(max(0.0, y_min))
        for p in chart.points:
            x = sx(p.x) - bar_w / 2
            y = sy(p.y)
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}"'
                f' height="{max(0.0, base_y - y):.1f}" fill="#4a7fb5"/>'
            )
    else:
        coords = " ".join(f"{sx(p.x):.1f},{sy(p.y):.1f}" for p in chart.points)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="#2a5d8f"'
            ' stroke-width="1.5"/>'
        )
        for p in chart.points:
            parts.append(
                f'<circle cx="{sx(p.x):.1f}" cy="{sy(p.y):.1f}" r="2.2" fill="#2a5d8f"/>'
            )
    annotated = {a.x for a in chart.annotations}
    for p in chart.points:
        if p.x in annotated:
            parts.append(
                f'<circle cx="{sx(p.x):.1f}" cy="{sy(p.y):.1f}" r="4.5"'
                ' fill="none" stroke="#c62828" stroke-width="1.5"/>'
            )
    parts.append("</svg>")
    return "".join(parts)


def render_note_html(note: ApprovedNote, charts: list[ChartSpec]) -> bytes:
    """Self-contained single-page export: badge, sections, inline SVG charts."""
    esc = html_escape.escape
    charts_by_id = {c.chart_id: c for c in charts}
    color = BADGE_COLORS[note.urgency]
    out = [
        "<!doctype html>",
        '<html><head><meta charset="utf-8">',
        f"<title>Approved note {esc(note.case_id)}</title>",
        "<style>",
        "body{font-family:sans-serif;max-width:860px;margin:2em auto;padding:0 1em;}",
        ".badge{display:inline-block;padding:2px 10px;border-radius:10px;"
        "color:#fff;font-weight:bold;}",
        "section{border-top:1px solid #ddd;padding:0.6em 0;}",
        "figure{margin:0.4em 0;}figcaption{font-size:0.85em;color:#555;}",
        ".move{margin:0.3em 0;}.tag{color:#777;font-size:0.8em;}",
        "</style></head><body>",
        f"<h1>Adherence report: {esc(note.case_id)}</h1>",
        f'<p><span class="badge" style="background:{color}">'
        f"{esc(note.urgency.value)}</span>"
        f" approved by {esc(note.physician_id)} at"
        f" {note.approved_at.strftime('%Y-%m-%dT%H:%M:%SZ')}</p>",
        f"<p>Follow-up interval: {esc(note.follow_up_interval.value)}."
        f" Modification rate: {note.modification_rate:.1f}%"
        f" ({esc(note.scope_bucket.value)}).</p>",
    ]
    for section in note.sections:
        out.append(f'<section id="{esc(section.section_id)}">')
        out.append(f"<h2>{esc(section.topic.value.replace('_', ' '))}</h2>")
        for tag in MOVE_ORDER:
            out.append(
                f'<p class="move"><span class="tag">'
                f"{esc(tag.value.replace('_', ' '))}:</span> "
                f"{esc(section.moves[tag.value])}</p>"
            )
        for statement in section.gap_statements:
            out.append(f'<p class="gap"><em>{esc(statement)}</em></p>')
        for chart_id in section.chart_refs:
            chart = charts_by_id.get(chart_id)
            if chart is None:
                continue
            out.append("<figure>")
            out.append(_svg_chart(chart))
            out.append(f"<figcaption>{esc(chart.caption)}</figcaption>")
            out.append("</figure>")
        out.append("</section>")
    out.append("</body></html>")
    return "\n".join(out).encode("utf-8")


# -- serialization -----------------------------------------------------------


def _edit_to_dict(record: EditRecord) -> dict:
    return {
        "seq": record.seq,
        "section_id": record.section_id,
        "move_tag": record.move_tag,
        "before_text": record.before_text,
        "after_text": record.after_text,
        "timestamp": record.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


def _edit_from_dict(doc: dict) -> EditRecord:
    return EditRecord(
        seq=doc["seq"],
        section_id=doc["section_id"],
        move_tag=doc["move_tag"],
        before_text=doc["before_text"],
        after_text=doc["after_text"],
        timestamp=datetime.strptime(doc["timestamp"], "%Y-%m-%dT%H:%M:%SZ"),
    )


def session_to_dict(session: ReviewSession) -> dict:
    return {
        "case_id": session.case_id,
        "physician_id": session.physician_id,
        "status": session.status.value,
        "section_texts": session.section_texts,
        "edits": [_edit_to_dict(e) for e in session.edits],
        "medications_confirmed": session.medications_confirmed,
        "follow_up_interval": session.follow_up_interval.value,
        "opened_at": session.opened_at.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "approved_at": (
            session.approved_at.strftime("%Y-%m-%dT%H:%M:%SZ")
            if session.approved_at
            else None
        ),
    }


def session_from_dict(doc: dict) -> ReviewSession:
    return ReviewSession(
        case_id=doc["case_id"],
        physician_id=doc["physician_id"],
        status=SessionStatus(doc["status"]),
        section_texts={
            sid: dict(moves) for sid, moves in doc["section_texts"].items()
        },
        edits=[_edit_from_dict(e) for e in doc["edits"]],
        medications_confirmed=doc["medications_confirmed"],
        follow_up_interval=FollowUpInterval(doc["follow_up_interval"]),
        opened_at=datetime.strptime(doc["opened_at"], "%Y-%m-%dT%H:%M:%SZ"),
        approved_at=(
            datetime.strptime(doc["approved_at"], "%Y-%m-%dT%H:%M:%SZ")
            if doc["approved_at"]
            else None
        ),
    )


def note_to_dict(note: ApprovedNote) -> dict:
    return {
        "case_id": note.case_id,
        "physician_id": note.physician_id,
        "urgency": note.urgency.value,
        "follow_up_interval": note.follow_up_interval.value,
        "modification_rate": note.modification_rate,
        "scope_bucket": note.scope_bucket.value,
        "export_digest": note.export_digest,
        "approved_at": note.approved_at.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "sections": [
            {
                "section_id": s.section_id,
                "topic": s.topic.value,
                "moves": dict(s.moves),
                "chart_refs": list(s.chart_refs),
                "gap_statements": list(s.gap_statements),
            }
            for s in note.sections
        ],
    }


def note_from_dict(doc: dict) -> ApprovedNote:
    return ApprovedNote(
        case_id=doc["case_id"],
        physician_id=doc["physician_id"],
        urgency=UrgencyLabel(doc["urgency"]),
        follow_up_interval=FollowUpInterval(doc["follow_up_interval"]),
        modification_rate=doc["modification_rate"],
        scope_bucket=metrics.ScopeBucket(doc["scope_bucket"]),
        export_digest=doc["export_digest"],
        approved_at=datetime.strptime(doc["approved_at"], "%Y-%m-%dT%H:%M:%SZ"),
        sections=tuple(
            NoteSection(
                section_id=s["section_id"],
                topic=SectionTopic(s["topic"]),
                moves=dict(s["moves"]),
                chart_refs=tuple(s["chart_refs"]),
                gap_statements=tuple(s["gap_statements"]),
            )
            for s in doc["sections"]
        ),
    )
