"""HTTP review service: queue, triage/draft actions, single-page review flow.

Stateless over the store: every request reloads the session, and all session
mutations are serialized per case by the review layer. The physician identity
comes from the X-Physician-Id header (small-deployment scale; no auth
framework).
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Header, Request
from fastapi.responses import HTMLResponse, JSONResponse
from pydantic import BaseModel

from . import review
from .drafting import Backend, GeneratorConfig, draft_case, report_from_dict
from .errors import (
    Approved,
    CarenotesError,
    DuplicateCase,
    InvariantViolation,
    MalformedBundle,
    MissingDraft,
    MissingSession,
    MissingTriage,
    PreconditionUnmet,
    SchemaViolation,
    ServiceUnreachable,
    SessionExists,
    StaleEdit,
    TopicMismatch,
    UnknownCase,
    UnknownSection,
)
from .store import CaseStore
from .triage import TriageConfig, triage_case

_STATUS = {
    UnknownCase: 404,
    UnknownSection: 404,
    MissingTriage: 409,
    MissingDraft: 409,
    MissingSession: 409,
    DuplicateCase: 409,
    SessionExists: 409,
    StaleEdit: 409,
    Approved: 409,
    PreconditionUnmet: 412,
    MalformedBundle: 422,
    SchemaViolation: 422,
    InvariantViolation: 422,
    TopicMismatch: 422,
    ServiceUnreachable: 502,
}


class EditBody(BaseModel):
    expected_before: str
    after_text: str


class ConfirmBody(BaseModel):
    value: bool


class FollowUpBody(BaseModel):
    interval: str


def create_app(
    store: CaseStore,
    triage_config: Optional[TriageConfig] = None,
    gen_config: Optional[GeneratorConfig] = None,
    frontend_dir: Optional[Path] = None,
) -> FastAPI:
    triage_config = triage_config or TriageConfig.default()
    gen_config = gen_config or GeneratorConfig(backend=Backend.TEMPLATE)
    app = FastAPI(title="carenotes review service")

    @app.exception_handler(CarenotesError)
    async def _carenotes_error(request: Request, exc: CarenotesError):
        status = _STATUS.get(type(exc), 500)
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    def _require_physician(physician_id: Optional[str]) -> str:
        if not physician_id:
            raise PreconditionUnmet("X-Physician-Id header")
        return physician_id

    @app.get("/cases")
    def list_cases():
        return [
            {
                "case_id": entry.case_id,
                "label": entry.label.value if entry.label else None,
                "status": entry.status,
            }
            for entry in store.list_queue()
        ]

    @app.post("/cases/{case_id}/triage")
    def triage_endpoint(case_id: str):
        from .triage import triage_result_to_dict

        result = triage_case(store, case_id, triage_config)
        return triage_result_to_dict(result)

    @app.post("/cases/{case_id}/draft")
    def draft_endpoint(case_id: str):
        from .drafting import report_to_dict

        report = draft_case(store, case_id, gen_config, triage_config)
        return report_to_dict(report)

    @app.get("/cases/{case_id}/review")
    def review_view(case_id: str):
        draft_doc = store.get_draft(case_id)
        draft = report_from_dict(draft_doc)
        session_doc = store.get_session(case_id) if store.has_session(case_id) else None
        sections = []
        for section_doc in draft_doc["sections"]:
            moves = {m["tag"]: m["text"] for m in section_doc["moves"]}
            if session_doc:
                moves = dict(session_doc["section_texts"][section_doc["section_id"]])
            sections.append(
                {
                    "section_id": section_doc["section_id"],
                    "topic": section_doc["topic"],
                    "moves": moves,
                    "gap_statements": section_doc["gap_statements"],
                    "chart_refs": section_doc["chart_refs"],
                    "origin": section_doc["origin"],
                }
            )
        return {
            "case_id": case_id,
            "urgency": draft.urgency.value,
            "session": session_doc,
            "sections": sections,
            "charts": store.get_charts(case_id),
        }

    @app.post("/cases/{case_id}/session")
    def open_session(
        case_id: str,
        x_physician_id: Optional[str] = Header(default=None),
    ):
        physician = _require_physician(x_physician_id)
        session = review.open_session(store, case_id, physician)
        return review.session_to_dict(session)

    @app.patch("/cases/{case_id}/sections/{section_id}/{move_tag}")
    def edit_section(case_id: str, section_id: str, move_tag: str, body: EditBody):
        session = review.load_session(store, case_id)
        record = review.edit_section(
            store, session, section_id, move_tag, body.expected_before, body.after_text
        )
        return {
            "seq": record.seq,
            "section_id": record.section_id,
            "move_tag": record.move_tag,
            "after_text": record.after_text,
        }

    @app.post("/cases/{case_id}/confirm-medications")
    def confirm_medications(case_id: str, body: ConfirmBody):
        session = review.load_session(store, case_id)
        review.confirm_medications(store, session, body.value)
        return review.session_to_dict(session)

    @app.post("/cases/{case_id}/follow-up")
    def set_follow_up(case_id: str, body: FollowUpBody):
        session = review.load_session(store, case_id)
        try:
            interval = review.FollowUpInterval(body.interval)
        except ValueError:
            allowed = ", ".join(i.value for i in review.FollowUpInterval)
            raise SchemaViolation("interval", f"expected one of: {allowed}") from None
        review.set_follow_up(store, session, interval)
        return review.session_to_dict(session)

    @app.post("/cases/{case_id}/approve")
    def approve(case_id: str):
        session = review.load_session(store, case_id)
        note = review.approve(store, session)
        return review.note_to_dict(note)

    @app.get("/cases/{case_id}/note.html")
    def note_html(case_id: str):
        if case_id not in store.case_ids():
            raise UnknownCase(case_id)
        return HTMLResponse(content=store.read_export(case_id))

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app


def serve(
    store_dir: Path | str,
    port: int = 8000,
    host: str = "127.0.0.1",
    triage_config: Optional[TriageConfig] = None,
    gen_config: Optional[GeneratorConfig] = None,
    frontend_dir: Optional[Path] = None,
) -> None:
    import uvicorn

    app = create_app(
        CaseStore(store_dir),
        triage_config=triage_config,
        gen_config=gen_config,
        frontend_dir=frontend_dir,
    )
    uvicorn.run(app, host=host, port=port)
