"""Case-bundle file format: parse, serialize, and dialogue signal extraction.

One JSON file per case. Top-level keys mirror the domain types; dates are
YYYY-MM-DD, timestamps RFC 3339 (trailing Z, treated as a single locale and
stored timezone-naive).

Adherence signals are extracted from patient dialogue turns by a fixed keyword
rule table (below) when a turn does not carry an explicit signal. No
statistical NLP: the table is the whole mechanism, so extraction is
deterministic and auditable.
"""

from __future__ import annotations

import json
from datetime import date, datetime

from .errors import InvariantViolation, MalformedBundle, SchemaViolation
from .model import (
    AdherenceSignal,
    DialogueTurn,
    MedicationRecord,
    MonitoringTask,
    Patient,
    PatientCase,
    ReportingPeriod,
    Sex,
    Speaker,
    VitalSample,
    VitalSeries,
    VitalType,
    validate_case,
)

# First matching row wins; rows are checked top to bottom. Applies to
# patient-speaker turns only (clinician questions would otherwise misfire).
SIGNAL_KEYWORDS: tuple[tuple[AdherenceSignal, tuple[str, ...]], ...] = (
    (
        AdherenceSignal.REPORTED_MISSED_DOSE,
        ("missed", "skipped", "forgot", "ran out", "didn't take", "did not take"),
    ),
    (
        AdherenceSignal.REPORTED_SIDE_EFFECT,
        ("side effect", "dizzy", "nausea", "rash", "makes me feel"),
    ),
    (
        AdherenceSignal.REPORTED_ADHERENT,
        ("every day as", "as prescribed", "took all", "taking my", "no trouble with"),
    ),
)


def extract_signal(speaker: Speaker, text: str) -> AdherenceSignal:
    """Apply the keyword rule table to one dialogue turn."""
    if speaker is not Speaker.PATIENT:
        return AdherenceSignal.NONE
    lowered = text.lower()
    for signal, keywords in SIGNAL_KEYWORDS:
        if any(k in lowered for k in keywords):
            return signal
    return AdherenceSignal.NONE


def _fmt_ts(ts: datetime) -> str:
    return ts.strftime("%Y-%m-%dT%H:%M:%SZ")


def _parse_date(raw, path: str) -> date:
    if not isinstance(raw, str):
        raise SchemaViolation(path, "expected a YYYY-MM-DD date string")
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise SchemaViolation(path, f"not a valid date: {raw!r}") from None


def _parse_ts(raw, path: str) -> datetime:
    if not isinstance(raw, str):
        raise SchemaViolation(path, "expected an RFC 3339 timestamp string")
    text = raw.replace("Z", "+00:00") if raw.endswith("Z") else raw
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        raise SchemaViolation(path, f"not a valid timestamp: {raw!r}") from None
    return parsed.replace(tzinfo=None)


def _require(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise SchemaViolation(path, "expected an object")
    if key not in obj:
        raise SchemaViolation(f"{path}.{key}" if path else key, "missing required field")
    return obj[key]


def _as_int(raw, path: str) -> int:
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise SchemaViolation(path, "expected an integer")
    return raw


def _as_number(raw, path: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise SchemaViolation(path, "expected a number")
    return float(raw)


def _as_str(raw, path: str) -> str:
    if not isinstance(raw, str):
        raise SchemaViolation(path, "expected a string")
    return raw


def _as_list(raw, path: str) -> list:
    if not isinstance(raw, list):
        raise SchemaViolation(path, "expected a list")
    return raw


def _as_enum(enum_cls, raw, path: str):
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise SchemaViolation(path, f"expected one of: {allowed}") from None


def parse_case_bundle(raw: bytes | str) -> PatientCase:
    """Parse one case-bundle file into a validated PatientCase.

    Dialogue turns without an explicit adherence_signal gain one via the
    keyword rule table. Raises MalformedBundle on syntax errors,
    SchemaViolation on missing/ill-typed fields (with the field path), and
    InvariantViolation when the parsed case fails validate_case.
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedBundle(f"not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedBundle(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaViolation("", "top level must be an object")

    case_id = _as_str(_require(doc, "case_id", ""), "case_id")

    patient_doc = _require(doc, "patient", "")
    patient = Patient(
        age=_as_int(_require(patient_doc, "age", "patient"), "patient.age"),
        sex=_as_enum(Sex, _require(patient_doc, "sex", "patient"), "patient.sex"),
    )

    conditions = tuple(
        _as_str(c, f"conditions[{i}]")
        for i, c in enumerate(_as_list(_require(doc, "conditions", ""), "conditions"))
    )

    medications = []
    for i, med in enumerate(_as_list(_require(doc, "medications", ""), "medications")):
        path = f"medications[{i}]"
        medications.append(
            MedicationRecord(
                name=_as_str(_require(med, "name", path), f"{path}.name"),
                dose=_as_str(_require(med, "dose", path), f"{path}.dose"),
                schedule=_as_int(_require(med, "schedule", path), f"{path}.schedule"),
                refill_dates=tuple(
                    _parse_date(d, f"{path}.refill_dates[{j}]")
                    for j, d in enumerate(
                        _as_list(med.get("refill_dates", []), f"{path}.refill_dates")
                    )
                ),
                recorded_doses=_as_int(
                    _require(med, "recorded_doses", path), f"{path}.recorded_doses"
                ),
            )
        )

    vitals = []
    for i, series in enumerate(_as_list(_require(doc, "vitals", ""), "vitals")):
        path = f"vitals[{i}]"
        samples = []
        for j, sample in enumerate(
            _as_list(series.get("samples", []), f"{path}.samples")
        ):
            spath = f"{path}.samples[{j}]"
            samples.append(
                VitalSample(
                    timestamp=_parse_ts(
                        _require(sample, "timestamp", spath), f"{spath}.timestamp"
                    ),
                    value=_as_number(_require(sample, "value", spath), f"{spath}.value"),
                )
            )
        vitals.append(
            VitalSeries(
                vital_type=_as_enum(
                    VitalType,
                    _require(series, "vital_type", path),
                    f"{path}.vital_type",
                ),
                unit=_as_str(_require(series, "unit", path), f"{path}.unit"),
                samples=tuple(samples),
            )
        )

    dialogue = []
    for i, turn in enumerate(_as_list(_require(doc, "dialogue", ""), "dialogue")):
        path = f"dialogue[{i}]"
        speaker = _as_enum(
            Speaker, _require(turn, "speaker", path), f"{path}.speaker"
        )
        text = _as_str(_require(turn, "text", path), f"{path}.text")
        if "adherence_signal" in turn:
            signal = _as_enum(
                AdherenceSignal, turn["adherence_signal"], f"{path}.adherence_signal"
            )
        else:
            signal = extract_signal(speaker, text)
        dialogue.append(
            DialogueTurn(
                speaker=speaker,
                timestamp=_parse_ts(
                    _require(turn, "timestamp", path), f"{path}.timestamp"
                ),
                text=text,
                adherence_signal=signal,
            )
        )

    tasks = []
    for i, task in enumerate(
        _as_list(_require(doc, "monitoring_tasks", ""), "monitoring_tasks")
    ):
        path = f"monitoring_tasks[{i}]"
        critical = _require(task, "critical", path)
        if not isinstance(critical, bool):
            raise SchemaViolation(f"{path}.critical", "expected a boolean")
        tasks.append(
            MonitoringTask(
                task_id=_as_str(_require(task, "task_id", path), f"{path}.task_id"),
                condition=_as_str(
                    _require(task, "condition", path), f"{path}.condition"
                ),
                description=_as_str(
                    _require(task, "description", path), f"{path}.description"
                ),
                required_frequency=_as_number(
                    _require(task, "required_frequency", path),
                    f"{path}.required_frequency",
                ),
                critical=critical,
                completion_timestamps=tuple(
                    _parse_ts(ts, f"{path}.completion_timestamps[{j}]")
                    for j, ts in enumerate(
                        _as_list(
                            task.get("completion_timestamps", []),
                            f"{path}.completion_timestamps",
                        )
                    )
                ),
            )
        )

    period_doc = _require(doc, "reporting_period", "")
    period = ReportingPeriod(
        start=_parse_date(
            _require(period_doc, "start", "reporting_period"),
            "reporting_period.start",
        ),
        end=_parse_date(
            _require(period_doc, "end", "reporting_period"), "reporting_period.end"
        ),
    )

    case = PatientCase(
        case_id=case_id,
        patient=patient,
        conditions=conditions,
        medications=tuple(medications),
        vitals=tuple(vitals),
        dialogue=tuple(dialogue),
        monitoring_tasks=tuple(tasks),
        reporting_period=period,
    )
    issues = validate_case(case)
    if issues:
        raise InvariantViolation(issues)
    return case


def case_to_dict(case: PatientCase) -> dict:
    """Plain-dict form of a case, in the bundle file's field order."""
    return {
        "case_id": case.case_id,
        "patient": {"age": case.patient.age, "sex": case.patient.sex.value},
        "conditions": list(case.conditions),
        "medications": [
            {
                "name": m.name,
                "dose": m.dose,
                "schedule": m.schedule,
                "refill_dates": [d.isoformat() for d in m.refill_dates],
                "recorded_doses": m.recorded_doses,
            }
            for m in case.medications
        ],
        "vitals": [
            {
                "vital_type": s.vital_type.value,
                "unit": s.unit,
                "samples": [
                    {"timestamp": _fmt_ts(p.timestamp), "value": p.value}
                    for p in s.samples
                ],
            }
            for s in case.vitals
        ],
        "dialogue": [
            {
                "speaker": t.speaker.value,
                "timestamp": _fmt_ts(t.timestamp),
                "text": t.text,
                "adherence_signal": t.adherence_signal.value,
            }
            for t in case.dialogue
        ],
        "monitoring_tasks": [
            {
                "task_id": t.task_id,
                "condition": t.condition,
                "description": t.description,
                "required_frequency": t.required_frequency,
                "critical": t.critical,
                "completion_timestamps": [
                    _fmt_ts(ts) for ts in t.completion_timestamps
                ],
            }
            for t in case.monitoring_tasks
        ],
        "reporting_period": {
            "start": case.reporting_period.start.isoformat(),
            "end": case.reporting_period.end.isoformat(),
        },
    }


def serialize_case_bundle(case: PatientCase) -> bytes:
    """Canonical bundle bytes; stable field order so equal cases serialize
    byte-identically."""
    return (json.dumps(case_to_dict(case), indent=2) + "\n").encode("utf-8")
