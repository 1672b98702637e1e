import json
from dataclasses import replace
from datetime import date, datetime

from carenotes.charts import build_charts
from carenotes.drafting import (
    MOVE_ORDER,
    Backend,
    GeneratorConfig,
    MoveTag,
    Origin,
    detect_gaps,
    draft_case,
    generate_template_draft,
    parse_three_moves,
    report_from_dict,
    report_to_dict,
)
from carenotes.errors import MissingTriage
from carenotes.model import (
    MedicationRecord,
    Patient,
    PatientCase,
    ReportingPeriod,
    SectionTopic,
    Sex,
    UrgencyLabel,
    VitalSeries,
    VitalType,
)
from carenotes.simulate import CohortSpec, generate_case, generate_cohort
from carenotes.triage import (
    TriageConfig,
    detect_trends,
    run_triage,
    summarize_adherence,
    triage_case,
)

from helpers import allowed_numbers, fabricated_tokens, numeric_tokens

CONFIG = TriageConfig.default()


def template_for(case):
    triage = run_triage(case, CONFIG)
    charts = build_charts(case, triage, CONFIG)
    return generate_template_draft(case, triage, charts), triage, charts


def empty_vitals_case() -> PatientCase:
    return PatientCase(
        case_id="gap-case",
        patient=Patient(age=59, sex=Sex.MALE),
        conditions=("hypertension",),
        medications=(
            MedicationRecord(name="A", dose="10 mg", schedule=1, recorded_doses=7),
        ),
        vitals=(
            VitalSeries(vital_type=VitalType.SYSTOLIC_BP, unit="mmHg", samples=()),
        ),
        dialogue=(),
        monitoring_tasks=(),
        reporting_period=ReportingPeriod(date(2025, 3, 1), date(2025, 3, 7)),
    )


# -- detect_gaps -------------------------------------------------------------------


def test_empty_vitals_series_produces_fixed_format_gap():
    gaps = detect_gaps(empty_vitals_case())
    assert gaps[SectionTopic.VITALS] == [
        "No systolic_bp readings were recorded between 2025-03-01 and 2025-03-07."
    ]
    assert gaps[SectionTopic.DIALOGUE_HIGHLIGHTS] == [
        "No dialogue was recorded between 2025-03-01 and 2025-03-07."
    ]


def test_fully_populated_case_has_no_gaps():
    case = generate_case(12, UrgencyLabel.STABLE)
    assert detect_gaps(case) == {}


def test_only_missing_vital_named():
    # Two tracked vitals; only glucose has no samples.
    case = generate_case(12, UrgencyLabel.STABLE)
    emptied = replace(
        case,
        vitals=(
            case.vitals[0],
            VitalSeries(vital_type=VitalType.GLUCOSE, unit="mg/dL", samples=()),
        ),
    )
    gaps = detect_gaps(emptied)
    assert len(gaps[SectionTopic.VITALS]) == 1
    assert "glucose" in gaps[SectionTopic.VITALS][0]
    assert "systolic_bp" not in gaps[SectionTopic.VITALS][0]


def test_zero_dose_medication_gap():
    case = empty_vitals_case()
    case = replace(
        case,
        medications=(
            MedicationRecord(name="A", dose="10 mg", schedule=1, recorded_doses=0),
        ),
    )
    gaps = detect_gaps(case)
    assert gaps[SectionTopic.MEDICATIONS] == [
        "No doses of A were recorded between 2025-03-01 and 2025-03-07."
    ]


# -- template fidelity ---------------------------------------------------------------


def test_five_sections_three_moves_fixed_order():
    for target in UrgencyLabel:
        case = generate_case(21, target)
        report, _, _ = template_for(case)
        assert [s.topic for s in report.sections] == [
            SectionTopic.MEDICATIONS,
            SectionTopic.VITALS,
            SectionTopic.ADHERENCE,
            SectionTopic.DIALOGUE_HIGHLIGHTS,
            SectionTopic.PLAN,
        ]
        for section in report.sections:
            assert [m.tag for m in section.moves] == list(MOVE_ORDER)
            assert all(m.text for m in section.moves)
            assert section.origin is Origin.TEMPLATE


def test_template_is_deterministic_modulo_timestamp():
    case = generate_case(33, UrgencyLabel.URGENT)
    first, _, _ = template_for(case)
    second, _, _ = template_for(case)
    doc_a = report_to_dict(first)
    doc_b = report_to_dict(second)
    doc_a.pop("generated_at")
    doc_b.pop("generated_at")
    assert json.dumps(doc_a) == json.dumps(doc_b)


def test_empty_vitals_what_happened_is_the_gap_statement():
    case = empty_vitals_case()
    report, _, _ = template_for(case)
    vitals = next(s for s in report.sections if s.topic is SectionTopic.VITALS)
    assert vitals.gap_statements == (
        "No systolic_bp readings were recorded between 2025-03-01 and 2025-03-07.",
    )
    assert vitals.moves[0].text == vitals.gap_statements[0]


def test_urgency_badge_matches_triage_label():
    case = generate_case(14, UrgencyLabel.URGENT)
    report, triage, _ = template_for(case)
    assert report.urgency is triage.label


def test_gap_soundness_empty_topics_have_no_numeric_claims():
    case = empty_vitals_case()
    report, _, _ = template_for(case)
    for section in report.sections:
        if section.topic in (SectionTopic.VITALS, SectionTopic.DIALOGUE_HIGHLIGHTS):
            assert section.gap_statements
            for move in section.moves:
                assert numeric_tokens(move.text) == [], move.text


def test_no_fabrication_across_cohort():
    spec = CohortSpec(
        seed=9,
        mix={UrgencyLabel.URGENT: 6, UrgencyLabel.ATTENTION: 4, UrgencyLabel.STABLE: 2},
    )
    for case in generate_cohort(spec):
        report, triage, _ = template_for(case)
        allowed = allowed_numbers(
            case, summarize_adherence(case), detect_trends(case, CONFIG), triage
        )
        for section in report.sections:
            for move in section.moves:
                assert fabricated_tokens(move.text, allowed) == [], move.text


def test_report_dict_roundtrip():
    case = generate_case(3, UrgencyLabel.ATTENTION)
    report, _, _ = template_for(case)
    assert report_from_dict(report_to_dict(report)) == report


def test_golden_draft_seed_42(pytestconfig):
    case = generate_case(42, UrgencyLabel.URGENT)
    report, _, _ = template_for(case)
    doc = report_to_dict(report)
    doc.pop("generated_at")
    golden_path = pytestconfig.rootpath / "tests" / "data" / "golden_draft_seed42.json"
    golden = json.loads(golden_path.read_text())
    assert doc == golden


def test_generator_config_defaults_and_validation():
    config = GeneratorConfig()
    assert config.model_id == "Qwen3-8B"
    assert config.temperature == 0.7
    assert config.max_tokens == 1200
    assert config.timeout_seconds == 30
    import pytest

    with pytest.raises(ValueError):
        GeneratorConfig(temperature=-0.1)
    with pytest.raises(ValueError):
        GeneratorConfig(max_tokens=0)
    # digest depends only on the generation-relevant fields
    assert GeneratorConfig().digest() == GeneratorConfig(timeout_seconds=5).digest()
    assert GeneratorConfig().digest() != GeneratorConfig(temperature=0.2).digest()


# -- move parsing -----------------------------------------------------------------


def test_parse_three_moves_happy_path():
    text = (
        "What happened:\nDoses were recorded.\n"
        "Why it matters:\nAdherence held steady.\n"
        "What to do next:\nKeep the plan."
    )
    assert parse_three_moves(text) == (
        "Doses were recorded.",
        "Adherence held steady.",
        "Keep the plan.",
    )


def test_parse_three_moves_rejects_missing_or_empty_blocks():
    assert parse_three_moves("What happened:\nA.\nWhy it matters:\nB.") is None
    assert (
        parse_three_moves(
            "What happened:\n\nWhy it matters:\nB.\nWhat to do next:\nC."
        )
        is None
    )
    assert parse_three_moves("free-form text with no headings") is None


def test_parse_three_moves_case_insensitive_headings():
    text = (
        "WHAT HAPPENED: a\n"
        "why it matters: b\n"
        "What To Do Next: c"
    )
    assert parse_three_moves(text) == ("a", "b", "c")


# -- draft_case orchestration -------------------------------------------------------


def test_draft_before_triage_raises(store_factory):
    store = store_factory()
    case = generate_case(2, UrgencyLabel.STABLE)
    store.put_case(case)
    try:
        draft_case(store, case.case_id, GeneratorConfig(), CONFIG)
    except MissingTriage:
        pass
    else:
        raise AssertionError("expected MissingTriage")
    assert not store.has_draft(case.case_id)


def test_draft_twice_identical_except_timestamp(store_factory):
    store = store_factory()
    case = generate_case(2, UrgencyLabel.STABLE)
    store.put_case(case)
    triage_case(store, case.case_id, CONFIG)
    first = report_to_dict(draft_case(store, case.case_id, GeneratorConfig(), CONFIG))
    second = report_to_dict(draft_case(store, case.case_id, GeneratorConfig(), CONFIG))
    first.pop("generated_at")
    second.pop("generated_at")
    assert first == second


def test_draft_cohort_end_to_end(store_factory):
    store = store_factory()
    spec = CohortSpec(
        seed=17,
        mix={UrgencyLabel.URGENT: 3, UrgencyLabel.ATTENTION: 2, UrgencyLabel.STABLE: 1},
    )
    for case in generate_cohort(spec):
        store.put_case(case)
    for case_id in store.case_ids():
        triage_case(store, case_id, CONFIG)
        draft_case(store, case_id, GeneratorConfig(), CONFIG)
    assert all(store.has_draft(cid) for cid in store.case_ids())
    assert len(store.case_ids()) == 6
