import pytest

from carenotes.errors import DuplicateCase, MissingSession, MissingTriage, UnknownCase
from carenotes.model import UrgencyLabel
from carenotes.simulate import generate_case
from carenotes.store import AuditAction, AuditEvent, CaseStore
from carenotes.triage import TriageConfig, triage_case


@pytest.fixture
def store(store_factory):
    return store_factory()


def test_get_on_empty_store_raises(store):
    with pytest.raises(UnknownCase):
        store.get_case("nope")


def test_put_get_roundtrip(store):
    case = generate_case(1, UrgencyLabel.STABLE)
    store.put_case(case)
    assert store.get_case(case.case_id) == case


def test_duplicate_put_raises(store):
    case = generate_case(1, UrgencyLabel.STABLE)
    store.put_case(case)
    with pytest.raises(DuplicateCase):
        store.put_case(case)


def test_queue_preserves_ingestion_order(store):
    a = generate_case(10, UrgencyLabel.URGENT)
    b = generate_case(11, UrgencyLabel.STABLE)
    store.put_case(a)
    store.put_case(b)
    assert [e.case_id for e in store.list_queue()] == [a.case_id, b.case_id]
    # labels attach; order is still ingestion order
    config = TriageConfig.default()
    triage_case(store, b.case_id, config)
    triage_case(store, a.case_id, config)
    queue = store.list_queue()
    assert [e.case_id for e in queue] == [a.case_id, b.case_id]
    assert [e.label for e in queue] == [UrgencyLabel.URGENT, UrgencyLabel.STABLE]


def test_queue_order_invariant_under_retriage(store):
    cases = [generate_case(s, UrgencyLabel.ATTENTION) for s in (20, 21, 22)]
    for case in cases:
        store.put_case(case)
    config = TriageConfig.default()
    for case in cases:
        triage_case(store, case.case_id, config)
    before = [e.case_id for e in store.list_queue()]
    for case in reversed(cases):  # re-triage in a different order
        triage_case(store, case.case_id, config)
    assert [e.case_id for e in store.list_queue()] == before


def test_draft_requires_triage(store):
    case = generate_case(2, UrgencyLabel.STABLE)
    store.put_case(case)
    with pytest.raises(MissingTriage):
        store.put_draft(case.case_id, {"sections": []}, [])


def test_note_requires_approved_session(store):
    case = generate_case(3, UrgencyLabel.STABLE)
    store.put_case(case)
    with pytest.raises(MissingSession):
        store.put_note(case.case_id, {"x": 1})


def test_audit_seq_strictly_increasing_and_gap_free(store):
    for seed in range(5):
        store.put_case(generate_case(seed + 100, UrgencyLabel.STABLE))
    config = TriageConfig.default()
    for case_id in store.case_ids():
        triage_case(store, case_id, config)
    seqs = [e.seq for e in store.audit_events()]
    assert seqs == list(range(1, len(seqs) + 1))


def test_audit_rejects_system_actor_for_approval_events(store):
    case = generate_case(4, UrgencyLabel.STABLE)
    store.put_case(case)
    for action in (AuditAction.APPROVED, AuditAction.EXPORTED):
        with pytest.raises(ValueError):
            store.append_audit("system", action, case.case_id, "0" * 64)


def test_reload_restores_order_labels_and_audit(store_factory, tmp_path):
    store = store_factory("reload")
    cases = [generate_case(s, UrgencyLabel.URGENT) for s in (30, 31)]
    for case in cases:
        store.put_case(case)
    config = TriageConfig.default()
    triage_case(store, cases[1].case_id, config)

    reopened = CaseStore(store.root)
    assert [e.case_id for e in reopened.list_queue()] == [c.case_id for c in cases]
    assert reopened.get_case(cases[0].case_id) == cases[0]
    assert reopened.get_triage(cases[1].case_id)["label"] == "urgent"
    assert [e.seq for e in reopened.audit_events()] == [1, 2, 3]
    # appends continue the sequence after reload
    reopened.put_case(generate_case(32, UrgencyLabel.STABLE))
    assert reopened.audit_events()[-1].seq == 4


def test_unknown_case_propagates_from_artifact_reads(store):
    with pytest.raises(UnknownCase):
        store.get_triage("ghost")
    with pytest.raises(UnknownCase):
        store.get_draft("ghost")


def test_audit_line_format_is_pipe_separated(store):
    case = generate_case(50, UrgencyLabel.STABLE)
    store.put_case(case)
    line = (store.root / "audit.log").read_text().splitlines()[0]
    fields = line.split("|")
    assert len(fields) == 6
    seq, timestamp, actor, action, case_id, digest = fields
    assert seq == "1"
    assert timestamp.endswith("Z") and "T" in timestamp
    assert actor == "system"
    assert action == "ingested"
    assert case_id == case.case_id
    assert len(digest) == 64 and int(digest, 16) >= 0
    assert AuditEvent.from_line(line) == store.audit_events()[0]


def test_concurrent_puts_keep_audit_gap_free(store):
    import threading

    cases = [generate_case(200 + i, UrgencyLabel.STABLE) for i in range(16)]
    threads = [
        threading.Thread(target=store.put_case, args=(case,)) for case in cases
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    seqs = [e.seq for e in store.audit_events()]
    assert seqs == list(range(1, 17))
    on_disk = [
        int(line.split("|", 1)[0])
        for line in (store.root / "audit.log").read_text().splitlines()
    ]
    assert on_disk == seqs
    assert len(store.case_ids()) == 16
