"""Shared fixtures, plus a suite-wide author-of-record audit sweep.

Every test that creates a CaseStore registers its audit log here; at session
end we re-read every log and fail the run if any approved/exported event was
recorded with the system actor.
"""

from __future__ import annotations

from pathlib import Path

import pytest

from carenotes.store import SYSTEM_ACTOR, AuditEvent, CaseStore


def pytest_configure(config):
    config._audit_log_paths = []


@pytest.fixture(scope="session")
def audit_registry(request) -> list[Path]:
    return request.config._audit_log_paths


@pytest.fixture
def store_factory(tmp_path, request):
    """Create stores under tmp_path and register their audit logs."""

    def make(name: str = "store") -> CaseStore:
        root = tmp_path / name
        store = CaseStore(root)
        request.config._audit_log_paths.append(root / "audit.log")
        return store

    return make


def pytest_sessionfinish(session, exitstatus):
    paths = getattr(session.config, "_audit_log_paths", [])
    violations = []
    checked = 0
    for path in paths:
        if not path.exists():
            continue
        for line in path.read_text().splitlines():
            event = AuditEvent.from_line(line)
            if event.action.value in ("approved", "exported"):
                checked += 1
                if event.actor == SYSTEM_ACTOR:
                    violations.append((str(path), line))
    status = "PASS" if not violations else "FAIL"
    print(
        f"\n[ACCEPTANCE] author-of-record (all suite audit logs): {status}"
        f" — {checked} approved/exported events across {len(paths)} stores,"
        f" {len(violations)} system-actor violations"
    )
    if violations:
        for path, line in violations[:10]:
            print(f"  VIOLATION {path}: {line}")
        session.exitstatus = 1
