"""Exception types shared across the package."""


class CarenotesError(Exception):
    """Base class for all operational errors."""


class MalformedBundle(CarenotesError):
    """Case-bundle file is not parseable at the syntax level."""


class SchemaViolation(CarenotesError):
    """Case-bundle file is missing a field or has an ill-typed field."""

    def __init__(self, field_path: str, message: str = ""):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}" if message else field_path)


class InvariantViolation(CarenotesError):
    """A parsed case failed domain validation; carries the issue list."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


class UnknownCase(CarenotesError):
    """No case with this id exists in the store."""


class DuplicateCase(CarenotesError):
    """A case with this id already exists in the store."""


class MissingTriage(CarenotesError):
    """Operation requires a triage result that does not exist yet."""


class MissingDraft(CarenotesError):
    """Operation requires a draft report that does not exist yet."""


class SessionExists(CarenotesError):
    """An active review session already exists for this case."""


class MissingSession(CarenotesError):
    """No review session exists for this case."""


class StaleEdit(CarenotesError):
    """Optimistic-concurrency check failed: the text changed under the editor."""


class Approved(CarenotesError):
    """The session is approved and rejects further mutation."""


class PreconditionUnmet(CarenotesError):
    """Approval gate not satisfied; names the missing control."""

    def __init__(self, missing: str):
        self.missing = missing
        super().__init__(missing)


class UnknownSection(CarenotesError):
    """Edit targeted a section id that is not part of the draft."""


class TopicMismatch(CarenotesError):
    """A chart's topic does not match any section of the report."""


class ServiceUnreachable(CarenotesError):
    """External generation service failed and fallback is disabled."""


class DegenerateInput(CarenotesError):
    """Statistic undefined for this input (e.g. n < 2 or zero variance)."""
