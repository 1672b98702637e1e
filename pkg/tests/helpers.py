"""Independent oracles and checkers used across the test suite.

Everything here is deliberately implemented apart from the library code it
checks: a different Levenshtein formulation, plain-loop statistics, and a
text-side numeric-token scanner for the no-fabrication and gap-soundness
checks.
"""

from __future__ import annotations

import re
from functools import lru_cache

from carenotes import bundle
from carenotes.model import PatientCase
from carenotes.triage import AdherenceSummary, TrendFindings, TriageResult

# ISO dates / timestamps are period metadata, not numeric claims.
_DATE_RE = re.compile(r"\d{4}-\d{2}-\d{2}(?:T\d{2}:\d{2}:\d{2}Z?)?")
_NUM_RE = re.compile(r"(?<![\w.])[+-]?\d+(?:\.\d+)?(?!\w)(?!\.\d)")


def numeric_tokens(text: str) -> list[str]:
    """Standalone number tokens in text, ignoring dates and digits embedded
    in words (e.g. type2_diabetes)."""
    return _NUM_RE.findall(_DATE_RE.sub(" ", text))


def allowed_numbers(
    case: PatientCase,
    summary: AdherenceSummary,
    trends: TrendFindings,
    triage: TriageResult | None = None,
) -> set[float]:
    """Every numeric value template text may legitimately contain: numbers in
    the serialized bundle, counts of its collections, and the derived
    adherence/trend/triage fields."""
    values: set[float] = set()

    def walk(node):
        if isinstance(node, bool):
            return
        if isinstance(node, (int, float)):
            values.add(float(node))
        elif isinstance(node, str):
            for token in numeric_tokens(node):
                values.add(float(token))
        elif isinstance(node, list):
            for item in node:
                walk(item)
        elif isinstance(node, dict):
            for item in node.values():
                walk(item)

    walk(bundle.case_to_dict(case))
    for collection in (
        case.medications,
        case.vitals,
        case.dialogue,
        case.monitoring_tasks,
        case.conditions,
    ):
        values.add(float(len(collection)))
    for med in summary.per_medication:
        values.update(
            (float(med.expected_doses), float(med.recorded_doses), med.adherence_rate)
        )
    values.update(
        (
            summary.overall_adherence_rate,
            float(summary.gap_days),
            float(summary.missed_dose_reports),
        )
    )
    for coverage in summary.task_coverage:
        values.update(
            (
                float(coverage.required_count),
                float(coverage.completed_count),
                coverage.coverage_ratio,
            )
        )
    for trend in trends.per_vital:
        if trend.slope is not None:
            values.add(trend.slope)
        if trend.last_value is not None:
            values.add(trend.last_value)
        values.update((float(trend.deviation_count), float(trend.sample_count)))
    if triage is not None:
        values.add(float(triage.deviations_total))
    return values


def token_is_allowed(token: str, allowed: set[float]) -> bool:
    """Exact match for integers; display-rounding match for decimals (a token
    printed with d decimals matches any allowed value rounding to it)."""
    value = float(token)
    if value in allowed:
        return True
    if "." in token:
        decimals = len(token.split(".", 1)[1])
        tolerance = 0.5 * 10 ** (-decimals) + 1e-12
        return any(abs(value - candidate) <= tolerance for candidate in allowed)
    return False


def fabricated_tokens(text: str, allowed: set[float]) -> list[str]:
    return [t for t in numeric_tokens(text) if not token_is_allowed(t, allowed)]


# -- independent metric oracles -------------------------------------------------


def levenshtein_oracle(a: list[str], b: list[str]) -> int:
    """Memoized-recursion edit distance, independent of the two-row DP."""
    a_t, b_t = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def dist(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            dist(i - 1, j) + 1,
            dist(i, j - 1) + 1,
            dist(i - 1, j - 1) + (a_t[i - 1] != b_t[j - 1]),
        )

    return dist(len(a_t), len(b_t))


def modification_rate_oracle(original: str, edited: str) -> float:
    a, b = original.split(), edited.split()
    return 100.0 * levenshtein_oracle(a, b) / max(1, max(len(a), len(b)))


def cronbach_alpha_oracle(matrix: list[list[float]]) -> float:
    """Plain-loop formula evaluation (sample variances, n-1)."""

    def var(xs: list[float]) -> float:
        m = sum(xs) / len(xs)
        return sum((x - m) ** 2 for x in xs) / (len(xs) - 1)

    k = len(matrix[0])
    item_vars = [var([row[j] for row in matrix]) for j in range(k)]
    totals = [sum(row) for row in matrix]
    return k / (k - 1) * (1 - sum(item_vars) / var(totals))
