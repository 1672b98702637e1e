"""Edit metrics, scope buckets, and the evaluation statistics.

The modification rate is a tool-side proxy: word-level Levenshtein distance
over the longer text's word count. Percentages estimated by hand during
review are not exactly comparable and should not be read as the same
quantity.

The one-sample t-test's two-sided p-value comes from the Student-t tail via a
regularized incomplete beta (continued fraction); the test suite holds it to
a high-precision reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateInput


def tokenize(text: str) -> list[str]:
    return text.split()


def word_levenshtein(a: list[str], b: list[str]) -> int:
    """Word-level edit distance, two-row dynamic programming."""
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, word_a in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, word_b in enumerate(b, start=1):
            cost = 0 if word_a == word_b else 1
            current[j] = min(
                previous[j] + 1,  # delete
                current[j - 1] + 1,  # insert
                previous[j - 1] + cost,  # substitute
            )
        previous = current
    return previous[len(b)]


def modification_rate(original: str, edited: str) -> float:
    """Percent of word-level change between two texts, in [0, 100]."""
    a = tokenize(original)
    b = tokenize(edited)
    distance = word_levenshtein(a, b)
    return 100.0 * distance / max(1, max(len(a), len(b)))


class ScopeBucket(str, Enum):
    UNMODIFIED = "unmodified"
    LT_10 = "lt_10"
    FROM_10_TO_30 = "from_10_to_30"
    GT_30 = "gt_30"


def scope_bucket(rate: float) -> ScopeBucket:
    """0 -> unmodified; (0,10) -> lt_10; [10,30] -> from_10_to_30; else gt_30."""
    if not 0 <= rate <= 100:
        raise ValueError(f"rate must be in [0, 100], got {rate}")
    if rate == 0:
        return ScopeBucket.UNMODIFIED
    if rate < 10:
        return ScopeBucket.LT_10
    if rate <= 30:
        return ScopeBucket.FROM_10_TO_30
    return ScopeBucket.GT_30


# -- Student-t -----------------------------------------------------------------


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iter = 300
    eps = 3e-16
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_p_two_sided(t: float, df: int) -> float:
    """P(|T| >= |t|) for T ~ Student-t with df degrees of freedom."""
    if df < 1:
        raise DegenerateInput(f"df must be >= 1, got {df}")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return min(1.0, regularized_incomplete_beta(df / 2.0, 0.5, x))


@dataclass(frozen=True)
class StatResult:
    t: float
    df: int
    p_two_sided: float
    mean: float
    sd: float
    n: int


def one_sample_t(mean: float, sd: float, n: int, mu0: float) -> StatResult:
    """One-sample t-test from summary statistics."""
    if n < 2:
        raise DegenerateInput(f"n must be >= 2, got {n}")
    if sd <= 0:
        raise DegenerateInput(f"sd must be > 0, got {sd}")
    t = (mean - mu0) / (sd / math.sqrt(n))
    df = n - 1
    return StatResult(
        t=t, df=df, p_two_sided=student_t_p_two_sided(t, df), mean=mean, sd=sd, n=n
    )


def one_sample_t_from_scores(scores, mu0: float) -> StatResult:
    arr = np.asarray(scores, dtype=float)
    if arr.size < 2:
        raise DegenerateInput(f"need >= 2 scores, got {arr.size}")
    return one_sample_t(float(arr.mean()), float(arr.std(ddof=1)), int(arr.size), mu0)


def cronbach_alpha(scores) -> float:
    """alpha = k/(k-1) * (1 - sum item variances / variance of row sums).

    `scores` is responses x items; sample variances (n-1 denominator).
    """
    arr = np.asarray(scores, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
        raise DegenerateInput("need at least 2 responses and 2 items")
    k = arr.shape[1]
    item_vars = arr.var(axis=0, ddof=1)
    total_var = arr.sum(axis=1).var(ddof=1)
    if total_var == 0:
        raise DegenerateInput("zero variance of response totals")
    return k / (k - 1.0) * (1.0 - item_vars.sum() / total_var)


# -- questionnaire aggregation ---------------------------------------------------

N_DIMENSIONS = 12


class SafetyFlag(str, Enum):
    NONE = "none"
    MINOR_CONCERN = "minor_concern"
    SAFETY_CRITICAL = "safety_critical"


@dataclass(frozen=True)
class QuestionnaireResponse:
    case_id: str
    physician_id: str
    scores: tuple[int, ...]  # Q1..Q12, each in [1, 10]
    editing_scope: ScopeBucket
    safety_flag: SafetyFlag

    def __post_init__(self):
        if len(self.scores) != N_DIMENSIONS:
            raise ValueError(f"expected {N_DIMENSIONS} scores, got {len(self.scores)}")
        if any(not 1 <= s <= 10 for s in self.scores):
            raise ValueError("scores must be integers in [1, 10]")


@dataclass(frozen=True)
class AggregateReport:
    n_responses: int
    dimension_means: tuple[float, ...]  # Q1..Q12
    overall_mean: float  # unweighted mean of the dimension means
    per_physician_mean: dict[str, float]  # across all 12 dimensions
    per_physician_q10_mean: dict[str, float]
    bucket_histogram: dict[ScopeBucket, int]
    safety_counts: dict[SafetyFlag, int]


def overall_mean_of_dimensions(dimension_means) -> float:
    """Overall score: equal-weight mean of the per-dimension means."""
    means = list(dimension_means)
    if len(means) != N_DIMENSIONS:
        raise ValueError(f"expected {N_DIMENSIONS} dimension means")
    return sum(means) / N_DIMENSIONS


def aggregate(responses: list[QuestionnaireResponse]) -> AggregateReport:
    if not responses:
        raise DegenerateInput("no responses to aggregate")
    matrix = np.array([r.scores for r in responses], dtype=float)
    dimension_means = tuple(float(x) for x in matrix.mean(axis=0))

    physicians: dict[str, list[QuestionnaireResponse]] = {}
    for response in responses:
        physicians.setdefault(response.physician_id, []).append(response)
    per_mean = {
        pid: float(np.mean([r.scores for r in group]))
        for pid, group in physicians.items()
    }
    per_q10 = {
        pid: float(np.mean([r.scores[9] for r in group]))
        for pid, group in physicians.items()
    }

    buckets = {bucket: 0 for bucket in ScopeBucket}
    safety = {flag: 0 for flag in SafetyFlag}
    for response in responses:
        buckets[response.editing_scope] += 1
        safety[response.safety_flag] += 1

    return AggregateReport(
        n_responses=len(responses),
        dimension_means=dimension_means,
        overall_mean=overall_mean_of_dimensions(dimension_means),
        per_physician_mean=per_mean,
        per_physician_q10_mean=per_q10,
        bucket_histogram=buckets,
        safety_counts=safety,
    )


def responses_from_docs(docs: list[dict]) -> list[QuestionnaireResponse]:
    """Build responses from parsed JSON documents (the `stats` file format)."""
    return [
        QuestionnaireResponse(
            case_id=doc["case_id"],
            physician_id=doc["physician_id"],
            scores=tuple(int(s) for s in doc["scores"]),
            editing_scope=ScopeBucket(doc["editing_scope"]),
            safety_flag=SafetyFlag(doc["safety_flag"]),
        )
        for doc in docs
    ]
