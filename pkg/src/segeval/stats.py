"""Cohort statistics: paired tests, percent differences, rater variability.

Both the paired t-test and the Wilcoxon signed-rank test are always
attempted when two methods are compared, and both are labelled in the
output; no claim is made about which one a reader should prefer.
Wilcoxon drops zero differences, ranks by midranks, and is exact (full
sign enumeration, evaluated by dynamic programming over the achievable
rank sums) up to 20 effective cases; beyond that it uses the normal
approximation with tie-corrected variance and a 0.5 continuity
correction.  All results are independent of input ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import (
    AllZeroDifferences,
    DegenerateVariance,
    DuplicateRecord,
    LengthMismatch,
    NoPairedCases,
    TooFewCases,
    TooFewDelineations,
    ValidationError,
    ZeroBaseline,
)
from .grid import Mask
from .overlap import confusion_counts, overlap_metrics
from .phantom import volume_mm3
from .special import normal_two_sided_p, t_two_sided_p

EXACT_WILCOXON_MAX_N = 20

METRIC_NAMES = frozenset(
    {
        "dice",
        "jaccard",
        "precision",
        "recall",
        "volume_similarity",
        "hausdorff",
        "hd95",
        "mean_sd",
        "rms",
        "volume_mm3",
    }
)


@dataclass(frozen=True)
class MetricRecord:
    """One metric value for one (case, method) pair."""

    case_id: str
    method: str
    metric: str
    value: float

    def __post_init__(self):
        if self.metric not in METRIC_NAMES:
            raise ValidationError(f"unknown metric name {self.metric!r}")


@dataclass(frozen=True)
class TestResult:
    kind: str  # paired_t | wilcoxon_exact | wilcoxon_normal
    statistic: float
    df: Optional[float]  # present only for paired_t
    n_effective: int
    p_two_sided: float


@dataclass(frozen=True)
class ComparisonRow:
    """Method-vs-method summary for one metric across a cohort."""

    metric: str
    mean_a: float
    mean_b: float
    percent_diff: Optional[float]  # None when the baseline mean is zero
    direction: Optional[str]  # "higher" | "lower"
    n_cases: int
    n_unpaired: int
    t_result: Optional[TestResult]
    t_flag: Optional[str]
    w_result: Optional[TestResult]
    w_flag: Optional[str]


@dataclass(frozen=True)
class VariabilityReport:
    grouping: str  # intra_rater | inter_rater
    mean_pairwise_dice: float
    volume_cv_percent: float
    n_pairs: int


def _paired_arrays(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise LengthMismatch(f"paired samples differ in length: {x.size} vs {y.size}")
    if x.size < 2:
        raise TooFewCases(f"need at least 2 paired cases, got {x.size}")
    return x, y


def paired_t(x, y) -> TestResult:
    """Two-sided paired t-test on per-case values aligned by position."""
    x, y = _paired_arrays(x, y)
    d = x - y
    n = d.size
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        raise DegenerateVariance("all paired differences are identical")
    t = float(d.mean()) / (sd / np.sqrt(n))
    df = n - 1
    return TestResult("paired_t", float(t), float(df), n, t_two_sided_p(t, df))


def _exact_signed_rank_p(ranks: np.ndarray, w_plus: float) -> float:
    # Midranks are multiples of 1/2, so doubled ranks are integers and the
    # whole computation stays exact.  The DP counts, over all 2^n sign
    # assignments, how many positive-rank sums are at least as far from
    # the null mean as the observed one.
    r2 = np.rint(2.0 * ranks).astype(np.int64)
    total2 = int(r2.sum())
    counts = np.zeros(total2 + 1, dtype=np.int64)
    counts[0] = 1
    for r in r2:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total2 + 1 - r]
        counts = counts + shifted
    w2_obs = int(round(2.0 * w_plus))
    dev_obs = abs(2 * w2_obs - total2)
    devs = np.abs(2 * np.arange(total2 + 1) - total2)
    n_extreme = int(counts[devs >= dev_obs].sum())
    return n_extreme / float(2 ** ranks.size)


def wilcoxon_signed_rank(x, y) -> TestResult:
    """Two-sided Wilcoxon signed-rank test on per-case values."""
    x, y = _paired_arrays(x, y)
    d = x - y
    d = d[d != 0.0]  # classic drop-zeros convention
    n_eff = d.size
    if n_eff == 0:
        raise AllZeroDifferences("every paired difference is zero")
    ranks = rankdata(np.abs(d))  # midranks for ties
    w_plus = float(ranks[d > 0].sum())

    if n_eff <= EXACT_WILCOXON_MAX_N:
        p = _exact_signed_rank_p(ranks, w_plus)
        return TestResult("wilcoxon_exact", w_plus, None, int(n_eff), p)

    mu = n_eff * (n_eff + 1) / 4.0
    _, tie_sizes = np.unique(np.abs(d), return_counts=True)
    var = n_eff * (n_eff + 1) * (2 * n_eff + 1) / 24.0 - float(
        ((tie_sizes**3 - tie_sizes) / 48.0).sum()
    )
    delta = w_plus - mu
    if delta == 0.0:
        z = 0.0
    else:
        z = (delta - 0.5 * np.sign(delta)) / np.sqrt(var)
    return TestResult("wilcoxon_normal", w_plus, None, int(n_eff), normal_two_sided_p(z))


def percent_difference(mean_a: float, mean_b: float) -> tuple[float, str]:
    """Percent change of mean_a relative to the mean_b baseline."""
    if mean_b == 0.0:
        raise ZeroBaseline("baseline mean is zero; percent difference undefined")
    pct = 100.0 * (mean_a - mean_b) / mean_b
    return pct, ("higher" if pct >= 0.0 else "lower")


def _records_by_metric(records: Sequence[MetricRecord], method: str) -> dict:
    table: dict[str, dict[str, float]] = {}
    for rec in records:
        if rec.method != method:
            continue
        per_case = table.setdefault(rec.metric, {})
        if rec.case_id in per_case:
            raise DuplicateRecord(
                f"duplicate record for case {rec.case_id!r}, method {method!r}, "
                f"metric {rec.metric!r}"
            )
        per_case[rec.case_id] = rec.value
    return table


def cohort_compare(
    records: Sequence[MetricRecord], method_a: str, method_b: str
) -> list[ComparisonRow]:
    """One comparison row per metric both methods report, sorted by metric.

    Only records of the two named methods participate, so the reference
    method never compares against itself.  Cases present for just one
    method are dropped and counted per row.  Degenerate tests become
    flags on the row rather than failures.
    """
    table_a = _records_by_metric(records, method_a)
    table_b = _records_by_metric(records, method_b)

    rows = []
    for metric in sorted(set(table_a) & set(table_b)):
        cases_a = table_a[metric]
        cases_b = table_b[metric]
        shared = sorted(set(cases_a) & set(cases_b))
        n_unpaired = len(set(cases_a) ^ set(cases_b))
        if not shared:
            continue
        x = np.array([cases_a[c] for c in shared])
        y = np.array([cases_b[c] for c in shared])
        mean_a = float(x.mean())
        mean_b = float(y.mean())

        try:
            pct, direction = percent_difference(mean_a, mean_b)
        except ZeroBaseline:
            pct, direction = None, None

        t_result = t_flag = None
        w_result = w_flag = None
        if len(shared) < 2:
            t_flag = w_flag = "too_few_cases"
        else:
            try:
                t_result = paired_t(x, y)
            except DegenerateVariance:
                t_flag = "degenerate_variance"
            try:
                w_result = wilcoxon_signed_rank(x, y)
            except AllZeroDifferences:
                w_flag = "all_zero_differences"

        rows.append(
            ComparisonRow(
                metric=metric,
                mean_a=mean_a,
                mean_b=mean_b,
                percent_diff=pct,
                direction=direction,
                n_cases=len(shared),
                n_unpaired=n_unpaired,
                t_result=t_result,
                t_flag=t_flag,
                w_result=w_result,
                w_flag=w_flag,
            )
        )

    if not rows:
        raise NoPairedCases(
            f"methods {method_a!r} and {method_b!r} share no case for any metric"
        )
    return rows


def rater_variability(
    delineations: Sequence[tuple[str, str, Mask]], grouping: str
) -> VariabilityReport:
    """Agreement between repeated delineations.

    ``intra_rater`` pairs delineations by the same rater across different
    sessions; ``inter_rater`` pairs delineations by different raters.
    The volume CV is taken over every delineation that participates in
    at least one qualifying pair.
    """
    if grouping not in ("intra_rater", "inter_rater"):
        raise ValueError(f"unknown grouping {grouping!r}")
    items = list(delineations)
    pairs = []
    for (i, (rater_i, sess_i, _)), (j, (rater_j, sess_j, _)) in combinations(
        enumerate(items), 2
    ):
        if grouping == "intra_rater":
            qualifies = rater_i == rater_j and sess_i != sess_j
        else:
            qualifies = rater_i != rater_j
        if qualifies:
            pairs.append((i, j))
    if not pairs:
        raise TooFewDelineations(f"no qualifying {grouping} pair among {len(items)} delineations")

    dices = []
    for i, j in pairs:
        counts = confusion_counts(items[i][2], items[j][2])
        dices.append(overlap_metrics(counts).dice)
    participating = sorted({i for pair in pairs for i in pair})
    volumes = np.array([volume_mm3(items[i][2]) for i in participating])
    cv = 100.0 * float(volumes.std(ddof=1)) / float(volumes.mean())
    return VariabilityReport(grouping, float(np.mean(dices)), cv, len(pairs))
