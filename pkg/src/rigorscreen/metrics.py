"""Evaluation statistics: confusion counting, presumption-rate adjustment,
chance-corrected agreement, accuracy comparison, and limits of agreement.

Scores with a zero denominator are reported as 0.0 together with a flag
rather than raising, so batch evaluation over many criteria never aborts.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class EmptyEvaluationError(ValueError):
    """No paper has both a gold label and a tool verdict."""


class DegenerateComparisonError(ValueError):
    """Proportion comparison with zero standard error but unequal rates."""


class InsufficientDataError(ValueError):
    """Too few pairs to estimate limits of agreement."""


YES = "yes"
NO = "no"
COMPLICATED = "complicated"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion_counts(
    gold: Mapping[str, bool],
    verdicts: Mapping[str, bool | None],
) -> tuple[ConfusionCounts, list[str]]:
    """2x2 counts over papers with both a gold label and a boolean verdict.

    Papers missing from either side, or carrying a None verdict (absent
    cell), are excluded and returned for reporting.
    """
    tp = fp = fn = tn = 0
    excluded = []
    for pmcid in sorted(set(gold) | set(verdicts)):
        truth = gold.get(pmcid)
        verdict = verdicts.get(pmcid)
        if truth is None or verdict is None:
            excluded.append(pmcid)
            continue
        if verdict and truth:
            tp += 1
        elif verdict and not truth:
            fp += 1
        elif not verdict and truth:
            fn += 1
        else:
            tn += 1
    counts = ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)
    if counts.total == 0:
        raise EmptyEvaluationError("no paper has both a gold label and a verdict")
    return counts, excluded


@dataclass(frozen=True)
class RateEstimates:
    """Fractions of all-tools-agree control papers confirmed by curation."""

    ppr: float
    pnr: float
    n_pos_checked: int
    n_neg_checked: int
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if not (0.0 <= self.ppr <= 1.0 and 0.0 <= self.pnr <= 1.0):
            raise ValueError("rates must lie in [0, 1]")


def estimate_rates(
    positive_decisions: Iterable[str],
    negative_decisions: Iterable[str],
) -> RateEstimates:
    """Estimate confirmation rates from curated control decisions.

    The positive stratum confirms with "yes", the negative stratum with
    "no". Decisions still "complicated" are dropped from the denominator.
    An empty stratum yields rate 1.0 with a flag.
    """
    flags = []

    def rate(decisions: Iterable[str], confirm: str, flag: str) -> tuple[float, int]:
        resolved = [d for d in decisions if d in (YES, NO)]
        if not resolved:
            flags.append(flag)
            return 1.0, 0
        return sum(1 for d in resolved if d == confirm) / len(resolved), len(resolved)

    ppr, n_pos = rate(positive_decisions, YES, "ppr_unchecked")
    pnr, n_neg = rate(negative_decisions, NO, "pnr_unchecked")
    return RateEstimates(
        ppr=ppr, pnr=pnr, n_pos_checked=n_pos, n_neg_checked=n_neg,
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class AdjustedEvaluation:
    raw: ConfusionCounts
    rates: RateEstimates
    adj_tp: float
    adj_fp: float
    adj_fn: float
    adj_tn: float
    accuracy: float
    precision: float
    recall: float
    f1: float
    flags: tuple[str, ...] = ()


def adjusted_scores(raw: ConfusionCounts, rates: RateEstimates) -> AdjustedEvaluation:
    """Deflate confusion counts by the presumption rates, then score.

    True positives and false negatives scale by the presumed positive
    rate; false positives and true negatives by the presumed negative
    rate. Each adjusted count is therefore never larger than its raw
    count.
    """
    adj_tp = raw.tp * rates.ppr
    adj_fp = raw.fp * rates.pnr
    adj_fn = raw.fn * rates.ppr
    adj_tn = raw.tn * rates.pnr

    flags = []

    def ratio(num: float, den: float, flag: str) -> float:
        if den == 0.0:
            flags.append(flag)
            return 0.0
        return num / den

    total = adj_tp + adj_tn + adj_fp + adj_fn
    accuracy = ratio(adj_tp + adj_tn, total, "accuracy_undefined")
    precision = ratio(adj_tp, adj_tp + adj_fp, "precision_undefined")
    recall = ratio(adj_tp, adj_tp + adj_fn, "recall_undefined")
    # harmonic mean of precision and recall
    f1 = ratio(2.0 * precision * recall, precision + recall, "f1_undefined")

    return AdjustedEvaluation(
        raw=raw, rates=rates,
        adj_tp=adj_tp, adj_fp=adj_fp, adj_fn=adj_fn, adj_tn=adj_tn,
        accuracy=accuracy, precision=precision, recall=recall, f1=f1,
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class AgreementResult:
    pa: float
    pe: float
    ac1: float


def gwet_ac1(r1: Sequence[bool], r2: Sequence[bool]) -> AgreementResult:
    """Chance-corrected agreement between two binary raters.

    Observed agreement is corrected by the chance-agreement term
    2*pi*(1-pi), where pi is the mean prevalence across both raters.
    Computed on raw labels; presumption rates are never applied here.
    """
    if len(r1) != len(r2):
        raise ValueError(f"rater lengths differ: {len(r1)} vs {len(r2)}")
    n = len(r1)
    if n == 0:
        raise ValueError("need at least one rated item")
    pa = sum(1 for a, b in zip(r1, r2) if bool(a) == bool(b)) / n
    pi = (sum(map(bool, r1)) + sum(map(bool, r2))) / (2 * n)
    pe = 2.0 * pi * (1.0 - pi)
    # pe <= 0.5 for binary raters, so the denominator is always positive
    ac1 = (pa - pe) / (1.0 - pe)
    return AgreementResult(pa=pa, pe=pe, ac1=ac1)


def compare_accuracies(
    p1: float, n1: int, p2: float, n2: int
) -> tuple[float, float]:
    """Two-tailed comparison of two proportions.

    The statistic is the difference divided by the standard error built
    from the sample-proportion variances; the p-value comes from the
    normal reference distribution.
    """
    for p in (p1, p2):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"proportion {p} outside [0, 1]")
    for n in (n1, n2):
        if n < 1:
            raise ValueError("sample sizes must be >= 1")
    if p1 == p2:
        return 0.0, 1.0
    se2 = p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2
    if se2 == 0.0:
        raise DegenerateComparisonError(
            "zero standard error with unequal proportions"
        )
    statistic = (p1 - p2) / math.sqrt(se2)
    p_value = math.erfc(abs(statistic) / math.sqrt(2.0))
    return statistic, p_value


@dataclass(frozen=True)
class BlandAltman:
    mean_diff: float
    sd_diff: float
    loa_low: float
    loa_high: float
    points: tuple[tuple[float, float], ...] = field(repr=False, default=())


def bland_altman(pairs: Sequence[tuple[float, float]]) -> BlandAltman:
    """Limits of agreement for paired counts: mean difference +/- 1.96 sd.

    Uses the sample (n-1) standard deviation. Also returns the per-pair
    (mean, difference) points for plotting.
    """
    if len(pairs) < 2:
        raise InsufficientDataError("need at least two pairs")
    diffs = [a - b for a, b in pairs]
    mean_diff = statistics.fmean(diffs)
    sd_diff = statistics.stdev(diffs)
    half_width = 1.96 * sd_diff
    points = tuple(((a + b) / 2.0, a - b) for a, b in pairs)
    return BlandAltman(
        mean_diff=mean_diff,
        sd_diff=sd_diff,
        loa_low=mean_diff - half_width,
        loa_high=mean_diff + half_width,
        points=points,
    )


def bland_altman_csv(result: BlandAltman) -> str:
    """Plot-ready CSV: one (mean, diff) row per pair plus a limits row."""
    lines = ["mean,diff"]
    for mean, diff in result.points:
        lines.append(f"{mean!r},{diff!r}")
    lines.append(
        f"limits,{result.mean_diff!r},{result.loa_low!r},{result.loa_high!r}"
    )
    return "\n".join(lines) + "\n"
