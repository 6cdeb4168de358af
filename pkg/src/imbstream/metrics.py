"""Imbalance-aware classification metrics and significance testing.

The G-Mean (geometric mean of true-positive and true-negative rate) is the
headline metric: it collapses to zero when either class is entirely
misclassified, so a majority-class-only predictor cannot look good on a
heavily imbalanced stream.  Significance testing is one-way ANOVA followed by
Tukey's HSD (Tukey-Kramer for unequal group sizes); the studentized-range
quantile is computed here by numerical integration rather than looked up from
an external statistics service.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy import integrate, optimize, special

from .core import InsufficientDataError, ValidationError

__all__ = [
    "MetricSet",
    "PairComparison",
    "SignificanceReport",
    "metrics_from_confusion",
    "anova_oneway",
    "tukey_hsd",
    "studentized_range_cdf",
    "studentized_range_ppf",
]


@dataclass(frozen=True, slots=True)
class MetricSet:
    recall: float
    fpr: float
    gmean: float
    fscore: float
    precision: float


def metrics_from_confusion(tp: int, fp: int, tn: int, fn: int) -> MetricSet:
    """All five metrics from raw confusion counts.

    Zero-denominator conventions: recall/fpr/precision with an empty
    denominator are 0; F-score with precision + recall = 0 is 0.
    """
    if min(tp, fp, tn, fn) < 0:
        raise ValidationError("confusion counts must be non-negative")
    recall = tp / (tp + fn) if tp + fn else 0.0
    fpr = fp / (fp + tn) if fp + tn else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    gmean = math.sqrt(recall * (1.0 - fpr))
    fscore = (2.0 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
    return MetricSet(recall=recall, fpr=fpr, gmean=gmean,
                     fscore=fscore, precision=precision)


def _check_groups(groups: Sequence[Sequence[float]]) -> list[np.ndarray]:
    if len(groups) < 2:
        raise InsufficientDataError("need at least 2 groups")
    arrays = [np.asarray(g, dtype=np.float64) for g in groups]
    for i, a in enumerate(arrays):
        if a.size < 2:
            raise InsufficientDataError(f"group {i} has fewer than 2 samples")
    return arrays


def anova_oneway(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """One-way (single factor) ANOVA: returns (F, p).

    Degenerate conventions: zero within-group variance yields F = 0, p = 1
    when the group means also coincide (no effect, no noise), and F = inf,
    p = 0 when they differ.
    """
    arrays = _check_groups(groups)
    n_total = sum(a.size for a in arrays)
    k = len(arrays)
    grand = sum(a.sum() for a in arrays) / n_total
    ss_between = sum(a.size * (a.mean() - grand) ** 2 for a in arrays)
    ss_within = sum(((a - a.mean()) ** 2).sum() for a in arrays)
    df_between = k - 1
    df_within = n_total - k
    if ss_within == 0.0:
        if ss_between == 0.0:
            return 0.0, 1.0
        return math.inf, 0.0
    f_stat = (ss_between / df_between) / (ss_within / df_within)
    p = float(special.fdtrc(df_between, df_within, f_stat))
    return float(f_stat), p


# -- studentized range distribution ------------------------------------------
#
# CDF of the studentized range q for k groups with nu error degrees of
# freedom:
#
#   P(Q <= x) = Int_0^inf f_nu(s) * P_k(x * s) ds
#
# where P_k(w) = k * Int phi(z) [Phi(z) - Phi(z - w)]^(k-1) dz is the CDF of
# the range of k standard normals, and f_nu is the density of
# s = chi_nu / sqrt(nu).

_Z_LIMIT = 10.0
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(256)
_Z = _GL_NODES * _Z_LIMIT
_W = _GL_WEIGHTS * _Z_LIMIT
_PHI_Z = np.exp(-0.5 * _Z * _Z) / math.sqrt(2.0 * math.pi)
_BIG_PHI_Z = special.ndtr(_Z)


def _normal_range_cdf(w: float, k: int) -> float:
    if w <= 0.0:
        return 0.0
    inner = _PHI_Z * (_BIG_PHI_Z - special.ndtr(_Z - w)) ** (k - 1)
    return min(k * float(np.dot(_W, inner)), 1.0)


def studentized_range_cdf(x: float, k: int, df: float) -> float:
    """P(Q <= x) for the studentized range with k groups and df error dof."""
    if k < 2:
        raise ValidationError("k must be >= 2")
    if x <= 0.0:
        return 0.0
    if math.isinf(df):
        return _normal_range_cdf(x, k)
    # density of s = chi_df / sqrt(df)
    log_norm = ((df / 2.0) * math.log(df) - special.gammaln(df / 2.0)
                - (df / 2.0 - 1.0) * math.log(2.0))

    def outer(s):
        if s <= 0.0:
            return 0.0
        log_f = log_norm + (df - 1.0) * math.log(s) - df * s * s / 2.0
        return math.exp(log_f) * _normal_range_cdf(x * s, k)

    hi = 1.0 + 12.0 / math.sqrt(df)
    val, _ = integrate.quad(outer, 0.0, hi, limit=200)
    return min(val, 1.0)


def studentized_range_ppf(p: float, k: int, df: float) -> float:
    """Inverse CDF via bisection (brentq) on the numerically integrated CDF."""
    if not (0.0 < p < 1.0):
        raise ValidationError("p must be in (0, 1)")
    lo, hi = 1e-3, 10.0
    while studentized_range_cdf(hi, k, df) < p:
        hi *= 2.0
        if hi > 1e4:
            raise RuntimeError("studentized range inversion failed to bracket")
    return float(optimize.brentq(
        lambda x: studentized_range_cdf(x, k, df) - p, lo, hi, xtol=1e-8))


@dataclass(frozen=True, slots=True)
class PairComparison:
    pair: tuple[str, str]
    mean_difference: float
    significant: bool


@dataclass(frozen=True, slots=True)
class SignificanceReport:
    groups: tuple[str, ...]
    f_statistic: float
    p_value: float
    alpha: float
    q_critical: float
    pairwise: tuple[PairComparison, ...]


def tukey_hsd(groups: Sequence[Sequence[float]], alpha: float,
              labels: Sequence[str] | None = None) -> SignificanceReport:
    """Tukey's HSD over all unordered group pairs at significance ``alpha``.

    A pair (i, j) is significant when |mean_i - mean_j| exceeds
    q(alpha, k, N-k) * sqrt(MSE/2 * (1/n_i + 1/n_j)) -- the Tukey-Kramer
    form, exact for equal group sizes and conservative otherwise.
    """
    arrays = _check_groups(groups)
    if not (0.0 < alpha < 1.0):
        raise ValidationError("alpha must be in (0, 1)")
    k = len(arrays)
    if labels is None:
        labels = [f"group{i}" for i in range(k)]
    elif len(labels) != k:
        raise ValidationError("labels must match the number of groups")
    f_stat, p_value = anova_oneway(arrays)
    n_total = sum(a.size for a in arrays)
    df_within = n_total - k
    mse = sum(((a - a.mean()) ** 2).sum() for a in arrays) / df_within
    q_crit = studentized_range_ppf(1.0 - alpha, k, df_within)
    pairwise = []
    for i, j in combinations(range(k), 2):
        diff = float(arrays[i].mean() - arrays[j].mean())
        hsd = q_crit * math.sqrt(mse / 2.0 * (1.0 / arrays[i].size
                                              + 1.0 / arrays[j].size))
        pairwise.append(PairComparison(
            pair=(str(labels[i]), str(labels[j])),
            mean_difference=diff,
            significant=abs(diff) > hsd))
    return SignificanceReport(
        groups=tuple(str(l) for l in labels),
        f_statistic=f_stat, p_value=p_value, alpha=alpha,
        q_critical=q_crit, pairwise=tuple(pairwise))
