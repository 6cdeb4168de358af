"""Split-scoring functions and the Hoeffding bound.

Three criteria are provided, all pure functions over leaf statistics:

* ``hellinger_binned`` -- Hellinger distance between the per-class normalized
  bin frequencies of a :class:`~imbstream.core.ClassHistogram`.  Range
  [0, sqrt(2)]; skew insensitive because only normalized frequencies enter.
* ``hellinger_gaussian`` -- closed-form Hellinger distance between two
  Gaussians fitted from running mean/variance.  Range [0, 1].
* ``info_gain`` -- binary-entropy information gain of a two-way cut of a
  histogram.  Range [0, 1].  This is the classic accuracy-driven baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    ClassHistogram,
    GaussianStat,
    InsufficientDataError,
    UndefinedDistanceError,
    ValidationError,
)

__all__ = [
    "Criterion",
    "SplitScore",
    "HoeffdingParams",
    "hellinger_binned",
    "hellinger_gaussian",
    "info_gain",
    "hoeffding_epsilon",
    "best_two_features",
]

SQRT2 = math.sqrt(2.0)

# Floor applied when exactly one class has zero variance, so the closed form
# stays evaluable without changing the limit behaviour.
MIN_SIGMA = 1e-9


class Criterion(Enum):
    INFO_GAIN = "info-gain"
    HELLINGER_BINNED = "hellinger-binned"
    HELLINGER_GAUSSIAN = "hellinger-gaussian"

    @property
    def range_r(self) -> float:
        """True range R of the criterion, as required by the Hoeffding bound."""
        return SQRT2 if self is Criterion.HELLINGER_BINNED else 1.0


@dataclass(frozen=True, slots=True)
class SplitScore:
    """A scored candidate split: which feature, where to cut, how good."""

    feature_index: int
    threshold: float
    score: float


@dataclass(frozen=True, slots=True)
class HoeffdingParams:
    delta: float
    tau: float
    range_r: float

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise ValidationError("delta must be in (0, 1)")
        if self.tau < 0.0:
            raise ValidationError("tau must be >= 0")
        if self.range_r <= 0.0:
            raise ValidationError("range_r must be > 0")


def hellinger_binned(h: ClassHistogram) -> float:
    """Hellinger distance between the two normalized class frequency vectors.

    Raises :class:`UndefinedDistanceError` when either class has no
    observations (a one-class leaf has no distance to measure).
    """
    tot_pos = h.total_pos
    tot_neg = h.total_neg
    if tot_pos < 1 or tot_neg < 1:
        raise UndefinedDistanceError("both classes need at least one observation")
    d = np.sqrt(h.counts_pos / tot_pos) - np.sqrt(h.counts_neg / tot_neg)
    return min(math.sqrt(float(np.dot(d, d))), SQRT2)


def hellinger_gaussian(pos: GaussianStat, neg: GaussianStat) -> float:
    """Closed-form Hellinger distance between two fitted Gaussians.

    Degenerate-variance handling: if both sigmas are zero the distributions
    are point masses, so the distance is 0 when the means agree and 1
    otherwise; if exactly one sigma is zero it is floored at ``MIN_SIGMA``.
    """
    if pos.count < 2 or neg.count < 2:
        raise InsufficientDataError("need count >= 2 on both classes")
    s1 = pos.std
    s2 = neg.std
    if s1 == 0.0 and s2 == 0.0:
        return 0.0 if pos.mean == neg.mean else 1.0
    s1 = max(s1, MIN_SIGMA)
    s2 = max(s2, MIN_SIGMA)
    v = s1 * s1 + s2 * s2
    bc = math.sqrt(2.0 * s1 * s2 / v) * math.exp(-0.25 * (pos.mean - neg.mean) ** 2 / v)
    return math.sqrt(max(1.0 - bc, 0.0))


def _binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def info_gain(h: ClassHistogram, threshold_bin: int) -> float:
    """Information gain of the binary cut at edge ``threshold_bin``.

    Bins ``[0, threshold_bin)`` go left, the rest right.  An empty child
    contributes zero weighted entropy.
    """
    if not (0 < threshold_bin < h.n_bins):
        raise ValidationError("threshold_bin must be an interior edge index")
    tot_pos = h.total_pos
    tot_neg = h.total_neg
    n = tot_pos + tot_neg
    if n < 1:
        raise ValidationError("parent must contain at least one instance")
    lp = int(h.counts_pos[:threshold_bin].sum())
    ln = int(h.counts_neg[:threshold_bin].sum())
    rp, rn = tot_pos - lp, tot_neg - ln
    parent = _binary_entropy(tot_pos / n)
    gain = parent
    for cp, cn in ((lp, ln), (rp, rn)):
        m = cp + cn
        if m > 0:
            gain -= (m / n) * _binary_entropy(cp / m)
    return max(gain, 0.0)


def hoeffding_epsilon(params: HoeffdingParams, n: int) -> float:
    """Hoeffding bound: epsilon = sqrt(R^2 ln(1/delta) / (2n))."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    return math.sqrt(params.range_r**2 * math.log(1.0 / params.delta) / (2.0 * n))


def _two_bin_hellinger(cum_pos: np.ndarray, cum_neg: np.ndarray,
                       tot_pos: int, tot_neg: int) -> np.ndarray:
    """Hellinger distance of the 2-bin collapse at every interior edge."""
    lp = cum_pos / tot_pos
    ln = cum_neg / tot_neg
    d = (np.sqrt(lp) - np.sqrt(ln)) ** 2 + (np.sqrt(1.0 - lp) - np.sqrt(1.0 - ln)) ** 2
    return np.sqrt(d)


def _cut_scores(h: ClassHistogram, criterion: Criterion) -> tuple[float, float] | None:
    """Best (score, threshold) over all interior-edge cuts of ``h``."""
    tot_pos = h.total_pos
    tot_neg = h.total_neg
    if criterion is Criterion.HELLINGER_BINNED:
        if tot_pos < 1 or tot_neg < 1:
            return None
        cum_pos = np.cumsum(h.counts_pos[:-1])
        cum_neg = np.cumsum(h.counts_neg[:-1])
        scores = _two_bin_hellinger(cum_pos, cum_neg, tot_pos, tot_neg)
    else:
        n = tot_pos + tot_neg
        if n < 1:
            return None
        cum_pos = np.cumsum(h.counts_pos[:-1])
        cum_neg = np.cumsum(h.counts_neg[:-1])
        left = cum_pos + cum_neg
        right = n - left
        parent = _binary_entropy(tot_pos / n)
        with np.errstate(divide="ignore", invalid="ignore"):
            pl = np.where(left > 0, cum_pos / np.maximum(left, 1), 0.0)
            pr = np.where(right > 0, (tot_pos - cum_pos) / np.maximum(right, 1), 0.0)
        hl = np.array([_binary_entropy(p) for p in pl])
        hr = np.array([_binary_entropy(p) for p in pr])
        scores = parent - (left / n) * hl - (right / n) * hr
        scores = np.maximum(scores, 0.0)
    best = int(np.argmax(scores))  # first occurrence: lowest threshold wins ties
    return float(scores[best]), float(h.edges[best + 1])


def best_two_features(leaf_stats, criterion: Criterion) -> tuple[SplitScore, SplitScore]:
    """Highest- and second-highest-scoring features at a leaf.

    ``leaf_stats`` must expose ``n_features``, ``gaussian(f, label)`` and
    ``histogram(f)`` (see :class:`imbstream.tree.LeafStats`).  Unscoreable
    features (insufficient data) are skipped; when fewer than two features are
    scoreable the missing slots carry score 0 so the Hoeffding test compares
    against zero.  Ties break to the lowest feature index and then lowest
    threshold, for determinism.
    """
    from .core import ClassLabel  # local to avoid polluting the module API

    empty = SplitScore(-1, 0.0, 0.0)
    best, second = empty, empty
    for f in range(leaf_stats.n_features):
        if criterion is Criterion.HELLINGER_GAUSSIAN:
            pos = leaf_stats.gaussian(f, ClassLabel.POSITIVE)
            neg = leaf_stats.gaussian(f, ClassLabel.NEGATIVE)
            try:
                score = hellinger_gaussian(pos, neg)
            except InsufficientDataError:
                continue
            candidate = SplitScore(f, (pos.mean + neg.mean) / 2.0, score)
        else:
            h = leaf_stats.histogram(f)
            if h is None:
                continue
            cut = _cut_scores(h, criterion)
            if cut is None:
                continue
            candidate = SplitScore(f, cut[1], cut[0])
        if candidate.score > best.score or best.feature_index < 0:
            best, second = candidate, best
        elif candidate.score > second.score or second.feature_index < 0:
            second = candidate
    return best, second
