"""Domain types and single-pass statistics shared by the rest of the library.

Everything here is a plain value type: no hidden sharing, single writer per
instance, safe to move between threads/processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "ClassLabel",
    "StreamRecord",
    "GaussianStat",
    "ClassHistogram",
    "ValidationError",
    "InsufficientDataError",
    "UndefinedDistanceError",
    "ConfigurationError",
]


class ValidationError(ValueError):
    """Bad input: non-finite value, wrong vector length, negative count, ..."""


class InsufficientDataError(ValueError):
    """Too few observations to evaluate a statistic (e.g. no variance yet)."""


class UndefinedDistanceError(ValueError):
    """A distance was requested between distributions that do not both exist."""


class ConfigurationError(ValueError):
    """An experiment or tree configuration that cannot be satisfied."""


class ClassLabel(IntEnum):
    """Binary class labels: the minority class is POSITIVE (+1)."""

    NEGATIVE = -1
    POSITIVE = 1


@dataclass(frozen=True, slots=True)
class StreamRecord:
    """One stream instance.

    ``truth`` is the ground-truth label (the simulator always knows it);
    ``observed`` is the label the learner is allowed to see, ``None`` when the
    instance arrives unlabeled.  Unlabeled records must never be used for
    training.
    """

    features: np.ndarray
    truth: ClassLabel
    observed: Optional[ClassLabel] = None


class GaussianStat:
    """Running count / mean / variance of one scalar series.

    Uses the numerically stable single-pass (Welford) update: ``mean`` is the
    running arithmetic mean and ``m2`` the running sum of squared deviations
    from it.  Variance is the population variance ``m2 / count``.
    """

    __slots__ = ("count", "mean", "m2")

    def __init__(self, count: int = 0, mean: float = 0.0, m2: float = 0.0):
        if count < 0 or m2 < 0.0:
            raise ValidationError("count and m2 must be non-negative")
        if count == 0 and (mean != 0.0 or m2 != 0.0):
            raise ValidationError("empty stat must have mean = m2 = 0")
        self.count = count
        self.mean = mean
        self.m2 = m2

    def add(self, x: float) -> None:
        """Fold one observation into the running statistics."""
        if not math.isfinite(x):
            raise ValidationError(f"non-finite observation: {x!r}")
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    @property
    def variance(self) -> float:
        if self.count < 1:
            raise InsufficientDataError("variance needs at least one observation")
        return self.m2 / self.count

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def merge(self, other: "GaussianStat") -> "GaussianStat":
        """Combine with a stat built from a disjoint series (Chan's formula)."""
        if self.count == 0:
            return GaussianStat(other.count, other.mean, other.m2)
        if other.count == 0:
            return GaussianStat(self.count, self.mean, self.m2)
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return GaussianStat(n, mean, max(m2, 0.0))

    def copy(self) -> "GaussianStat":
        return GaussianStat(self.count, self.mean, self.m2)

    def __repr__(self) -> str:
        return f"GaussianStat(count={self.count}, mean={self.mean}, m2={self.m2})"


class ClassHistogram:
    """Fixed-edge histogram with one count vector per class.

    Edges never move after construction (this is what keeps per-leaf memory
    constant).  Bin membership is the half-open interval
    ``[edges[j], edges[j+1])``; values outside the edge range are clamped into
    the first/last bin so no observation is ever dropped.
    """

    __slots__ = ("edges", "counts_pos", "counts_neg")

    def __init__(self, edges: Sequence[float]):
        edges = np.asarray(edges, dtype=np.float64)
        if edges.ndim != 1 or edges.size < 3:
            raise ValidationError("need at least 3 edges (2 bins)")
        if not np.all(np.isfinite(edges)):
            raise ValidationError("edges must be finite")
        if not np.all(np.diff(edges) > 0):
            raise ValidationError("edges must be strictly increasing")
        self.edges = edges
        b = edges.size - 1
        self.counts_pos = np.zeros(b, dtype=np.int64)
        self.counts_neg = np.zeros(b, dtype=np.int64)

    @property
    def n_bins(self) -> int:
        return self.edges.size - 1

    @classmethod
    def equal_width(cls, low: float, high: float, bins: int) -> "ClassHistogram":
        """Equal-width edges over [low, high]; degenerate ranges get padded."""
        if not (math.isfinite(low) and math.isfinite(high)):
            raise ValidationError("range bounds must be finite")
        if high <= low:
            low, high = low - 0.5, low + 0.5
        return cls(np.linspace(low, high, bins + 1))

    def bin_index(self, x: float) -> int:
        if not math.isfinite(x):
            raise ValidationError(f"non-finite value: {x!r}")
        j = int(np.searchsorted(self.edges, x, side="right")) - 1
        return min(max(j, 0), self.n_bins - 1)

    def add(self, x: float, label: ClassLabel) -> None:
        j = self.bin_index(x)
        if label is ClassLabel.POSITIVE or label == ClassLabel.POSITIVE:
            self.counts_pos[j] += 1
        else:
            self.counts_neg[j] += 1

    @property
    def total_pos(self) -> int:
        return int(self.counts_pos.sum())

    @property
    def total_neg(self) -> int:
        return int(self.counts_neg.sum())

    def copy(self) -> "ClassHistogram":
        h = ClassHistogram(self.edges.copy())
        h.counts_pos = self.counts_pos.copy()
        h.counts_neg = self.counts_neg.copy()
        return h

    def __repr__(self) -> str:
        return (
            f"ClassHistogram(bins={self.n_bins}, "
            f"pos={self.total_pos}, neg={self.total_neg})"
        )
