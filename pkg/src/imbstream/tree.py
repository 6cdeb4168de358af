"""Incremental Hoeffding decision tree, parameterized by split criterion.

One tree instance is a single-writer structure: ``train_one`` needs exclusive
access, ``predict`` is safe concurrently with other predicts.  Memory per leaf
is constant in stream length: 2 Gaussian cells per feature, plus ``bins``
counts per class per feature when the criterion needs histograms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    ClassHistogram,
    ClassLabel,
    ConfigurationError,
    GaussianStat,
    StreamRecord,
    ValidationError,
)
from .criteria import Criterion, HoeffdingParams, best_two_features, hoeffding_epsilon

__all__ = ["TreeConfig", "LeafStats", "HoeffdingTree", "SplitInfo"]

SERIAL_FORMAT = "imbstream-tree"
SERIAL_VERSION = 1


@dataclass(frozen=True, slots=True)
class TreeConfig:
    criterion: Criterion
    delta: float = 1e-7
    tau: float = 0.05
    bins: int = 10
    grace_period: int = 200
    max_leaves: int = 0  # 0 = unlimited

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise ValidationError("delta must be in (0, 1)")
        if self.tau < 0.0:
            raise ValidationError("tau must be >= 0")
        if self.bins < 2:
            raise ValidationError("bins must be >= 2")
        if self.grace_period < 1:
            raise ValidationError("grace_period must be >= 1")
        if self.max_leaves < 0:
            raise ValidationError("max_leaves must be >= 0")

    @property
    def needs_histograms(self) -> bool:
        return self.criterion is not Criterion.HELLINGER_GAUSSIAN


@dataclass(frozen=True, slots=True)
class SplitInfo:
    """Emitted by ``train_one`` when a leaf turned into a split node."""

    leaf_id: int
    feature: int
    threshold: float


class LeafStats:
    """Sufficient statistics held by one leaf.

    Per feature: one GaussianStat per class (always), one ClassHistogram
    (only for criteria that cut on bin edges), and the observed min/max used
    to place the children's histogram edges.
    """

    __slots__ = (
        "n_features",
        "_gauss",
        "_hists",
        "class_counts",
        "n_since_attempt",
        "mins",
        "maxs",
    )

    def __init__(self, n_features: int, ranges: Optional[np.ndarray], bins: int,
                 with_histograms: bool):
        self.n_features = n_features
        # index 2*f for NEGATIVE, 2*f + 1 for POSITIVE
        self._gauss = [GaussianStat() for _ in range(2 * n_features)]
        if with_histograms:
            if ranges is None:
                ranges = np.tile(np.array([0.0, 1.0]), (n_features, 1))
            self._hists = [
                ClassHistogram.equal_width(ranges[f, 0], ranges[f, 1], bins)
                for f in range(n_features)
            ]
        else:
            self._hists = None
        self.class_counts = [0, 0]  # [negative, positive]
        self.n_since_attempt = 0
        self.mins = np.full(n_features, math.inf)
        self.maxs = np.full(n_features, -math.inf)

    def update(self, features: np.ndarray, label: ClassLabel) -> None:
        pos = label == ClassLabel.POSITIVE
        base = 1 if pos else 0
        gauss = self._gauss
        hists = self._hists
        mins, maxs = self.mins, self.maxs
        for f in range(self.n_features):
            x = float(features[f])
            gauss[2 * f + base].add(x)
            if hists is not None:
                hists[f].add(x, label)
            if x < mins[f]:
                mins[f] = x
            if x > maxs[f]:
                maxs[f] = x
        self.class_counts[1 if pos else 0] += 1
        self.n_since_attempt += 1

    def gaussian(self, f: int, label: ClassLabel) -> GaussianStat:
        return self._gauss[2 * f + (1 if label == ClassLabel.POSITIVE else 0)]

    def histogram(self, f: int) -> Optional[ClassHistogram]:
        return None if self._hists is None else self._hists[f]

    @property
    def total(self) -> int:
        return self.class_counts[0] + self.class_counts[1]

    @property
    def is_pure(self) -> bool:
        return self.class_counts[0] == 0 or self.class_counts[1] == 0

    def majority(self, default: ClassLabel) -> ClassLabel:
        neg, pos = self.class_counts
        if pos > neg:
            return ClassLabel.POSITIVE
        if neg > pos:
            return ClassLabel.NEGATIVE
        return default

    def observed_ranges(self) -> np.ndarray:
        """Per-feature [min, max] seen here; unseen features fall back to [0, 1]."""
        ranges = np.empty((self.n_features, 2))
        for f in range(self.n_features):
            lo, hi = self.mins[f], self.maxs[f]
            if not (math.isfinite(lo) and math.isfinite(hi)):
                lo, hi = 0.0, 1.0
            ranges[f] = (lo, hi)
        return ranges

    def cell_count(self) -> int:
        """Number of statistic cells held (Gaussian cells + histogram bins)."""
        cells = 2 * self.n_features
        if self._hists is not None:
            cells += 2 * self.n_features * self._hists[0].n_bins
        return cells


class _Node:
    __slots__ = ("feature", "threshold", "left", "right", "stats", "prior", "leaf_id")

    def __init__(self, stats: Optional[LeafStats], prior: ClassLabel, leaf_id: int):
        self.feature = -1
        self.threshold = 0.0
        self.left: Optional[_Node] = None
        self.right: Optional[_Node] = None
        self.stats = stats
        self.prior = prior  # prediction fallback while the leaf is empty
        self.leaf_id = leaf_id

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class HoeffdingTree:
    """Very fast decision tree with pluggable split criterion.

    ``feature_ranges`` (shape ``(n_features, 2)``) places the root leaf's
    histogram bin edges; typically computed from a pre-training pass.  Child
    leaves place their edges from the min/max their parent observed.
    """

    def __init__(self, config: TreeConfig, n_features: int,
                 feature_ranges: Optional[np.ndarray] = None):
        if n_features < 1:
            raise ValidationError("n_features must be >= 1")
        self.config = config
        self.n_features = n_features
        if feature_ranges is not None:
            feature_ranges = np.asarray(feature_ranges, dtype=np.float64)
            if feature_ranges.shape != (n_features, 2):
                raise ValidationError("feature_ranges must have shape (n_features, 2)")
        self.feature_ranges = feature_ranges
        self._params = HoeffdingParams(config.delta, config.tau,
                                       config.criterion.range_r)
        self._next_leaf_id = 0
        self.root = self._new_leaf(feature_ranges, ClassLabel.NEGATIVE)
        self.n_splits = 0

    def _new_leaf(self, ranges: Optional[np.ndarray], prior: ClassLabel) -> _Node:
        stats = LeafStats(self.n_features, ranges, self.config.bins,
                          self.config.needs_histograms)
        node = _Node(stats, prior, self._next_leaf_id)
        self._next_leaf_id += 1
        return node

    def _sort(self, features: np.ndarray) -> _Node:
        node = self.root
        while not node.is_leaf:
            node = node.left if features[node.feature] < node.threshold else node.right
        return node

    def predict(self, features) -> ClassLabel:
        features = np.asarray(features, dtype=np.float64)
        if features.shape != (self.n_features,):
            raise ValidationError(
                f"expected {self.n_features} features, got shape {features.shape}")
        leaf = self._sort(features)
        if leaf.stats is None or leaf.stats.total == 0:
            return leaf.prior
        return leaf.stats.majority(leaf.prior)

    def train_one(self, record: StreamRecord) -> Optional[SplitInfo]:
        """Fold one labeled record into the tree; returns split info if a
        leaf was replaced by an internal node, else None."""
        if record.observed is None:
            raise ValidationError("train_one requires a labeled record")
        features = np.asarray(record.features, dtype=np.float64)
        if features.shape != (self.n_features,):
            raise ValidationError(
                f"expected {self.n_features} features, got shape {features.shape}")
        leaf = self._sort(features)
        stats = leaf.stats
        if stats is None:  # deactivated leaf (max_leaves cap)
            return None
        stats.update(features, record.observed)

        if stats.is_pure or stats.n_since_attempt < self.config.grace_period:
            return None
        stats.n_since_attempt = 0
        if self.config.max_leaves and self.leaf_count() >= self.config.max_leaves:
            return None
        best, second = best_two_features(stats, self.config.criterion)
        if best.feature_index < 0:
            return None
        eps = hoeffding_epsilon(self._params, stats.total)
        if best.score - second.score > eps or eps < self.config.tau:
            return self._split(leaf, best.feature_index, best.threshold)
        return None

    def _split(self, leaf: _Node, feature: int, threshold: float) -> SplitInfo:
        child_ranges = leaf.stats.observed_ranges()
        prior = leaf.stats.majority(leaf.prior)
        info = SplitInfo(leaf.leaf_id, feature, threshold)
        leaf.feature = feature
        leaf.threshold = threshold
        leaf.left = self._new_leaf(child_ranges, prior)
        leaf.right = self._new_leaf(child_ranges, prior)
        leaf.stats = None
        leaf.prior = prior
        self.n_splits += 1
        return info

    # -- structural accessors -------------------------------------------------

    def _leaves(self) -> list[_Node]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out

    def leaf_count(self) -> int:
        return len(self._leaves())

    def depth(self) -> int:
        best, stack = 0, [(self.root, 0)]
        while stack:
            node, d = stack.pop()
            if node.is_leaf:
                best = max(best, d)
            else:
                stack.append((node.right, d + 1))
                stack.append((node.left, d + 1))
        return best

    def memory_cells(self) -> int:
        """Total statistic cells across all live leaves."""
        return sum(l.stats.cell_count() for l in self._leaves() if l.stats is not None)

    # -- serialization --------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(self._to_dict(), sort_keys=True)

    def _to_dict(self) -> dict:
        return {
            "format": SERIAL_FORMAT,
            "version": SERIAL_VERSION,
            "config": {
                "criterion": self.config.criterion.value,
                "delta": self.config.delta,
                "tau": self.config.tau,
                "bins": self.config.bins,
                "grace_period": self.config.grace_period,
                "max_leaves": self.config.max_leaves,
            },
            "n_features": self.n_features,
            "feature_ranges": None if self.feature_ranges is None
            else self.feature_ranges.tolist(),
            "next_leaf_id": self._next_leaf_id,
            "n_splits": self.n_splits,
            "root": _node_to_dict(self.root),
        }

    @classmethod
    def from_json(cls, text: str) -> "HoeffdingTree":
        doc = json.loads(text)
        if doc.get("format") != SERIAL_FORMAT:
            raise ValidationError("not an imbstream tree document")
        if doc.get("version") != SERIAL_VERSION:
            raise ValidationError(f"unsupported version: {doc.get('version')!r}")
        cfg = doc["config"]
        config = TreeConfig(
            criterion=Criterion(cfg["criterion"]),
            delta=cfg["delta"],
            tau=cfg["tau"],
            bins=cfg["bins"],
            grace_period=cfg["grace_period"],
            max_leaves=cfg["max_leaves"],
        )
        ranges = doc["feature_ranges"]
        tree = cls(config, doc["n_features"],
                   None if ranges is None else np.asarray(ranges))
        tree.root = _node_from_dict(doc["root"], doc["n_features"])
        tree._next_leaf_id = doc["next_leaf_id"]
        tree.n_splits = doc["n_splits"]
        return tree


def _node_to_dict(node: _Node) -> dict:
    if not node.is_leaf:
        return {
            "kind": "split",
            "feature": node.feature,
            "threshold": node.threshold,
            "prior": int(node.prior),
            "leaf_id": node.leaf_id,
            "left": _node_to_dict(node.left),
            "right": _node_to_dict(node.right),
        }
    d = {
        "kind": "leaf",
        "prior": int(node.prior),
        "leaf_id": node.leaf_id,
        "stats": None,
    }
    s = node.stats
    if s is not None:
        d["stats"] = {
            "class_counts": list(s.class_counts),
            "n_since_attempt": s.n_since_attempt,
            "mins": [x if math.isfinite(x) else None for x in s.mins],
            "maxs": [x if math.isfinite(x) else None for x in s.maxs],
            "gaussians": [
                {"count": g.count, "mean": g.mean, "m2": g.m2} for g in s._gauss
            ],
            "histograms": None if s._hists is None else [
                {
                    "edges": h.edges.tolist(),
                    "counts_pos": h.counts_pos.tolist(),
                    "counts_neg": h.counts_neg.tolist(),
                }
                for h in s._hists
            ],
        }
    return d


def _node_from_dict(d: dict, n_features: int) -> _Node:
    prior = ClassLabel(d["prior"])
    node = _Node(None, prior, d["leaf_id"])
    if d["kind"] == "split":
        node.feature = d["feature"]
        node.threshold = d["threshold"]
        node.left = _node_from_dict(d["left"], n_features)
        node.right = _node_from_dict(d["right"], n_features)
        return node
    sd = d["stats"]
    if sd is None:
        return node
    with_hists = sd["histograms"] is not None
    stats = LeafStats(n_features, None, 2, with_histograms=False)
    stats.class_counts = list(sd["class_counts"])
    stats.n_since_attempt = sd["n_since_attempt"]
    stats.mins = np.array([math.inf if x is None else x for x in sd["mins"]])
    stats.maxs = np.array([-math.inf if x is None else x for x in sd["maxs"]])
    stats._gauss = [
        GaussianStat(g["count"], g["mean"], g["m2"]) for g in sd["gaussians"]
    ]
    if with_hists:
        hists = []
        for hd in sd["histograms"]:
            h = ClassHistogram(np.asarray(hd["edges"]))
            h.counts_pos = np.asarray(hd["counts_pos"], dtype=np.int64)
            h.counts_neg = np.asarray(hd["counts_neg"], dtype=np.int64)
            hists.append(h)
        stats._hists = hists
    node.stats = stats
    return node
