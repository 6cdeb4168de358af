"""Stream construction and prequential (test-then-train) evaluation.

A static dataset is turned into an evaluation stream by: reserving a labeled
pre-training prefix, re-sampling the remainder to an exact +1:-r class ratio,
and masking a fraction of the evaluation labels (class-blind, uniform) to
simulate limited expert feedback.  Metrics always use ground truth; the label
mask only controls what the learner may train on.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from .core import ClassLabel, ConfigurationError, StreamRecord, ValidationError
from .metrics import MetricSet, metrics_from_confusion
from .tree import HoeffdingTree, TreeConfig

__all__ = [
    "Dataset",
    "DatasetError",
    "StreamSpec",
    "RunResult",
    "StreamResult",
    "load_csv",
    "build_stream",
    "run_prequential",
    "run_grid",
]


class DatasetError(ValueError):
    """Raised for unreadable or malformed dataset files."""


@dataclass(frozen=True, slots=True)
class Dataset:
    """A loaded static dataset: features (n, m) and labels (+1/-1)."""

    name: str
    features: np.ndarray
    labels: np.ndarray

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def positive_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels == 1)

    @property
    def negative_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels == -1)


def load_csv(path: str | Path, max_bad_rows: int = 20) -> Dataset:
    """Load a dataset CSV: header row, m numeric feature columns, final
    column the class label in {-1, 1} (or {0, 1}, with 0 mapped to -1).

    Malformed rows abort the load; the error message lists their line numbers.
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as e:
        raise DatasetError(f"cannot read dataset {path}: {e}") from e
    feats: list[list[float]] = []
    labels: list[int] = []
    bad: list[str] = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return Dataset(path.stem, np.empty((0, 0)), np.empty(0, dtype=np.int8))
        width = len(header)
        if width < 2:
            raise DatasetError(f"{path}: need at least one feature column and a label")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                bad.append(f"line {lineno}: expected {width} columns, got {len(row)}")
            else:
                try:
                    values = [float(v) for v in row[:-1]]
                    raw = float(row[-1])
                except ValueError:
                    bad.append(f"line {lineno}: non-numeric value")
                    raw = None
                if raw is not None:
                    if raw == 1:
                        labels.append(1)
                        feats.append(values)
                    elif raw in (-1, 0):
                        labels.append(-1)
                        feats.append(values)
                    else:
                        bad.append(f"line {lineno}: label {row[-1]!r} not in {{-1,0,1}}")
            if len(bad) > max_bad_rows:
                bad.append("... (further errors suppressed)")
                break
    if bad:
        raise DatasetError(f"{path}: malformed rows:\n  " + "\n  ".join(bad))
    features = np.asarray(feats, dtype=np.float64)
    if features.size == 0:
        features = features.reshape(0, width - 1)
    return Dataset(path.stem, features, np.asarray(labels, dtype=np.int8))


@dataclass(frozen=True, slots=True)
class StreamSpec:
    """How to carve one evaluation stream out of a dataset."""

    imbalance_ratio: int
    labeling_fraction: float
    pretrain_pos: int = 200
    pretrain_neg: int = 1000
    seed: int = 0
    shuffle: bool = True
    max_eval_positives: Optional[int] = None  # None = all the ratio permits

    def __post_init__(self):
        if self.imbalance_ratio < 1:
            raise ValidationError("imbalance_ratio must be >= 1")
        if not (0.0 <= self.labeling_fraction <= 1.0):
            raise ValidationError("labeling_fraction must be in [0, 1]")
        if self.pretrain_pos < 0 or self.pretrain_neg < 0:
            raise ValidationError("pretrain quotas must be >= 0")


@dataclass(frozen=True, slots=True)
class RunResult:
    tp: int
    fp: int
    tn: int
    fn: int
    instances_processed: int
    splits: int
    wall_time: float


@dataclass(frozen=True, slots=True)
class StreamResult:
    """One grid cell: coordinates plus the run outcome (or its failure)."""

    algorithm: str
    imbalance_ratio: int
    labeling_fraction: float
    repeat: int
    seed: int
    result: Optional[RunResult] = None
    metrics: Optional[MetricSet] = None
    error: Optional[str] = None


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def build_stream(dataset: Dataset, spec: StreamSpec
                 ) -> tuple[list[StreamRecord], list[StreamRecord]]:
    """Build (pretrain, eval) record sequences.

    Pretrain records are fully labeled and disjoint from the evaluation
    stream.  The evaluation stream has an exact 1:r class ratio (positives are
    subsampled when the dataset cannot supply r negatives per positive), and
    exactly round(labeling_fraction * n_eval) records carry an observed label,
    chosen class-blind and uniformly at random.
    """
    rng = np.random.default_rng(spec.seed)
    pos_idx = dataset.positive_indices
    neg_idx = dataset.negative_indices
    if spec.shuffle:
        pos_idx = rng.permutation(pos_idx)
        neg_idx = rng.permutation(neg_idx)
    if len(pos_idx) < spec.pretrain_pos or len(neg_idx) < spec.pretrain_neg:
        raise ConfigurationError(
            f"dataset has {len(pos_idx)} positives / {len(neg_idx)} negatives; "
            f"cannot reserve {spec.pretrain_pos}/{spec.pretrain_neg} for pre-training")
    pre_pos, rest_pos = pos_idx[: spec.pretrain_pos], pos_idx[spec.pretrain_pos:]
    pre_neg, rest_neg = neg_idx[: spec.pretrain_neg], neg_idx[spec.pretrain_neg:]

    r = spec.imbalance_ratio
    n_pos = min(len(rest_pos), len(rest_neg) // r)
    if spec.max_eval_positives is not None:
        n_pos = min(n_pos, spec.max_eval_positives)
    if n_pos < 1:
        raise ConfigurationError(
            f"ratio +1:-{r} not achievable: {len(rest_pos)} positives and "
            f"{len(rest_neg)} negatives remain after the pre-training reserve")
    eval_idx = np.concatenate([rest_pos[:n_pos], rest_neg[: n_pos * r]])
    pre_idx = np.concatenate([pre_pos, pre_neg])
    if spec.shuffle:
        pre_idx = rng.permutation(pre_idx)
        eval_idx = rng.permutation(eval_idx)
    else:
        pre_idx = np.sort(pre_idx)
        eval_idx = np.sort(eval_idx)

    n_eval = len(eval_idx)
    n_labeled = _round_half_up(spec.labeling_fraction * n_eval)
    labeled_mask = np.zeros(n_eval, dtype=bool)
    if n_labeled > 0:
        labeled_mask[rng.choice(n_eval, size=n_labeled, replace=False)] = True

    feats = dataset.features
    labels = dataset.labels

    def record(i: int, observed: bool) -> StreamRecord:
        truth = ClassLabel(int(labels[i]))
        return StreamRecord(feats[i], truth, truth if observed else None)

    pretrain = [record(int(i), True) for i in pre_idx]
    stream = [record(int(i), bool(labeled_mask[k]))
              for k, i in enumerate(eval_idx)]
    return pretrain, stream


def pretrain_ranges(pretrain: Sequence[StreamRecord]) -> Optional[np.ndarray]:
    """Per-feature [min, max] over the pre-training records, for histogram
    edge placement at the root."""
    if not pretrain:
        return None
    stacked = np.vstack([r.features for r in pretrain])
    return np.stack([stacked.min(axis=0), stacked.max(axis=0)], axis=1)


def run_prequential(tree_config: TreeConfig,
                    pretrain: Sequence[StreamRecord],
                    stream: Sequence[StreamRecord],
                    n_features: Optional[int] = None) -> RunResult:
    """Test-then-train pass: pre-train the tree, then for each stream record
    predict against ground truth and train on it only if its label is
    observed."""
    if n_features is None:
        if pretrain:
            n_features = len(pretrain[0].features)
        elif stream:
            n_features = len(stream[0].features)
        else:
            raise ValidationError("cannot infer feature count from empty streams")
    start = time.perf_counter()
    tree = HoeffdingTree(tree_config, n_features, pretrain_ranges(pretrain))
    for rec in pretrain:
        tree.train_one(rec)
    tp = fp = tn = fn = 0
    splits = tree.n_splits
    for rec in stream:
        pred = tree.predict(rec.features)
        if rec.truth == ClassLabel.POSITIVE:
            if pred == ClassLabel.POSITIVE:
                tp += 1
            else:
                fn += 1
        else:
            if pred == ClassLabel.POSITIVE:
                fp += 1
            else:
                tn += 1
        if rec.observed is not None:
            tree.train_one(rec)
    return RunResult(tp, fp, tn, fn, len(stream), tree.n_splits,
                     time.perf_counter() - start)


def _run_cell(dataset: Dataset, algorithms: dict[str, TreeConfig],
              spec: StreamSpec, repeat: int) -> list[StreamResult]:
    """One (ratio, labeling, repeat) cell: every algorithm sees the identical
    record sequence (paired design)."""
    coords = dict(imbalance_ratio=spec.imbalance_ratio,
                  labeling_fraction=spec.labeling_fraction,
                  repeat=repeat, seed=spec.seed)
    try:
        pretrain, stream = build_stream(dataset, spec)
    except (ConfigurationError, ValidationError) as e:
        return [StreamResult(algorithm=name, error=str(e), **coords)
                for name in algorithms]
    out = []
    for name, config in algorithms.items():
        res = run_prequential(config, pretrain, stream, dataset.n_features)
        out.append(StreamResult(
            algorithm=name, result=res,
            metrics=metrics_from_confusion(res.tp, res.fp, res.tn, res.fn),
            **coords))
    return out


def run_grid(dataset: Dataset,
             algorithms: dict[str, TreeConfig],
             ratios: Sequence[int],
             labelings: Sequence[float],
             repeats: int,
             base_seed: int = 0,
             pretrain_pos: int = 200,
             pretrain_neg: int = 1000,
             max_eval_positives: Optional[int] = None,
             shuffle: bool = True,
             n_jobs: int = 1) -> list[StreamResult]:
    """Full experiment grid.  Returns one StreamResult per
    (algorithm, ratio, labeling, repeat), sorted by those coordinates.
    Within a repeat, every algorithm is evaluated on the same stream.
    Cells whose configuration is unsatisfiable are recorded as failed without
    aborting the grid."""
    cells = [
        (StreamSpec(imbalance_ratio=r, labeling_fraction=lab,
                    pretrain_pos=pretrain_pos, pretrain_neg=pretrain_neg,
                    seed=base_seed + rep, shuffle=shuffle,
                    max_eval_positives=max_eval_positives), rep)
        for r in ratios for lab in labelings for rep in range(repeats)
    ]
    if n_jobs == 1:
        nested = [_run_cell(dataset, algorithms, spec, rep) for spec, rep in cells]
    else:
        nested = Parallel(n_jobs=n_jobs)(
            delayed(_run_cell)(dataset, algorithms, spec, rep)
            for spec, rep in cells)
    flat = [res for group in nested for res in group]
    order = {name: i for i, name in enumerate(algorithms)}
    flat.sort(key=lambda s: (order[s.algorithm], s.imbalance_ratio,
                             s.labeling_fraction, s.repeat))
    return flat
