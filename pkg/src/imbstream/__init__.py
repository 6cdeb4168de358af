"""Hoeffding trees with Hellinger-distance split criteria for imbalanced
data streams, plus a prequential experiment harness."""

from .core import (
    ClassHistogram,
    ClassLabel,
    ConfigurationError,
    GaussianStat,
    InsufficientDataError,
    StreamRecord,
    UndefinedDistanceError,
    ValidationError,
)
from .criteria import (
    Criterion,
    HoeffdingParams,
    SplitScore,
    best_two_features,
    hellinger_binned,
    hellinger_gaussian,
    hoeffding_epsilon,
    info_gain,
)
from .harness import (
    Dataset,
    DatasetError,
    RunResult,
    StreamResult,
    StreamSpec,
    build_stream,
    load_csv,
    run_grid,
    run_prequential,
)
from .metrics import (
    MetricSet,
    SignificanceReport,
    anova_oneway,
    metrics_from_confusion,
    tukey_hsd,
)
from .tree import HoeffdingTree, LeafStats, SplitInfo, TreeConfig

__version__ = "0.1.0"

ALGORITHMS = {
    "vfdt": Criterion.INFO_GAIN,
    "hd-vfdt": Criterion.HELLINGER_BINNED,
    "gh-vfdt": Criterion.HELLINGER_GAUSSIAN,
}


def make_tree_config(algorithm: str, **kwargs) -> TreeConfig:
    """TreeConfig for one of the named algorithms (vfdt, hd-vfdt, gh-vfdt)."""
    try:
        criterion = ALGORITHMS[algorithm]
    except KeyError:
        raise ValidationError(
            f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}")
    return TreeConfig(criterion=criterion, **kwargs)
