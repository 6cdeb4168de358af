from collections import Counter

import numpy as np
import pytest

from imbstream import (
    ClassLabel,
    ConfigurationError,
    Criterion,
    Dataset,
    DatasetError,
    StreamSpec,
    TreeConfig,
    build_stream,
    load_csv,
    make_tree_config,
    run_grid,
    run_prequential,
)


def two_gaussian_dataset(n_pos, n_neg, pos_mean=0.0, neg_mean=10.0, seed=0):
    """Single-feature dataset with unit-variance Gaussian classes."""
    rng = np.random.default_rng(seed)
    features = np.concatenate([rng.normal(pos_mean, 1.0, n_pos),
                               rng.normal(neg_mean, 1.0, n_neg)])
    labels = np.concatenate([np.ones(n_pos, dtype=np.int8),
                             -np.ones(n_neg, dtype=np.int8)])
    return Dataset("synthetic", features.reshape(-1, 1), labels)


class TestLoadCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "toy.csv"
        path.write_text("a,b,label\n1.0,2.0,1\n3.5,-1.0,-1\n0.0,0.5,0\n")
        ds = load_csv(path)
        assert ds.features.shape == (3, 2)
        assert list(ds.labels) == [1, -1, -1]  # 0 maps to negative

    def test_malformed_rows_reported_with_line_numbers(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,label\n1.0,1\nnope,1\n2.0\n3.0,7\n")
        with pytest.raises(DatasetError) as err:
            load_csv(path)
        msg = str(err.value)
        assert "line 3" in msg
        assert "line 4" in msg
        assert "line 5" in msg

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError):
            load_csv(tmp_path / "does-not-exist.csv")


def spec(**kwargs):
    kwargs.setdefault("imbalance_ratio", 10)
    kwargs.setdefault("labeling_fraction", 1.0)
    kwargs.setdefault("pretrain_pos", 20)
    kwargs.setdefault("pretrain_neg", 100)
    kwargs.setdefault("seed", 42)
    return StreamSpec(**kwargs)


class TestBuildStream:
    def test_full_labeling_counts(self):
        ds = two_gaussian_dataset(120, 2000)
        pretrain, stream = build_stream(ds, spec())
        truths = Counter(r.truth for r in stream)
        assert truths[ClassLabel.POSITIVE] == 100
        assert truths[ClassLabel.NEGATIVE] == 1000
        assert all(r.observed is not None for r in stream)
        assert all(r.observed is not None for r in pretrain)
        assert len(pretrain) == 120

    def test_labeled_count_rounds_half_up(self):
        ds = two_gaussian_dataset(120, 12000)
        pretrain, stream = build_stream(
            ds, spec(imbalance_ratio=100, labeling_fraction=0.1))
        n_eval = len(stream)
        labeled = sum(r.observed is not None for r in stream)
        assert labeled == int(np.floor(0.1 * n_eval + 0.5))

    def test_determinism(self):
        ds = two_gaussian_dataset(100, 2000)
        a = build_stream(ds, spec(labeling_fraction=0.5))
        b = build_stream(ds, spec(labeling_fraction=0.5))
        for seq_a, seq_b in zip(a, b):
            assert len(seq_a) == len(seq_b)
            for ra, rb in zip(seq_a, seq_b):
                assert ra.truth == rb.truth
                assert ra.observed == rb.observed
                assert np.array_equal(ra.features, rb.features)

    def test_truth_multiset_independent_of_labeling(self):
        ds = two_gaussian_dataset(100, 2000)
        streams = [build_stream(ds, spec(labeling_fraction=f))[1]
                   for f in (0.1, 0.5, 1.0)]
        reference = [r.truth for r in streams[0]]
        for s in streams[1:]:
            assert [r.truth for r in s] == reference

    def test_pretrain_eval_disjoint(self):
        ds = two_gaussian_dataset(60, 800)
        pretrain, stream = build_stream(ds, spec())
        seen = {float(r.features[0]) for r in pretrain}
        # all feature values are distinct continuous draws, so overlap in
        # values implies overlap in records
        assert not seen & {float(r.features[0]) for r in stream}

    def test_positive_subsampling_keeps_ratio_exact(self):
        ds = two_gaussian_dataset(500, 1500)
        pretrain, stream = build_stream(ds, spec(imbalance_ratio=100))
        truths = Counter(r.truth for r in stream)
        # only 1400 negatives remain after pre-training: 14 positives fit
        assert truths[ClassLabel.POSITIVE] == 14
        assert truths[ClassLabel.NEGATIVE] == 1400

    def test_unachievable_ratio(self):
        ds = two_gaussian_dataset(50, 200)
        with pytest.raises(ConfigurationError):
            build_stream(ds, spec(imbalance_ratio=1000))

    def test_no_shuffle_preserves_source_order(self):
        ds = two_gaussian_dataset(60, 800)
        _, stream = build_stream(ds, spec(shuffle=False))
        values = [float(r.features[0]) for r in stream]
        order = {float(v): i for i, v in enumerate(ds.features[:, 0])}
        indices = [order[v] for v in values]
        assert indices == sorted(indices)


class TestRunPrequential:
    def test_empty_eval(self):
        ds = two_gaussian_dataset(60, 800)
        pretrain, _ = build_stream(ds, spec())
        res = run_prequential(make_tree_config("gh-vfdt"), pretrain, [])
        assert (res.tp, res.fp, res.tn, res.fn) == (0, 0, 0, 0)
        assert res.instances_processed == 0

    def test_confusion_conservation(self):
        ds = two_gaussian_dataset(120, 3000)
        pretrain, stream = build_stream(ds, spec())
        res = run_prequential(make_tree_config("gh-vfdt"), pretrain, stream)
        truths = Counter(r.truth for r in stream)
        assert res.tp + res.fn == truths[ClassLabel.POSITIVE]
        assert res.tn + res.fp == truths[ClassLabel.NEGATIVE]
        assert res.instances_processed == len(stream)

    def test_separable_stream_high_recall(self):
        # means 10 sigma apart: Bayes error is negligible, so after the first
        # split the minority class should be recovered almost entirely
        ds = two_gaussian_dataset(300, 32000, seed=3)
        pretrain, stream = build_stream(
            ds, spec(imbalance_ratio=100, pretrain_pos=100, pretrain_neg=500))
        res = run_prequential(make_tree_config("gh-vfdt"), pretrain, stream)
        assert res.splits >= 1
        recall = res.tp / (res.tp + res.fn)
        assert recall >= 0.95

    def test_unlabeled_stream_leaves_tree_untouched(self):
        ds = two_gaussian_dataset(120, 3000)
        pretrain, stream = build_stream(ds, spec(labeling_fraction=0.0))
        assert all(r.observed is None for r in stream)
        from imbstream import HoeffdingTree
        from imbstream.harness import pretrain_ranges
        config = make_tree_config("gh-vfdt")
        tree = HoeffdingTree(config, 1, pretrain_ranges(pretrain))
        for r in pretrain:
            tree.train_one(r)
        before = tree.to_json()
        for r in stream:
            tree.predict(r.features)
            if r.observed is not None:
                tree.train_one(r)
        assert tree.to_json() == before


@pytest.fixture(scope="module")
def dataset():
    return two_gaussian_dataset(400, 8000, seed=5)


class TestRunGrid:
    def algorithms(self):
        return {name: make_tree_config(name, grace_period=50)
                for name in ("vfdt", "hd-vfdt", "gh-vfdt")}

    def test_cardinality(self, dataset):
        results = run_grid(dataset, self.algorithms(), ratios=[10, 50],
                           labelings=[0.5, 1.0], repeats=10, base_seed=1,
                           pretrain_pos=50, pretrain_neg=250)
        assert len(results) == 3 * 2 * 2 * 10

    def test_pairing_within_repeat(self, dataset):
        results = run_grid(dataset, self.algorithms(), ratios=[20],
                           labelings=[1.0], repeats=3, base_seed=7,
                           pretrain_pos=50, pretrain_neg=250)
        by_repeat = {}
        for r in results:
            by_repeat.setdefault(r.repeat, []).append(r)
        for group in by_repeat.values():
            assert len({g.seed for g in group}) == 1
            # identical streams imply identical eval totals
            totals = {(g.result.tp + g.result.fn, g.result.tn + g.result.fp)
                      for g in group}
            assert len(totals) == 1

    def test_failed_cell_does_not_abort_grid(self, dataset):
        results = run_grid(dataset, self.algorithms(), ratios=[10, 10**6],
                           labelings=[1.0], repeats=2, base_seed=0,
                           pretrain_pos=50, pretrain_neg=250)
        failed = [r for r in results if r.error is not None]
        ok = [r for r in results if r.error is None]
        assert len(failed) == 3 * 2  # the impossible ratio, every algorithm
        assert len(ok) == 3 * 2
        assert all(r.imbalance_ratio == 10**6 for r in failed)

    def test_parallel_matches_serial(self, dataset):
        kwargs = dict(ratios=[20], labelings=[0.5], repeats=4, base_seed=3,
                      pretrain_pos=50, pretrain_neg=250)
        serial = run_grid(dataset, self.algorithms(), n_jobs=1, **kwargs)
        parallel = run_grid(dataset, self.algorithms(), n_jobs=2, **kwargs)
        assert [(r.algorithm, r.repeat, r.result.tp, r.result.fp, r.result.tn,
                 r.result.fn) for r in serial] == \
               [(r.algorithm, r.repeat, r.result.tp, r.result.fp, r.result.tn,
                 r.result.fn) for r in parallel]
