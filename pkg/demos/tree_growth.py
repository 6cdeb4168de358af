"""Demo: watching a Hoeffding tree grow on a synthetic stream.

Feeds 50,000 labeled instances from two Gaussian blobs into a GH-VFDT tree,
reporting each split as it happens, then shows the bounded-memory accounting
and a JSON serialization round trip that continues training afterwards.
"""

import numpy as np

from imbstream import ClassLabel, HoeffdingTree, StreamRecord, make_tree_config


def stream(n, rng, p_positive=0.1):
    for _ in range(n):
        if rng.random() < p_positive:
            yield StreamRecord(rng.normal([2.0, 0.0], 1.0),
                               ClassLabel.POSITIVE, ClassLabel.POSITIVE)
        else:
            yield StreamRecord(rng.normal([-2.0, 0.0], 1.0),
                               ClassLabel.NEGATIVE, ClassLabel.NEGATIVE)


def main():
    rng = np.random.default_rng(11)
    config = make_tree_config("gh-vfdt")
    tree = HoeffdingTree(config, 2, np.array([[-6.0, 6.0], [-4.0, 4.0]]))

    for i, record in enumerate(stream(50_000, rng), start=1):
        event = tree.train_one(record)
        if event is not None:
            print(f"instance {i:>6}: leaf {event.leaf_id} split on "
                  f"feature {event.feature} at {event.threshold:+.3f}")

    print(f"\nleaves: {tree.leaf_count()}   depth: {tree.depth()}   "
          f"splits: {tree.n_splits}")
    print(f"memory cells: {tree.memory_cells()} "
          f"(= leaves x features x 2 classes for the Gaussian criterion)")

    # serialization round trip: the restored tree keeps learning
    restored = HoeffdingTree.from_json(tree.to_json())
    assert restored.to_json() == tree.to_json()
    for record in stream(1_000, rng):
        restored.train_one(record)
    print(f"restored tree trained 1000 more instances; "
          f"leaves now {restored.leaf_count()}")


if __name__ == "__main__":
    main()
