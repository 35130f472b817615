"""Batch random forest behind the learner prediction contract.

Trees are grown by scikit-learn (CART, Gini, bootstrap, sqrt(d) candidate
features per split, no depth cap, min leaf 1).  Prediction does its own
traversal of the fitted node arrays and takes a hard majority vote, which is
much cheaper per instance than scikit-learn's batch-oriented predict.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.ensemble import RandomForestClassifier

from ..core import RngHandle, StreamSchema
from ..errors import TrainingError


@dataclass
class ForestConfig:
    n_trees: int = 100
    max_depth: Optional[int] = None
    min_samples_leaf: int = 1


class ForestModel:
    kind = "RF-batch"

    def __init__(self, schema: StreamSchema, estimator: RandomForestClassifier, seed: int,
                 n_train: int):
        self.schema = schema
        self.n_classes = schema.n_classes
        self.seed = seed
        self.n_train = n_train
        self.tree_seeds = [int(t.random_state) for t in estimator.estimators_]
        classes = [int(c) for c in estimator.classes_]
        self._trees = []
        for est in estimator.estimators_:
            t = est.tree_
            leaf_class = [classes[int(np.argmax(v[0]))] for v in t.value]
            self._trees.append((t.children_left.tolist(), t.children_right.tolist(),
                                t.feature.tolist(), t.threshold.tolist(), leaf_class))

    @property
    def n_trees(self):
        return len(self._trees)

    def votes(self, x) -> np.ndarray:
        x = self.schema.check_x(x).tolist()
        votes = np.zeros(self.n_classes)
        for left, right, feat, thr, leaf_class in self._trees:
            node = 0
            while left[node] != -1:
                node = left[node] if x[feat[node]] <= thr[node] else right[node]
            votes[leaf_class[node]] += 1
        return votes

    def predict_one(self, x):
        v = self.votes(x)
        return int(np.argmax(v)), v


def rf_fit(buffer, schema: StreamSchema, config: Optional[ForestConfig] = None,
           rng: Optional[RngHandle] = None) -> ForestModel:
    """Fit a forest on a list of labeled instances."""
    if not buffer:
        raise TrainingError("cannot fit a forest on an empty buffer")
    config = config or ForestConfig()
    rng = rng or RngHandle(0)
    X = np.vstack([inst.x for inst in buffer])
    y = np.array([inst.y for inst in buffer], dtype=int)
    seed = int(rng.child_seed() % (2**32))
    est = RandomForestClassifier(
        n_estimators=config.n_trees,
        criterion="gini",
        max_features="sqrt",
        max_depth=config.max_depth,
        min_samples_leaf=config.min_samples_leaf,
        bootstrap=True,
        random_state=seed,
        n_jobs=1,
    )
    est.fit(X, y)
    return ForestModel(schema, est, seed, len(buffer))
