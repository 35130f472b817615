"""Incremental learner contract and the Last-Class / Majority-Class baselines."""
from __future__ import annotations

import numpy as np

from ..core import StreamSchema


class Learner:
    """Predict-then-learn classifier over single instances.

    Subclasses implement ``_scores`` (non-negative per-class scores, all zero
    when nothing has been learned), ``_learn`` and ``_init_state``.  The
    predicted class is the argmax of the scores; ties and the all-zero cold
    state resolve to the smallest class id, so an untrained learner predicts 0.
    """

    kind = "base"

    def __init__(self, schema: StreamSchema):
        self.schema = schema
        self.n_classes = schema.n_classes
        self._init_state()

    def _init_state(self):
        raise NotImplementedError

    def _scores(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _learn(self, x: np.ndarray, y: int, w: float):
        raise NotImplementedError

    def predict_one(self, x):
        scores = self._scores(self.schema.check_x(x))
        return int(np.argmax(scores)), scores

    def learn_one(self, x, y, w: float = 1.0):
        self._learn(self.schema.check_x(x), self.schema.check_y(y), w)
        return self

    def reset(self):
        self._init_state()
        return self


class LastClass(Learner):
    """Predicts the most recent label seen."""

    kind = "LC"

    def _init_state(self):
        self.last = None

    def _scores(self, x):
        s = np.zeros(self.n_classes)
        if self.last is not None:
            s[self.last] = 1.0
        return s

    def _learn(self, x, y, w):
        self.last = y


class MajorityClass(Learner):
    """Predicts the most frequent label so far (ties go to the smaller id)."""

    kind = "MC"

    def _init_state(self):
        self.counts = np.zeros(self.n_classes)

    def _scores(self, x):
        return self.counts.copy()

    def _learn(self, x, y, w):
        self.counts[y] += w
