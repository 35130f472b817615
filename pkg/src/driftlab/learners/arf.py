"""Adaptive Random Forest.

Each member is a Hoeffding tree whose leaves consider a random subset of
``ceil(sqrt(d)) + 1`` features.  Training feeds every member the instance with
a Poisson(lambda) weight.  Each member's 0/1 error (measured before training)
drives two ADWIN detectors: the warning detector starts a background tree, the
drift detector replaces the member by its background tree, or by a fresh tree
when none was started.  Votes are weighted by each member's accuracy since it
was installed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import RngHandle, StreamSchema
from ..detectors.adwin import ADWIN
from ..detectors.base import Signal
from .base import Learner
from .hoeffding import HTConfig, HoeffdingTree


@dataclass
class ARFConfig:
    n_models: int = 10
    lambda_: float = 6.0
    max_features: Optional[int] = None  # default ceil(sqrt(d)) + 1
    delta_warning: float = 0.01
    delta_drift: float = 0.001
    tree: HTConfig = field(default_factory=lambda: HTConfig(grace_period=50))


class _Member:
    __slots__ = ("tree", "warning", "drift", "background", "n_seen", "n_correct")

    def __init__(self, tree, cfg):
        self.tree = tree
        self.warning = ADWIN(delta=cfg.delta_warning)
        self.drift = ADWIN(delta=cfg.delta_drift)
        self.background = None
        self.n_seen = 0.0
        self.n_correct = 0.0

    @property
    def accuracy(self):
        return self.n_correct / self.n_seen if self.n_seen else 0.0


class AdaptiveRandomForest(Learner):
    kind = "ARF"

    def __init__(self, schema: StreamSchema, rng: RngHandle, config: Optional[ARFConfig] = None):
        self.config = config or ARFConfig()
        self._root_rng = rng
        d = schema.n_features
        m = self.config.max_features or math.ceil(math.sqrt(d)) + 1
        self.max_features = min(m, d)
        self.n_replacements = 0
        super().__init__(schema)

    def _tree_config(self):
        cfg = self.config.tree
        return HTConfig(**{**cfg.__dict__, "max_features": self.max_features})

    def _new_tree(self):
        return HoeffdingTree(self.schema, self._tree_config(), RngHandle(self._rng.child_seed()))

    def _init_state(self):
        self._rng = self._root_rng.child()
        self.members = [_Member(self._new_tree(), self.config) for _ in range(self.config.n_models)]

    def _scores(self, x):
        total = np.zeros(self.n_classes)
        weights = [m.accuracy for m in self.members]
        if not any(weights):
            weights = [1.0] * len(self.members)
        for m, w in zip(self.members, weights):
            s = m.tree._scores(x)
            z = s.sum()
            if z > 0 and w > 0:
                total += w * s / z
        return total

    def _learn(self, x, y, w):
        cfg = self.config
        for m in self.members:
            correct = int(np.argmax(m.tree._scores(x))) == y
            m.n_seen += 1
            m.n_correct += correct
            k = int(self._rng.gen.poisson(cfg.lambda_))
            if k > 0:
                m.tree._learn(x, y, k * w)
                if m.background is not None:
                    m.background._learn(x, y, k * w)
            err = 0.0 if correct else 1.0
            if m.warning.update(err) is Signal.DRIFT:
                m.background = self._new_tree()
            if m.drift.update(err) is Signal.DRIFT:
                new = m.background if m.background is not None else self._new_tree()
                m.tree = new
                m.background = None
                m.warning = ADWIN(delta=cfg.delta_warning)
                m.drift = ADWIN(delta=cfg.delta_drift)
                m.n_seen = m.n_correct = 0.0
                self.n_replacements += 1

    def n_background(self):
        return sum(m.background is not None for m in self.members)
