"""Discriminative drift detector (D3).

Keeps ``w`` reference vectors followed by ``ceil(rho * w)`` recent ones.  Once
both are full, a discriminator is trained to tell reference (label 0) from
recent (label 1) and its AUC is measured over the pooled points using
out-of-fold scores from seeded stratified ``n_folds``-fold cross-validation, so
no point is scored by a model that saw it during training.  An AUC of
at least ``tau`` is a drift: the recent vectors become the head of the next
reference window.  Otherwise the oldest ``ceil(rho * w)`` vectors are dropped,
sliding both windows forward.
"""
from __future__ import annotations

import math
from collections import deque

import numpy as np
from scipy.stats import rankdata

from ..core import RngHandle, StreamSchema
from ..errors import ConfigError, InputError
from .base import Detector, Signal


def auc_score(labels, scores) -> float:
    """Area under the ROC curve via the Mann-Whitney statistic; ties count half."""
    labels = np.asarray(labels, dtype=bool)
    n1 = labels.sum()
    n0 = labels.size - n1
    if n0 == 0 or n1 == 0:
        raise InputError("AUC needs both classes")
    ranks = rankdata(scores)
    return float((ranks[labels].sum() - n1 * (n1 + 1) / 2) / (n0 * n1))


class LinearDiscriminator:
    """Logistic model fitted by plain SGD on standardised inputs."""

    def __init__(self, lr: float = 0.1, epochs: int = 1):
        self.lr = lr
        self.epochs = epochs

    def fit(self, X, y, rng: RngHandle):
        """Train on ``(X, y)``; return a function scoring new rows."""
        mu = X.mean(axis=0)
        sd = X.std(axis=0)
        sd = np.where(sd > 0, sd, 1.0)
        Z = (X - mu) / sd
        w = np.zeros(X.shape[1])
        b = 0.0
        for _ in range(self.epochs):
            for i in rng.gen.permutation(len(y)):
                z = Z[i] @ w + b
                p = 1.0 / (1.0 + math.exp(-z)) if z > -500 else 0.0
                g = p - y[i]
                w -= self.lr * g * Z[i]
                b -= self.lr * g
        return lambda Xn: ((Xn - mu) / sd) @ w + b


class TreeDiscriminator:
    """Hoeffding tree discriminator; scores are the leaf's class-1 probability."""

    def __init__(self, ht_config=None):
        self.ht_config = ht_config

    def fit(self, X, y, rng: RngHandle):
        from ..learners.hoeffding import HTConfig, HoeffdingTree

        cfg = self.ht_config or HTConfig(leaf_prediction="nb")
        tree = HoeffdingTree(StreamSchema.anonymous(X.shape[1], 2), cfg)
        for i in rng.gen.permutation(len(y)):
            tree.learn_one(X[i], int(y[i]))

        def score(Xn):
            out = np.empty(len(Xn))
            for i, row in enumerate(Xn):
                s = tree.predict_one(row)[1]
                total = s.sum()
                out[i] = s[1] / total if total > 0 else 0.5
            return out

        return score


class D3(Detector):
    kind = "D3"
    supervised = False

    def __init__(self, n_features: int, window: int = 100, rho: float = 0.1, tau: float = 0.70,
                 discriminator: str = "lr", rng: RngHandle = None, lr: float = 0.1, epochs: int = 1,
                 n_folds: int = 2):
        if window < 1 or not 0 < rho <= 1:
            raise ConfigError("need window >= 1 and 0 < rho <= 1")
        self.n_features = n_features
        self.window = window
        self.recent = max(1, math.ceil(rho * window))
        self.tau = tau
        self.n_folds = n_folds
        if discriminator == "lr":
            self.discriminator = LinearDiscriminator(lr, epochs)
        elif discriminator == "ht":
            self.discriminator = TreeDiscriminator()
        else:
            raise ConfigError(f"unknown discriminator {discriminator!r}")
        self.discriminator_kind = discriminator
        self._root_rng = rng or RngHandle(0)
        self.last_auc = None
        self.n_checks = 0
        super().__init__()

    def reset(self):
        self.buffer = deque()
        self._rng = self._root_rng.child()
        self.last_auc = None

    def _oof_scores(self, X, y):
        folds = np.empty(len(y), dtype=int)
        for label in (0.0, 1.0):
            idx = np.flatnonzero(y == label)
            idx = idx[self._rng.gen.permutation(len(idx))]
            folds[idx] = np.arange(len(idx)) % self.n_folds
        scores = np.empty(len(y))
        for f in range(self.n_folds):
            test = folds == f
            model = self.discriminator.fit(X[~test], y[~test], self._rng)
            scores[test] = model(X[test])
        return scores

    def update(self, x) -> Signal:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_features,):
            raise InputError(f"expected {self.n_features} features, got shape {x.shape}")
        self.buffer.append(x)
        if len(self.buffer) < self.window + self.recent:
            return Signal.STABLE
        X = np.vstack(self.buffer)
        y = np.zeros(len(X))
        y[self.window:] = 1.0
        scores = self._oof_scores(X, y)
        self.last_auc = auc_score(y, scores)
        self.n_checks += 1
        if self.last_auc >= self.tau:
            for _ in range(self.window):
                self.buffer.popleft()
            return self._emit(Signal.DRIFT)
        for _ in range(self.recent):
            self.buffer.popleft()
        return Signal.STABLE
