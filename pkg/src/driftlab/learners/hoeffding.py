"""Hoeffding tree (VFDT) for numeric features.

Each leaf keeps, per class and per candidate feature, a weighted running
mean/variance plus the observed range.  Split candidates for a feature are
``n_splits`` evenly spaced thresholds inside the observed range; the class mass
falling left of a threshold is estimated from the per-class Gaussian CDF.
Splits are binary (``x[f] <= threshold`` goes left) and chosen by information
gain, subject to the Hoeffding bound with range log2(n_classes).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr

from ..core import RngHandle, StreamSchema
from ..errors import ConfigError, InputError
from .base import Learner
from .naive_bayes import gaussian_jll, jll_to_proba


def hoeffding_bound(range_: float, delta: float, n: int) -> float:
    """epsilon = sqrt(R^2 ln(1/delta) / (2n))."""
    if not 0.0 < delta < 1.0:
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    if n < 1:
        raise InputError("n must be >= 1")
    return math.sqrt(range_ * range_ * math.log(1.0 / delta) / (2.0 * n))


@dataclass
class HTConfig:
    grace_period: int = 200
    delta: float = 1e-7
    tau: float = 0.05
    max_depth: Optional[int] = None
    n_splits: int = 10
    min_branch_fraction: float = 0.01
    leaf_prediction: str = "mc"  # mc | nb | nba
    max_features: Optional[int] = None

    def __post_init__(self):
        if self.grace_period < 1:
            raise ConfigError("grace_period must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if self.leaf_prediction not in ("mc", "nb", "nba"):
            raise ConfigError("leaf_prediction must be mc, nb or nba")


def _entropy(w):
    """Base-2 entropy along the last axis of a (non-normalised) weight array."""
    total = w.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, w / total, 0.0)
        h = -np.where(p > 0, p * np.log2(p), 0.0).sum(axis=-1)
    return h


class Leaf:
    __slots__ = ("features", "depth", "prior", "counts", "mean", "m2", "lo", "hi",
                 "last_check", "mc_correct", "nb_correct")

    def __init__(self, n_classes, features, depth, prior=None):
        k = len(features)
        self.features = features
        self.depth = depth
        self.prior = prior
        self.counts = np.zeros(n_classes)
        self.mean = np.zeros((n_classes, k))
        self.m2 = np.zeros((n_classes, k))
        self.lo = np.full((n_classes, k), np.inf)
        self.hi = np.full((n_classes, k), -np.inf)
        self.last_check = 0.0
        self.mc_correct = 0.0
        self.nb_correct = 0.0

    @property
    def weight(self):
        return float(self.counts.sum())

    def update(self, xs, y, w):
        self.counts[y] += w
        delta = xs - self.mean[y]
        self.mean[y] += delta * (w / self.counts[y])
        self.m2[y] += w * delta * (xs - self.mean[y])
        np.minimum(self.lo[y], xs, out=self.lo[y])
        np.maximum(self.hi[y], xs, out=self.hi[y])

    def mc_scores(self):
        if self.counts.any() or self.prior is None:
            return self.counts.copy()
        return self.prior.copy()

    def nb_scores(self, xs):
        if not self.counts.any():
            return self.mc_scores()
        return jll_to_proba(gaussian_jll(self.counts, self.mean, self.m2, xs))


class Split:
    __slots__ = ("feature", "threshold", "left", "right", "depth")

    def __init__(self, feature, threshold, left, right, depth):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.depth = depth


class HoeffdingTree(Learner):
    kind = "HT"

    def __init__(self, schema: StreamSchema, config: Optional[HTConfig] = None,
                 rng: Optional[RngHandle] = None):
        self.config = config or HTConfig()
        d = schema.n_features
        m = self.config.max_features
        self._subset = m if m is not None and m < d else None
        if self._subset is not None and rng is None:
            raise ConfigError("feature subsampling needs an RngHandle")
        self._root_rng = rng
        self._range = math.log2(max(schema.n_classes, 2))
        super().__init__(schema)

    def _init_state(self):
        if self._root_rng is not None:
            self._rng = self._root_rng.child()
        self.root = self._new_leaf(0)
        self.n_splits_done = 0

    def _new_leaf(self, depth, prior=None):
        d = self.schema.n_features
        if self._subset is None:
            feats = np.arange(d)
        else:
            feats = np.sort(self._rng.gen.choice(d, self._subset, replace=False))
        return Leaf(self.n_classes, feats, depth, prior)

    # -- traversal -------------------------------------------------------
    def _sort(self, x):
        parent, node, is_left = None, self.root, False
        while isinstance(node, Split):
            parent = node
            is_left = x[node.feature] <= node.threshold
            node = node.left if is_left else node.right
        return node, parent, is_left

    def _leaf_scores(self, leaf, x):
        mode = self.config.leaf_prediction
        if mode == "mc":
            return leaf.mc_scores()
        xs = x[leaf.features]
        if mode == "nb" or leaf.nb_correct > leaf.mc_correct:
            return leaf.nb_scores(xs)
        return leaf.mc_scores()

    def _scores(self, x):
        leaf, _, _ = self._sort(x)
        return self._leaf_scores(leaf, x)

    # -- learning --------------------------------------------------------
    def _learn(self, x, y, w):
        leaf, parent, is_left = self._sort(x)
        xs = x[leaf.features]
        if self.config.leaf_prediction == "nba":
            if np.argmax(leaf.mc_scores()) == y:
                leaf.mc_correct += w
            if np.argmax(leaf.nb_scores(xs)) == y:
                leaf.nb_correct += w
        leaf.update(xs, y, w)
        cfg = self.config
        if cfg.max_depth is not None and leaf.depth >= cfg.max_depth:
            return
        if leaf.weight - leaf.last_check >= cfg.grace_period:
            leaf.last_check = leaf.weight
            self._attempt_split(leaf, parent, is_left)

    def candidate_splits(self, leaf):
        """Best ``(merit, feature, threshold, left_dist, right_dist)`` per candidate feature."""
        cfg = self.config
        present = leaf.counts > 0
        if present.sum() < 2:
            return []
        counts = leaf.counts
        total = counts.sum()
        n = counts[:, None]
        var = np.where(n > 1, leaf.m2 / np.maximum(n - 1, 1e-300), 0.0)
        std = np.sqrt(var)
        lo = np.where(present[:, None], leaf.lo, np.inf).min(axis=0)
        hi = np.where(present[:, None], leaf.hi, -np.inf).max(axis=0)
        frac = np.arange(1, cfg.n_splits + 1) / (cfg.n_splits + 1)
        parent_h = _entropy(counts)
        out = []
        for j in range(len(leaf.features)):
            if not hi[j] > lo[j]:
                continue
            th = lo[j] + (hi[j] - lo[j]) * frac  # (S,)
            mu, sd = leaf.mean[:, j], std[:, j]
            with np.errstate(divide="ignore", invalid="ignore"):
                z = (th[:, None] - mu[None, :]) / sd[None, :]
                cdf = np.where(sd[None, :] > 0, ndtr(z), (mu[None, :] <= th[:, None]).astype(float))
            cdf = np.where(th[:, None] < leaf.lo[:, j][None, :], 0.0, cdf)
            cdf = np.where(th[:, None] >= leaf.hi[:, j][None, :], 1.0, cdf)
            left = cdf * counts[None, :]
            right = counts[None, :] - left
            wl, wr = left.sum(axis=1), right.sum(axis=1)
            merit = parent_h - (wl / total) * _entropy(left) - (wr / total) * _entropy(right)
            ok = (wl >= cfg.min_branch_fraction * total) & (wr >= cfg.min_branch_fraction * total)
            merit = np.where(ok, merit, -np.inf)
            s = int(np.argmax(merit))
            if np.isfinite(merit[s]):
                out.append((float(merit[s]), int(leaf.features[j]), float(th[s]), left[s], right[s]))
        return out

    def _attempt_split(self, leaf, parent, is_left):
        cands = self.candidate_splits(leaf)
        if not cands:
            return
        cands.sort(key=lambda c: -c[0])
        best = cands[0]
        second = cands[1][0] if len(cands) > 1 else 0.0
        second = max(second, 0.0)  # the "no split" option has zero merit
        eps = hoeffding_bound(self._range, self.config.delta, max(int(leaf.weight), 1))
        if best[0] > 0 and (best[0] - second > eps or eps < self.config.tau):
            _, feat, th, ldist, rdist = best
            node = Split(feat, th, self._new_leaf(leaf.depth + 1, ldist),
                         self._new_leaf(leaf.depth + 1, rdist), leaf.depth)
            if parent is None:
                self.root = node
            elif is_left:
                parent.left = node
            else:
                parent.right = node
            self.n_splits_done += 1

    # -- inspection ------------------------------------------------------
    def leaves(self):
        stack, out = [self.root], []
        while stack:
            node = stack.pop()
            if isinstance(node, Split):
                stack.extend((node.right, node.left))
            else:
                out.append(node)
        return out

    @property
    def depth(self):
        return max(leaf.depth for leaf in self.leaves())

    @property
    def is_single_leaf(self):
        return isinstance(self.root, Leaf)
