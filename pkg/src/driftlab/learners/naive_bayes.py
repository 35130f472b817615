from __future__ import annotations

import numpy as np

from .base import Learner

VAR_FLOOR = 1e-9
_LOG_2PI = np.log(2 * np.pi)


class GaussianNB(Learner):
    """Gaussian naive Bayes with per-class running moments.

    Moments are updated with the weighted Welford recurrence; variances use the
    unbiased (n - 1) denominator and are floored at ``VAR_FLOOR``.
    """

    kind = "NB"

    def _init_state(self):
        d = self.schema.n_features
        self.counts = np.zeros(self.n_classes)
        self.mean = np.zeros((self.n_classes, d))
        self.m2 = np.zeros((self.n_classes, d))

    def _learn(self, x, y, w):
        self.counts[y] += w
        delta = x - self.mean[y]
        self.mean[y] += delta * (w / self.counts[y])
        self.m2[y] += w * delta * (x - self.mean[y])

    def variance(self) -> np.ndarray:
        return unbiased_variance(self.counts, self.m2)

    def joint_log_likelihood(self, x) -> np.ndarray:
        """log P(c) + sum_f log N(x_f; mean_cf, var_cf); -inf for unseen classes."""
        return gaussian_jll(self.counts, self.mean, self.m2, x)

    def _scores(self, x):
        return jll_to_proba(self.joint_log_likelihood(x))


def unbiased_variance(counts, m2):
    n = counts[:, None]
    return np.where(n > 1, m2 / np.maximum(n - 1, 1e-300), 0.0)


def gaussian_jll(counts, mean, m2, x):
    out = np.full(len(counts), -np.inf)
    seen = counts > 0
    if not seen.any():
        return out
    var = np.maximum(unbiased_variance(counts, m2)[seen], VAR_FLOOR)
    ll = -0.5 * (_LOG_2PI + np.log(var) + (x - mean[seen]) ** 2 / var).sum(axis=1)
    out[seen] = np.log(counts[seen] / counts.sum()) + ll
    return out


def jll_to_proba(jll):
    if np.isneginf(jll).all():
        return np.zeros(len(jll))
    p = np.exp(jll - jll.max())
    return p / p.sum()
