"""Image-based drift detector (IBDD).

The last ``window`` feature vectors form a grayscale image: one row per
instance, each feature min-max normalised by the running bounds seen so far.
Once the first window fills it becomes the reference image.  From then on every
update compares the current sliding image to the reference pixel by pixel and
appends the mean squared deviation (MSD) to a history.

Control limits start from a permutation null: ``n_runs`` seeded shuffles of the
reference rows are compared to the reference, giving mean +/- 2 std.  Schedule:

* every ``update_every`` updates without a drift the limits are re-estimated as
  mean +/- 2 std over the last ``history`` MSD values;
* ``consecutive`` MSD values strictly above the upper limit, or strictly below
  the lower one, signal drift.  The current image becomes the reference and the
  limits are recalibrated from the new reference's permutation null.
"""
from __future__ import annotations

import numpy as np

from ..core import RngHandle
from ..errors import InputError
from .base import Detector, Signal


class IBDD(Detector):
    kind = "IBDD"
    supervised = False

    def __init__(self, n_features: int, window: int = 200, consecutive: int = 10,
                 n_runs: int = 20, update_every: int = 60, history: int = 50,
                 rng: RngHandle = None):
        self.n_features = n_features
        self.window = window
        self.consecutive = consecutive
        self.n_runs = n_runs
        self.update_every = update_every
        self.history = history
        self._root_rng = rng or RngHandle(0)
        super().__init__()

    def reset(self):
        self._rng = self._root_rng.child()
        self.buf = np.empty((self.window, self.n_features))
        self.filled = 0
        self.head = 0  # index of the oldest row once full
        self.lo = np.full(self.n_features, np.inf)
        self.hi = np.full(self.n_features, -np.inf)
        self.reference = None
        self.msd = []
        self.upper = self.lower = None
        self.since_update = 0

    def _scale(self):
        span = self.hi - self.lo
        return np.where(span > 0, 1.0 / np.where(span > 0, span, 1.0), 0.0)

    def _msd(self, a, b, scale):
        # min-max normalisation cancels the offset: (a-lo)/r - (b-lo)/r = (a-b)/r
        return float((((a - b) * scale) ** 2).mean())

    def _calibrate(self, scale):
        ref = self.reference
        vals = [self._msd(ref, ref[self._rng.gen.permutation(len(ref))], scale)
                for _ in range(self.n_runs)]
        m, s = float(np.mean(vals)), float(np.std(vals))
        self.upper, self.lower = m + 2 * s, max(m - 2 * s, 0.0)

    def update(self, x) -> Signal:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_features,):
            raise InputError(f"expected {self.n_features} features, got shape {x.shape}")
        np.minimum(self.lo, x, out=self.lo)
        np.maximum(self.hi, x, out=self.hi)
        if self.filled < self.window:
            self.buf[self.filled] = x
            self.filled += 1
            if self.filled < self.window:
                return Signal.STABLE
        else:
            self.buf[self.head] = x
            self.head = (self.head + 1) % self.window
        current = np.concatenate((self.buf[self.head:], self.buf[:self.head]))
        scale = self._scale()
        if self.reference is None:
            self.reference = current
            self._calibrate(scale)
            return Signal.STABLE

        self.msd.append(self._msd(current, self.reference, scale))
        self.since_update += 1
        if self.since_update >= self.update_every and len(self.msd) >= 2:
            recent = self.msd[-self.history:]
            m, s = float(np.mean(recent)), float(np.std(recent))
            self.upper, self.lower = m + 2 * s, max(m - 2 * s, 0.0)
            self.since_update = 0

        last = self.msd[-self.consecutive:]
        if len(last) == self.consecutive and (
                all(v > self.upper for v in last) or all(v < self.lower for v in last)):
            self.reference = current
            self._calibrate(scale)
            self.msd = []
            self.since_update = 0
            return self._emit(Signal.DRIFT)
        return Signal.STABLE
