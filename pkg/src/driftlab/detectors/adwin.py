"""ADWIN: adaptive windowing over a bounded real-valued stream.

The window is an exponential histogram.  Level ``i`` holds buckets that each
summarise ``2**i`` consecutive values by their total and their sum of squared
deviations; a level holding more than ``max_buckets`` buckets merges its two
oldest into one bucket on the next level.  Every ``clock`` insertions the window
is tested at each bucket boundary W = W0 . W1 with

    eps_cut = sqrt(2 m v ln(2 ln(n) / delta)) + 2/3 m ln(2 ln(n) / delta),
    m = 1/(n0 - L + 1) + 1/(n1 - L + 1),

with v the window variance and L the minimum sub-window length.  While some
boundary has |mean(W0) - mean(W1)| > eps_cut the oldest bucket is dropped.
"""
from __future__ import annotations

import math

from ..errors import InputError
from .base import Detector, Signal


class ADWIN(Detector):
    kind = "ADWIN"

    def __init__(self, delta: float = 0.002, max_buckets: int = 5, clock: int = 32,
                 min_window_length: int = 5, grace_period: int = 10,
                 value_range=(0.0, 1.0)):
        if not 0.0 < delta < 1.0:
            raise InputError("delta must lie in (0, 1)")
        self.delta = delta
        self.max_buckets = max_buckets
        self.clock = clock
        self.min_window_length = min_window_length
        self.grace_period = grace_period
        self.value_range = value_range
        super().__init__()

    def reset(self):
        # levels[i] is a list of [total, variance] buckets of size 2**i, oldest first
        self.levels = [[]]
        self.width = 0
        self.total = 0.0
        self.variance = 0.0
        self.time = 0
        self.last_dropped = 0

    @property
    def estimation(self) -> float:
        return self.total / self.width if self.width else 0.0

    def window_variance(self) -> float:
        return self.variance / self.width if self.width else 0.0

    def n_buckets(self) -> int:
        return sum(len(level) for level in self.levels)

    def buckets(self):
        """``(size, total, variance)`` for every bucket, oldest first."""
        out = []
        for i in range(len(self.levels) - 1, -1, -1):
            for total, var in self.levels[i]:
                out.append((1 << i, total, var))
        return out

    # -- maintenance -----------------------------------------------------
    def _insert(self, value):
        self.width += 1
        if self.width > 1:
            mean_before = self.total / (self.width - 1)
            self.variance += (self.width - 1) * (value - mean_before) ** 2 / self.width
        self.total += value
        self.levels[0].append([value, 0.0])
        self._compress()

    def _compress(self):
        i = 0
        while i < len(self.levels) and len(self.levels[i]) > self.max_buckets:
            if i + 1 == len(self.levels):
                self.levels.append([])
            size = 1 << i
            (u1, v1), (u2, v2) = self.levels[i][0], self.levels[i][1]
            inc = size * size * (u1 / size - u2 / size) ** 2 / (2 * size)
            del self.levels[i][:2]
            self.levels[i + 1].append([u1 + u2, v1 + v2 + inc])
            i += 1

    def _drop_oldest(self) -> int:
        top = len(self.levels) - 1
        size = 1 << top
        u, v = self.levels[top].pop(0)
        rest = self.width - size
        if rest > 0:
            # exact removal of a sub-population: SS_rest = SS - SS_b - n_b W (mu_b - mu)^2 / rest
            self.variance -= v + size * self.width * (u / size - self.total / self.width) ** 2 / rest
        self.width -= size
        self.total -= u
        if self.width == 0:
            self.variance = 0.0
        while len(self.levels) > 1 and not self.levels[-1]:
            self.levels.pop()
        return size

    def _cut(self, n0, n1, mean_gap):
        n = self.width
        dd = math.log(2.0 * math.log(n) / self.delta)
        v = self.variance / n
        m = 1.0 / (n0 - self.min_window_length + 1) + 1.0 / (n1 - self.min_window_length + 1)
        eps = math.sqrt(2.0 * m * v * dd) + 2.0 / 3.0 * dd * m
        return abs(mean_gap) > eps

    def _detect(self) -> bool:
        changed = False
        reduce = True
        while reduce and self.width > self.min_window_length:
            reduce = False
            n0, n1 = 0, self.width
            u0, u1 = 0.0, self.total
            blist = self.buckets()
            for idx, (size, total, _) in enumerate(blist[:-1]):
                n0 += size
                n1 -= size
                u0 += total
                u1 -= total
                if n0 >= self.min_window_length and n1 >= self.min_window_length \
                        and self._cut(n0, n1, u0 / n0 - u1 / n1):
                    self.last_dropped += self._drop_oldest()
                    changed = reduce = True
                    break
        return changed

    # -- public ----------------------------------------------------------
    def update(self, value) -> Signal:
        value = float(value)
        lo, hi = self.value_range
        if not lo <= value <= hi:
            raise InputError(f"value {value} outside declared range [{lo}, {hi}]")
        self.last_dropped = 0
        self._insert(value)
        self.time += 1
        if self.time % self.clock == 0 and self.width >= self.grace_period:
            if self._detect():
                return self._emit(Signal.DRIFT)
        return Signal.STABLE
