from __future__ import annotations

import math

from .base import Detector, Signal


class DDM(Detector):
    """Drift Detection Method over a Bernoulli error stream.

    Tracks the running error rate p and its standard deviation s.  After
    ``min_instances`` observations the best level (p_min, s_min) is the one
    minimising p + s; warning when p + s exceeds p_min + 2 s_min, drift when it
    exceeds p_min + 3 s_min.  Comparisons are strict so a flawless stream, where
    every quantity is zero, never alarms.
    """

    kind = "DDM"

    def __init__(self, min_instances: int = 30, warning_level: float = 2.0,
                 drift_level: float = 3.0):
        self.min_instances = min_instances
        self.warning_level = warning_level
        self.drift_level = drift_level
        super().__init__()

    def reset(self):
        self.n = 0
        self.p = 0.0
        self.s = 0.0
        self.p_min = math.inf
        self.s_min = math.inf

    def update(self, correct) -> Signal:
        err = 0.0 if correct else 1.0
        self.n += 1
        self.p += (err - self.p) / self.n
        self.s = math.sqrt(self.p * (1.0 - self.p) / self.n)
        if self.n < self.min_instances:
            return Signal.STABLE
        level = self.p + self.s
        if level <= self.p_min + self.s_min:
            self.p_min, self.s_min = self.p, self.s
        if level > self.p_min + self.drift_level * self.s_min:
            self.reset()
            return self._emit(Signal.DRIFT)
        if level > self.p_min + self.warning_level * self.s_min:
            return self._emit(Signal.WARNING)
        return Signal.STABLE
