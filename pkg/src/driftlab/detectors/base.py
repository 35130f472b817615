from __future__ import annotations

import csv
import enum
from pathlib import Path


class Signal(enum.IntEnum):
    STABLE = 0
    WARNING = 1
    DRIFT = 2

    def __str__(self):
        return self.name.lower()


class Detector:
    """Incremental drift detector; ``update`` consumes one observation.

    Supervised detectors (``supervised = True``) are fed the wrapped model's
    correctness; unsupervised ones are fed feature vectors.  Emitting
    ``Signal.DRIFT`` always leaves the detector referenced on the new regime.
    """

    kind = "base"
    supervised = True

    def __init__(self):
        self.n_detections = 0
        self.n_warnings = 0
        self.reset()

    def reset(self):
        raise NotImplementedError

    def update(self, value) -> Signal:
        raise NotImplementedError

    def _emit(self, signal: Signal) -> Signal:
        if signal is Signal.DRIFT:
            self.n_detections += 1
        elif signal is Signal.WARNING:
            self.n_warnings += 1
        return signal


EVENT_FIELDS = ("t", "source", "event", "detail")


class EventLog:
    """Delimited record of detector emissions, resets and retrains for one run."""

    def __init__(self):
        self.rows = []

    def add(self, t: int, source: str, event: str, detail: str = ""):
        self.rows.append((int(t), source, event, detail))

    def count(self, event: str) -> int:
        return sum(1 for r in self.rows if r[2] == event)

    def write(self, path, cell: str = "", append: bool = False):
        path = Path(path)
        new = not (append and path.exists())
        with open(path, "a" if append else "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(("cell",) + EVENT_FIELDS)
            for row in self.rows:
                w.writerow((cell,) + row)


def read_events(path) -> list:
    with open(path, newline="") as fh:
        return [dict(r, t=int(r["t"])) for r in csv.DictReader(fh)]
