"""Adaptation strategies wrapped around a base learner.

``AdaptiveModel.step`` runs one prequential round: predict, reveal the label,
then apply the strategy hook.  Strategies:

* ``none``            learn every instance.
* ``detect_reset``    learn, feed the detector (correctness for DDM/ADWIN,
                      features for D3/IBDD), reset the learner on drift.
* ``periodic_reset``  learn, and reset after every ``reset_n``-th instance.
* ``batch``           buffer instances and refit a random forest on schedule:
                      ``static`` once on the first ``static_n``; ``reset`` every
                      ``retrain_n`` on the last ``retrain_n``; ``incremental``
                      every ``retrain_n`` on everything seen.

Before its first fit a batch model either predicts with a running majority
class (``cold``, scored) or withholds predictions (``warm``, not scored).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Instance, RngHandle, StreamSchema
from .datasets import schedule_for
from .detectors import EventLog, Signal, make_detector
from .errors import ConfigError, ProtocolError
from .learners import ForestConfig, make_learner, rf_fit

STRATEGIES = ("none", "detect_reset", "periodic_reset", "batch")
REGIMES = ("static", "reset", "incremental")


@dataclass
class AdaptiveConfig:
    learner: str
    strategy: str = "none"
    detector: Optional[str] = None
    reset_n: Optional[int] = None
    regime: Optional[str] = None
    retrain_n: Optional[int] = None
    start: Optional[str] = None
    static_n: int = 100
    forest: ForestConfig = field(default_factory=ForestConfig)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "detect_reset" and not self.detector:
            raise ConfigError("detect_reset needs a detector")
        if self.strategy == "periodic_reset" and not (self.reset_n and self.reset_n >= 1):
            raise ConfigError("periodic_reset needs reset_n >= 1")
        if self.strategy == "batch":
            if self.regime not in REGIMES:
                raise ConfigError(f"batch regime must be one of {REGIMES}")
            if self.regime != "static" and not (self.retrain_n and self.retrain_n >= 1):
                raise ConfigError("batch regimes need retrain_n >= 1")
            if self.static_n < 1:
                raise ConfigError("static_n must be >= 1")
            self.start = self.start or "cold"
            if self.start not in ("warm", "cold"):
                raise ConfigError("start mode must be warm or cold")
        elif self.start is not None:
            raise ConfigError("start mode applies to batch strategies only")

    @property
    def first_fit_at(self) -> Optional[int]:
        if self.strategy != "batch":
            return None
        return self.static_n if self.regime == "static" else self.retrain_n


@dataclass
class StepResult:
    prediction: Optional[int]
    signal: Optional[Signal] = None


class AdaptiveModel:
    def __init__(self, config: AdaptiveConfig, schema: StreamSchema, seed: int = 0):
        self.config = config
        self.schema = schema
        self.rng = RngHandle(seed)
        self.counter = 0
        self.events = EventLog()
        self.learner = None
        self.detector = None
        self.forest = None
        self.buffer = None
        self.n_resets = 0
        self.n_fits = 0
        if config.strategy == "batch":
            if config.regime == "reset":
                self.buffer = deque(maxlen=config.retrain_n)
            else:
                self.buffer = []
            self._cold_counts = np.zeros(schema.n_classes)
        else:
            self.learner = make_learner(config.learner, schema, self.rng.child())
            if config.strategy == "detect_reset":
                self.detector = make_detector(config.detector, schema.n_features, self.rng.child())

    # -- prediction ------------------------------------------------------
    def predict(self, x) -> Optional[int]:
        if self.config.strategy != "batch":
            return self.learner.predict_one(x)[0]
        if self.forest is not None:
            return self.forest.predict_one(x)[0]
        if self.config.start == "warm":
            return None
        self.schema.check_x(x)
        return int(np.argmax(self._cold_counts))

    # -- one prequential round -------------------------------------------
    def step(self, inst: Instance) -> StepResult:
        if inst.y is None:
            raise ProtocolError(f"instance t={inst.t} is unlabeled")
        pred = self.predict(inst.x)
        y = self.schema.check_y(inst.y)
        self.counter += 1
        signal = None
        strategy = self.config.strategy
        if strategy == "batch":
            self._batch_hook(inst)
        else:
            self.learner.learn_one(inst.x, y)
            if strategy == "detect_reset":
                value = (pred == y) if self.detector.supervised else inst.x
                signal = self.detector.update(value)
                if signal is not Signal.STABLE:
                    self.events.add(inst.t, self.detector.kind, str(signal))
                if signal is Signal.DRIFT:
                    self._reset(inst.t)
            elif strategy == "periodic_reset" and self.counter % self.config.reset_n == 0:
                self._reset(inst.t)
        return StepResult(pred, signal)

    def _reset(self, t):
        self.learner.reset()
        self.n_resets += 1
        self.events.add(t, self.config.learner, "reset")

    def _batch_hook(self, inst):
        cfg = self.config
        self.buffer.append(inst)
        self._cold_counts[inst.y] += 1
        if cfg.regime == "static":
            due = self.counter == cfg.static_n
        else:
            due = self.counter % cfg.retrain_n == 0
        if due:
            self.forest = rf_fit(list(self.buffer), self.schema, cfg.forest, self.rng)
            self.n_fits += 1
            self.events.add(inst.t, "RF", "retrain", f"n={len(self.buffer)}")
            if cfg.regime == "static":
                self.buffer = []

    @property
    def training_size(self) -> int:
        return self.forest.n_train if self.forest is not None else 0


# -- technique registry ------------------------------------------------------

TECHNIQUES = (
    "LC", "MC",
    "NB", "DDM-NB", "ADWIN-NB", "R-NB", "D3-LR-NB", "D3-HT-NB", "IBDD-NB",
    "HT", "DDM-HT", "ADWIN-HT", "R-HT", "D3-LR-HT", "D3-HT-HT", "IBDD-HT",
    "ARF", "S-RF", "R-RF", "I-RF",
)

_DETECTOR_PREFIXES = ("DDM", "ADWIN", "D3-LR", "D3-HT", "IBDD")


def technique_config(technique: str, dataset_id: str = "", start: str = "cold",
                     forest: Optional[ForestConfig] = None) -> AdaptiveConfig:
    """``AdaptiveConfig`` for a technique id, using the dataset's reset/retrain cadence."""
    reset_n, retrain_n = schedule_for(dataset_id)
    forest = forest or ForestConfig()
    if technique in ("LC", "MC", "NB", "HT", "ARF"):
        return AdaptiveConfig(technique)
    if technique in ("R-NB", "R-HT"):
        return AdaptiveConfig(technique[2:], "periodic_reset", reset_n=reset_n)
    if technique in ("S-RF", "R-RF", "I-RF"):
        regime = {"S": "static", "R": "reset", "I": "incremental"}[technique[0]]
        return AdaptiveConfig("RF", "batch", regime=regime, retrain_n=retrain_n,
                              start=start, forest=forest)
    for prefix in _DETECTOR_PREFIXES:
        base = technique[len(prefix) + 1:]
        if technique.startswith(prefix + "-") and base in ("NB", "HT"):
            return AdaptiveConfig(base, "detect_reset", detector=prefix)
    raise ConfigError(f"unknown technique {technique!r}")
