from .adwin import ADWIN
from .base import Detector, EventLog, Signal, read_events
from .d3 import D3, auc_score
from .ddm import DDM
from .ibdd import IBDD
from ..errors import ConfigError

DETECTOR_KINDS = ("DDM", "ADWIN", "D3-LR", "D3-HT", "IBDD")


def make_detector(kind: str, n_features: int, rng=None) -> Detector:
    """Detector with the package defaults for ``kind``."""
    if kind == "DDM":
        return DDM()
    if kind == "ADWIN":
        return ADWIN()
    if kind == "D3-LR":
        return D3(n_features, discriminator="lr", rng=rng)
    if kind == "D3-HT":
        return D3(n_features, discriminator="ht", rng=rng)
    if kind == "IBDD":
        return IBDD(n_features, rng=rng)
    raise ConfigError(f"unknown detector {kind!r}")


__all__ = ["ADWIN", "DDM", "D3", "IBDD", "Detector", "EventLog", "Signal", "auc_score",
           "make_detector", "read_events", "DETECTOR_KINDS"]
