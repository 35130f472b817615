from ..core import RngHandle, StreamSchema
from ..errors import ConfigError
from .arf import AdaptiveRandomForest, ARFConfig
from .base import LastClass, Learner, MajorityClass
from .forest import ForestConfig, ForestModel, rf_fit
from .hoeffding import HoeffdingTree, HTConfig, hoeffding_bound
from .naive_bayes import GaussianNB

LEARNER_KINDS = ("LC", "MC", "NB", "HT", "ARF")


def make_learner(kind: str, schema: StreamSchema, rng: RngHandle = None) -> Learner:
    if kind == "LC":
        return LastClass(schema)
    if kind == "MC":
        return MajorityClass(schema)
    if kind == "NB":
        return GaussianNB(schema)
    if kind == "HT":
        return HoeffdingTree(schema)
    if kind == "ARF":
        return AdaptiveRandomForest(schema, rng or RngHandle(0))
    raise ConfigError(f"unknown learner kind {kind!r}")


__all__ = [
    "AdaptiveRandomForest", "ARFConfig", "ForestConfig", "ForestModel", "GaussianNB",
    "HoeffdingTree", "HTConfig", "LastClass", "Learner", "MajorityClass", "hoeffding_bound",
    "make_learner", "rf_fit", "LEARNER_KINDS",
]
