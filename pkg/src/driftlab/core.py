"""Core data model: schemas, instances, windows and seeded randomness.

All randomness in the package flows through :class:`RngHandle`, which wraps
numpy's PCG64 bit generator (O'Neill's permuted congruential generator, 64-bit
output, 128-bit state).  Seeds for individual benchmark cells come from
:func:`derive_seed`, a BLAKE2b hash of the master seed and the cell ids.
"""
from __future__ import annotations

import bisect
import hashlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError

RNG_ALGORITHM = "PCG64"
_U64_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class StreamSchema:
    n_features: int
    feature_names: tuple
    class_labels: tuple

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_labels", tuple(self.class_labels))
        if self.n_features < 1:
            raise InputError("n_features must be >= 1")
        if len(self.feature_names) != self.n_features:
            raise InputError(
                f"{len(self.feature_names)} feature names for {self.n_features} features"
            )
        if len(set(self.class_labels)) != len(self.class_labels):
            raise InputError("class labels must be unique")

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    @classmethod
    def anonymous(cls, n_features: int, n_classes: int) -> "StreamSchema":
        """Schema with generated names ``x0..`` and labels ``0..``."""
        return cls(
            n_features,
            tuple(f"x{i}" for i in range(n_features)),
            tuple(str(c) for c in range(n_classes)),
        )

    def check_x(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_features,):
            raise InputError(f"expected {self.n_features} features, got shape {x.shape}")
        return x

    def check_y(self, y) -> int:
        if y is None or not 0 <= int(y) < self.n_classes or int(y) != y:
            raise InputError(f"invalid class id {y!r} for {self.n_classes} classes")
        return int(y)


@dataclass(frozen=True, eq=False)
class Instance:
    """One timestep of a stream.  ``x`` is stored read-only."""

    t: int
    x: np.ndarray
    y: Optional[int] = None

    def __post_init__(self):
        if self.t < 0:
            raise InputError("timestep must be non-negative")
        x = np.array(self.x, dtype=float)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self.t == other.t and self.y == other.y and np.array_equal(self.x, other.x)

    __hash__ = None


@dataclass(frozen=True)
class WindowSpec:
    i: int
    j: int
    k: Optional[int] = None

    def __post_init__(self):
        if not self.i < self.j:
            raise InputError(f"window requires i < j, got i={self.i}, j={self.j}")
        if self.k is not None and not self.i < self.k < self.j:
            raise InputError(f"partition requires i < k < j, got k={self.k}")


@dataclass(frozen=True)
class SampleWindow:
    spec: WindowSpec
    items: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        prev = None
        for inst in self.items:
            if not self.spec.i <= inst.t <= self.spec.j:
                raise InputError(f"instance t={inst.t} outside [{self.spec.i}, {self.spec.j}]")
            if prev is not None and inst.t < prev:
                raise InputError("window items must be ordered by timestep")
            prev = inst.t

    def __len__(self):
        return len(self.items)

    def values(self) -> np.ndarray:
        """Feature matrix of the window, shape (n, d)."""
        if not self.items:
            return np.empty((0, 0))
        return np.vstack([inst.x for inst in self.items])


class RngHandle:
    """Seeded PCG64 generator owned by exactly one component.

    ``child_seed`` draws a fresh 64-bit seed from this handle's own stream; it is
    how resettable learners and replicate streams get deterministic sub-seeds.
    """

    algorithm = RNG_ALGORITHM

    def __init__(self, seed: int):
        self.seed = int(seed) & _U64_MASK
        self.gen = np.random.Generator(np.random.PCG64(self.seed))

    def child_seed(self) -> int:
        return int(self.gen.integers(0, 2**64, dtype=np.uint64))

    def child(self) -> "RngHandle":
        return RngHandle(self.child_seed())

    def __repr__(self):
        return f"RngHandle(seed={self.seed}, algorithm={self.algorithm!r})"


def derive_seed(master_seed: int, model_id: str, dataset_id: str) -> int:
    """Deterministic 64-bit seed for one (model, dataset) cell.

    BLAKE2b with an 8-byte digest over ``"<master>\\x1f<model>\\x1f<dataset>"``,
    read big-endian.  The unit separator keeps ``("A-B", "C")`` and
    ``("A", "B-C")`` apart.
    """
    if not model_id or not dataset_id:
        raise InputError("model_id and dataset_id must be non-empty")
    payload = f"{int(master_seed) & _U64_MASK}\x1f{model_id}\x1f{dataset_id}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


def slice_window(stream: Sequence[Instance], spec: WindowSpec) -> SampleWindow:
    """Instances with ``spec.i <= t <= spec.j``; the stream must be ordered by t."""
    ts = [inst.t for inst in stream]
    lo = bisect.bisect_left(ts, spec.i)
    hi = bisect.bisect_right(ts, spec.j)
    return SampleWindow(WindowSpec(spec.i, spec.j), tuple(stream[lo:hi]))


def check_monotone(stream: Sequence[Instance]) -> None:
    """Raise if timesteps are not strictly increasing."""
    for a, b in zip(stream, stream[1:]):
        if b.t <= a.t:
            raise InputError(f"timesteps not strictly increasing at t={b.t}")


def stream_arrays(stream: Sequence[Instance]):
    """``(X, y)`` arrays for a labeled stream."""
    X = np.vstack([inst.x for inst in stream]) if stream else np.empty((0, 0))
    y = np.array([-1 if inst.y is None else inst.y for inst in stream], dtype=int)
    return X, y
