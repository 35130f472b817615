from pathlib import Path

import numpy as np
import pytest

from driftlab.core import Instance, StreamSchema

FIXTURES = Path(__file__).parent / "fixtures"


def labeled_stream(X, y, t0=0):
    return [Instance(t0 + t, X[t], int(y[t])) for t in range(len(y))]


def two_gaussians(n, rng, centre=5.0, d=2):
    """Alternating labels, class 0 at -centre and class 1 at +centre."""
    y = np.arange(n) % 2
    X = rng.normal(size=(n, d)) + np.where(y[:, None] == 1, centre, -centre)
    return labeled_stream(X, y)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def schema2():
    return StreamSchema.anonymous(2, 2)
