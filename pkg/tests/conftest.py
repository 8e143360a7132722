import numpy as np
import pytest

from curveot.curves import Curve2D
from curveot.measures import DiscreteMeasure


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_curve(rng, n, *, nonneg=True, id="c"):
    lo = 0.1 if nonneg else -5.0
    pts = rng.uniform(lo, 5.0, (n, 2))
    return Curve2D(points=pts, id=id)


def random_probability(rng, k):
    w = rng.uniform(0.05, 1.0, k)
    return DiscreteMeasure(w / w.sum())


def metric_cost(rng, k, dim=2):
    """Symmetric zero-diagonal cost satisfying the triangle inequality:
    pairwise distances of k random points."""
    pts = rng.uniform(0.0, 10.0, (k, dim))
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff**2).sum(-1))
