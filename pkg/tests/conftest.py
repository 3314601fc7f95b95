import numpy as np
import pytest

from mtc_traffic.rng import stream


@pytest.fixture
def rng():
    return stream(20240101, 0)


def within_se(estimate, truth, se, k=4.0):
    return abs(estimate - truth) <= k * se


def sample_mean_se(x):
    x = np.asarray(x, dtype=float)
    return x.mean(), x.std(ddof=1) / np.sqrt(len(x))
