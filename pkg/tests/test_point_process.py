import math

import numpy as np
import pytest
from scipy import stats

from mtc_traffic.errors import ScenarioTooDenseError
from mtc_traffic.point_process import Annulus, Disk, PointRealization, Rectangle, area, sample_ppp
from mtc_traffic.rng import stream


def test_area_closed_forms():
    assert area(Disk(20)) == pytest.approx(400 * math.pi)
    assert area(Disk(20)) == pytest.approx(1256.64, abs=5e-3)
    assert area(Rectangle((0, 0), (100, 100))) == 1e4
    assert area(Annulus(20, 60)) == pytest.approx(3200 * math.pi)


@pytest.mark.parametrize("bad", [
    lambda: Disk(0),
    lambda: Disk(-1),
    lambda: Disk(math.inf),
    lambda: Annulus(5, 5),
    lambda: Annulus(-1, 5),
    lambda: Rectangle((0, 0), (0, 1)),
    lambda: Rectangle((0, 0), (1, math.nan)),
])
def test_invalid_windows_rejected(bad):
    with pytest.raises(ValueError):
        bad()


def test_zero_density_is_empty(rng):
    r = sample_ppp(0.0, Disk(20), rng)
    assert len(r) == 0
    assert r.points.shape == (0, 2)


def test_rejects_bad_density(rng):
    for d in (-0.1, math.nan, math.inf):
        with pytest.raises(ValueError):
            sample_ppp(d, Disk(20), rng)


def test_too_dense(rng):
    with pytest.raises(ScenarioTooDenseError):
        sample_ppp(1e12, Disk(1000), rng)


def test_zero_density_realization_must_be_empty():
    with pytest.raises(ValueError):
        PointRealization(np.zeros((1, 2)), Disk(1), 0.0)


@pytest.mark.parametrize("window", [Disk(20, (3, -2)), Annulus(20, 60), Rectangle((0, 0), (100, 50))])
def test_points_inside_window(window, rng):
    r = sample_ppp(0.05, window, rng)
    assert len(r) > 0
    assert window.contains(r.points).all()


def _counts(density, window, n, seed):
    g = stream(seed, 1)
    return np.array([len(sample_ppp(density, window, g)) for _ in range(n)])


@pytest.mark.parametrize("density, window, mean", [
    (0.1, Disk(20), 125.66370614359172),
    (0.01, Annulus(20, 60), 100.5309649148734),
])
def test_count_is_poisson(density, window, mean):
    c = _counts(density, window, 10_000, seed=7)
    se = c.std(ddof=1) / math.sqrt(len(c))
    assert abs(c.mean() - mean) <= 4 * se
    assert abs(c.var(ddof=1) - c.mean()) <= 0.1 * c.mean()


def test_uniform_equal_area_halves():
    # inner disk of radius R/sqrt(2) and the surrounding annulus have equal area
    R = 20.0
    g = stream(11, 2)
    inner = outer = 0
    for _ in range(10_000):
        pts = sample_ppp(0.01, Disk(R), g).points
        r2 = np.sum(pts**2, axis=1)
        k = int(np.sum(r2 <= R**2 / 2))
        inner += k
        outer += len(pts) - k
    p = stats.chisquare([inner, outer]).pvalue
    assert p > 1e-3


def test_uniform_angular_halves():
    g = stream(12, 2)
    pts = np.concatenate([sample_ppp(0.01, Disk(20), g).points for _ in range(2000)])
    upper = int(np.sum(pts[:, 1] > 0))
    assert stats.chisquare([upper, len(pts) - upper]).pvalue > 1e-3


def test_deterministic_given_seed():
    a = sample_ppp(0.1, Disk(20), stream(5, 1, 2, 3))
    b = sample_ppp(0.1, Disk(20), stream(5, 1, 2, 3))
    c = sample_ppp(0.1, Disk(20), stream(5, 1, 2, 4))
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points) or len(a) == 0


def test_fixed_count_mode(rng):
    r = sample_ppp(0.1, Disk(20), rng, fixed_count=37)
    assert len(r) == 37
