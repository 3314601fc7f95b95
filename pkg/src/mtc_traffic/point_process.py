"""Homogeneous Poisson point processes on bounded planar windows."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from mtc_traffic.errors import ScenarioTooDenseError

# Largest expected count we are willing to materialise.  Above this the
# coordinate arrays alone would need tens of gigabytes.
MAX_EXPECTED_POINTS = 1e9


def _finite_point(p) -> tuple[float, float]:
    x, y = (float(v) for v in p)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"point coordinates must be finite, got {p!r}")
    return (x, y)


@dataclass(frozen=True)
class Disk:
    radius: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "center", _finite_point(self.center))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"disk radius must be positive and finite, got {self.radius}")

    def area(self) -> float:
        return math.pi * self.radius**2

    def contains(self, pts: np.ndarray) -> np.ndarray:
        d2 = np.sum((np.atleast_2d(pts) - self.center) ** 2, axis=1)
        return d2 <= self.radius**2

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _sample_radial(n, 0.0, self.radius, self.center, rng)


@dataclass(frozen=True)
class Annulus:
    r_inner: float
    r_outer: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "center", _finite_point(self.center))
        if not (math.isfinite(self.r_inner) and math.isfinite(self.r_outer)):
            raise ValueError("annulus radii must be finite")
        if not (self.r_outer > self.r_inner >= 0):
            raise ValueError(
                f"annulus needs r_outer > r_inner >= 0, got {self.r_inner}, {self.r_outer}"
            )

    def area(self) -> float:
        return math.pi * (self.r_outer**2 - self.r_inner**2)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        d2 = np.sum((np.atleast_2d(pts) - self.center) ** 2, axis=1)
        return (d2 >= self.r_inner**2) & (d2 <= self.r_outer**2)

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return _sample_radial(n, self.r_inner, self.r_outer, self.center, rng)


@dataclass(frozen=True)
class Rectangle:
    corner_min: tuple[float, float]
    corner_max: tuple[float, float]

    def __post_init__(self):
        lo = _finite_point(self.corner_min)
        hi = _finite_point(self.corner_max)
        if not (hi[0] > lo[0] and hi[1] > lo[1]):
            raise ValueError(f"corner_max {hi} must strictly dominate corner_min {lo}")
        object.__setattr__(self, "corner_min", lo)
        object.__setattr__(self, "corner_max", hi)

    @classmethod
    def centered_square(cls, side: float, center=(0.0, 0.0)) -> "Rectangle":
        h = side / 2.0
        return cls((center[0] - h, center[1] - h), (center[0] + h, center[1] + h))

    def area(self) -> float:
        return (self.corner_max[0] - self.corner_min[0]) * (
            self.corner_max[1] - self.corner_min[1]
        )

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        lo, hi = np.asarray(self.corner_min), np.asarray(self.corner_max)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        lo, hi = np.asarray(self.corner_min), np.asarray(self.corner_max)
        return lo + (hi - lo) * rng.random((n, 2))


Window = Union[Disk, Annulus, Rectangle]


def _sample_radial(n, r_in, r_out, center, rng):
    # inverse CDF of the radius for a uniform law on the annulus
    u = rng.random(n)
    r = np.sqrt(u * (r_out**2 - r_in**2) + r_in**2)
    theta = rng.random(n) * (2.0 * math.pi)
    pts = np.empty((n, 2))
    pts[:, 0] = center[0] + r * np.cos(theta)
    pts[:, 1] = center[1] + r * np.sin(theta)
    return pts


def area(window: Window) -> float:
    """Exact area of ``window`` in m^2."""
    return window.area()


@dataclass(frozen=True)
class PointRealization:
    """A sampled point set, shape ``(n, 2)``, together with its window."""

    points: np.ndarray
    window: Window
    density: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if not (math.isfinite(self.density) and self.density >= 0):
            raise ValueError(f"density must be finite and >= 0, got {self.density}")
        if self.density == 0 and len(pts):
            raise ValueError("a zero-density realization must be empty")

    def __len__(self) -> int:
        return len(self.points)

    @classmethod
    def empty(cls, window: Window, density: float = 0.0) -> "PointRealization":
        return cls(np.empty((0, 2)), window, density)


def expected_count(density: float, window: Window) -> float:
    return density * window.area()


def sample_ppp(
    density: float,
    window: Window,
    rng: np.random.Generator,
    fixed_count: int | None = None,
) -> PointRealization:
    """Sample a homogeneous PPP of intensity ``density`` on ``window``.

    The count is Poisson(density * area) and, given the count, points are
    i.i.d. uniform on the window.  Passing ``fixed_count`` switches to a
    binomial point process with exactly that many points.
    """
    density = float(density)
    if not math.isfinite(density) or density < 0:
        raise ValueError(f"density must be finite and >= 0, got {density}")
    mean = expected_count(density, window)
    if not math.isfinite(mean) or mean > MAX_EXPECTED_POINTS:
        raise ScenarioTooDenseError(
            f"scenario too dense: expected {mean:.3g} points in window of area "
            f"{window.area():.3g} m^2"
        )
    if fixed_count is not None:
        if fixed_count < 0:
            raise ValueError("fixed_count must be >= 0")
        if density == 0 and fixed_count > 0:
            raise ValueError("fixed_count > 0 requires a positive density")
        n = int(fixed_count)
    else:
        n = int(rng.poisson(mean)) if mean > 0 else 0
    return PointRealization(window.sample_uniform(n, rng), window, density)
