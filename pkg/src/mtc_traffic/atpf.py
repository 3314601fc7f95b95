"""Alarm-triggering probability functions (ATPFs).

An ATPF maps the distance between a device and an event epicentre to the
probability that the event pushes the device into alarm mode.  Besides
evaluation, the closed-form rate results need the first-moment integral
``I_f = int_0^inf f(r) r dr`` and the tail ``int_r0^inf f(r) r dr`` used to
truncate the event window.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from mtc_traffic.quadrature import integrate, integrate_to_infinity

QUAD_ABS_TOL = 1e-10
QUAD_TAIL_TOL = 1e-12


def _check_distance(d):
    arr = np.asarray(d, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("distance must be finite and >= 0")
    return arr


@dataclass(frozen=True)
class ExponentialAtpf:
    """f(d) = exp(-d / scale)."""

    scale: float = 1.0
    first_moment: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        object.__setattr__(self, "first_moment", self.scale**2)

    kind = "exponential"

    def __call__(self, d):
        return np.exp(-np.asarray(d, dtype=float) / self.scale)

    def tail(self, r0: float) -> float:
        # antiderivative of r exp(-r/s) is -s (r + s) exp(-r/s)
        s = self.scale
        return s * (r0 + s) * math.exp(-r0 / s)

    support = math.inf


@dataclass(frozen=True)
class DiskStepAtpf:
    """f(d) = level for d <= threshold, 0 beyond."""

    threshold: float
    level: float = 1.0
    first_moment: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.threshold) and self.threshold > 0):
            raise ValueError(f"threshold must be positive and finite, got {self.threshold}")
        if not 0 <= self.level <= 1:
            raise ValueError(f"level must be a probability, got {self.level}")
        object.__setattr__(self, "first_moment", self.level * self.threshold**2 / 2)

    kind = "disk_step"

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        return np.where(d <= self.threshold, self.level, 0.0)

    def tail(self, r0: float) -> float:
        if r0 >= self.threshold:
            return 0.0
        return self.level * (self.threshold**2 - r0**2) / 2

    @property
    def support(self) -> float:
        return self.threshold


@dataclass(frozen=True)
class CustomTableAtpf:
    """Piecewise-linear ATPF through ``(radii[i], values[i])``, zero past the last knot.

    Below the first knot the first value is held.  Tables must be
    non-increasing unless ``check_monotone=False``, in which case an explicit
    ``r_cut`` is required because the tail bound used for truncation assumes
    a decaying function.
    """

    radii: tuple[float, ...]
    values: tuple[float, ...]
    check_monotone: bool = True
    r_cut: float | None = None
    first_moment: float = field(init=False, repr=False)

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        values = tuple(float(v) for v in self.values)
        if len(radii) != len(values) or len(radii) < 1:
            raise ValueError("radii and values must be non-empty and of equal length")
        if not all(math.isfinite(r) for r in radii) or radii[0] < 0:
            raise ValueError("radii must be finite and >= 0")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly ascending")
        if any(not 0 <= v <= 1 for v in values):
            raise ValueError("table values must be probabilities in [0, 1]")
        if self.check_monotone:
            if any(b > a for a, b in zip(values, values[1:])):
                raise ValueError(
                    "table values must be non-increasing in radius "
                    "(pass check_monotone=False with an explicit r_cut to override)"
                )
        elif self.r_cut is None:
            raise ValueError("check_monotone=False requires an explicit r_cut")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "first_moment", self.tail(0.0))

    kind = "custom_table"

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        out = np.interp(d, self.radii, self.values)
        return np.where(d > self.radii[-1], 0.0, out)

    def tail(self, r0: float) -> float:
        # the integrand is piecewise quadratic, so K15 on each knot interval is exact
        lo = max(r0, 0.0)
        hi = self.radii[-1]
        if lo >= hi:
            return 0.0
        value, _ = integrate(
            lambda r: self(r) * r, lo, hi, abs_tol=QUAD_ABS_TOL, breakpoints=self.radii
        )
        return value

    @property
    def support(self) -> float:
        return self.radii[-1]


AtpfSpec = Union[ExponentialAtpf, DiskStepAtpf, CustomTableAtpf]


def evaluate(atpf: AtpfSpec, distance):
    """Probability that an event at ``distance`` (m) triggers an alarm."""
    d = _check_distance(distance)
    out = atpf(d)
    return float(out) if np.ndim(out) == 0 else out


def first_moment_integral(atpf: AtpfSpec) -> float:
    """``int_0^inf f(r) r dr`` in m^2."""
    return atpf.first_moment


def tail_mass(atpf: AtpfSpec, r0: float) -> float:
    """``int_r0^inf f(r) r dr`` in m^2."""
    if not (math.isfinite(r0) and r0 >= 0):
        raise ValueError(f"r0 must be finite and >= 0, got {r0}")
    return atpf.tail(r0)


def quadrature_tail_mass(atpf: AtpfSpec, r0: float = 0.0) -> float:
    """Tail integral by adaptive quadrature only, ignoring any closed form."""
    kinks = tuple(getattr(atpf, "radii", ())) + (
        (atpf.threshold,) if isinstance(atpf, DiskStepAtpf) else ()
    )
    if math.isfinite(atpf.support):
        value, _ = integrate(
            lambda r: atpf(r) * r, r0, max(atpf.support, r0),
            abs_tol=QUAD_ABS_TOL, breakpoints=kinks,
        )
        return value
    value, _ = integrate_to_infinity(
        lambda r: atpf(r) * r, r0, abs_tol=QUAD_ABS_TOL, tail_tol=QUAD_TAIL_TOL,
        breakpoints=kinks,
    )
    return value


def load_custom_table(path, check_monotone: bool = True, r_cut: float | None = None) -> CustomTableAtpf:
    """Read a two-column CSV ``radius_m,probability`` with a header row."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty ATPF table")
        if [h.strip() for h in header] != ["radius_m", "probability"]:
            raise ValueError(f"{path}: header must be 'radius_m,probability', got {header}")
        radii, values = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            radii.append(float(row[0]))
            values.append(float(row[1]))
    return CustomTableAtpf(tuple(radii), tuple(values), check_monotone=check_monotone, r_cut=r_cut)
