"""Per-device alarm probabilities from an event realization."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from mtc_traffic.atpf import AtpfSpec, CustomTableAtpf, tail_mass
from mtc_traffic.errors import TruncationImpossibleError
from mtc_traffic.point_process import Disk, PointRealization, Rectangle, Window

DEFAULT_EPSILON = 1e-6
TRUNCATION_HARD_CAP = 1e4
# -expm1(s) rounds to exactly 1.0 for s below about -37.4
SATURATED_LOG = -40.0
NEAREST_PREFILTER_K = 256
NEAREST_PREFILTER_MIN_EVENTS = 20_000


class EventWindowWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AlarmProbabilityField:
    per_device_p: np.ndarray
    truncation_radius: float
    truncation_error_bound: float
    warnings: tuple[str, ...] = ()

    def __len__(self):
        return len(self.per_device_p)


def _log_survival(d: np.ndarray, atpf: AtpfSpec) -> tuple[np.ndarray, np.ndarray]:
    """Row sums of log(1 - f(d)) and a mask of rows containing f(d) == 1."""
    f = atpf(d)
    certain = f >= 1.0
    with np.errstate(divide="ignore"):
        logs = np.log1p(-np.where(certain, 0.0, f))
    return logs.sum(axis=-1), certain.any(axis=-1)


def alarm_probability(device, events: PointRealization, atpf: AtpfSpec) -> float:
    """Probability that at least one event triggers the device at ``device``.

    Evaluated as ``1 - exp(sum log1p(-f(d)))``; any event with f(d) == 1
    makes the result exactly 1.
    """
    x = np.asarray(device, dtype=float).reshape(2)
    if len(events) == 0:
        return 0.0
    d = np.sqrt(np.sum((events.points - x) ** 2, axis=1))
    s, certain = _log_survival(d, atpf)
    if certain:
        return 1.0
    return float(-np.expm1(s))


def _tail_target(event_density: float, epsilon: float) -> float:
    return epsilon / (2.0 * math.pi * event_density)


def truncation_radius(atpf: AtpfSpec, event_density: float, epsilon: float = DEFAULT_EPSILON,
                      hard_cap: float = TRUNCATION_HARD_CAP) -> float:
    """Smallest r with ``2 pi lambda_E tail_mass(atpf, r) <= epsilon``, by bisection."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if not (math.isfinite(event_density) and event_density >= 0):
        raise ValueError(f"event density must be finite and >= 0, got {event_density}")
    if event_density == 0:
        return 0.0
    if isinstance(atpf, CustomTableAtpf) and not atpf.check_monotone:
        return float(atpf.r_cut)
    target = _tail_target(event_density, epsilon)
    if tail_mass(atpf, 0.0) <= target:
        return 0.0
    hi = min(atpf.support, hard_cap)
    if tail_mass(atpf, hi) > target:
        raise TruncationImpossibleError(
            f"truncation impossible: tail mass at {hi:g} m is {tail_mass(atpf, hi):.3g}, "
            f"needs <= {target:.3g}"
        )
    lo = 0.0
    # tail_mass is non-increasing, so bisection keeps tail(hi) <= target
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi or hi - lo < 1e-9 * max(1.0, hi):
            break
        if tail_mass(atpf, mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def required_event_window(cell: Disk, atpf: AtpfSpec, event_density: float,
                          epsilon: float = DEFAULT_EPSILON) -> Disk:
    """Event disk around ``cell`` large enough that omitted events cost at most ``epsilon``."""
    if not isinstance(cell, Disk):
        raise TypeError("cell must be a Disk")
    r = truncation_radius(atpf, event_density, epsilon)
    return Disk(cell.radius + r, cell.center)


def _omitted_bound(device_pts: np.ndarray, window: Window, atpf: AtpfSpec,
                   event_density: float) -> tuple[float, float]:
    """(radius of the clearance disk every device has inside ``window``, error bound)."""
    if event_density == 0 or len(device_pts) == 0:
        return math.inf, 0.0
    if isinstance(window, Disk):
        d = np.sqrt(np.sum((device_pts - window.center) ** 2, axis=1))
        clearance = float(np.min(window.radius - d))
    elif isinstance(window, Rectangle):
        lo, hi = np.asarray(window.corner_min), np.asarray(window.corner_max)
        clearance = float(np.min(np.minimum(device_pts - lo, hi - device_pts)))
    else:
        # annular event windows leave a hole, no clearance around the centre
        clearance = 0.0
    if clearance < 0:
        return clearance, math.inf
    return clearance, 2.0 * math.pi * event_density * tail_mass(atpf, clearance)


def field_for_realization(devices: PointRealization, events: PointRealization, atpf: AtpfSpec,
                          epsilon: float = DEFAULT_EPSILON) -> AlarmProbabilityField:
    """Alarm probability of every device given one event realization.

    The error bound is the expected alarm mass of events beyond the largest
    disk around each device that still lies inside the event window.  When it
    exceeds ``epsilon`` a warning is issued and recorded on the field.
    """
    n = len(devices)
    radius, bound = _omitted_bound(devices.points, events.window, atpf, events.density)
    notes = []
    if bound > epsilon * (1 + 1e-9):
        msg = (f"event window too small: omitted-event bound {bound:.3g} exceeds "
               f"epsilon {epsilon:.3g}")
        warnings.warn(msg, EventWindowWarning, stacklevel=2)
        notes.append(msg)
    if n == 0 or len(events) == 0:
        return AlarmProbabilityField(np.zeros(n), radius, bound, tuple(notes))
    x = devices.points
    y = events.points
    log_surv = np.zeros(n)
    certain = np.zeros(n, dtype=bool)
    active = np.arange(n)
    if len(y) > NEAREST_PREFILTER_MIN_EVENTS:
        # Nearest events alone often saturate a device in dense scenarios.
        # The result is unchanged: saturated devices get exactly 1.0 anyway.
        d_near, _ = cKDTree(y).query(x, k=NEAREST_PREFILTER_K)
        s_near, c_near = _log_survival(d_near, atpf)
        done = c_near | (s_near <= SATURATED_LOG)
        certain |= done
        active = active[~done]
    # Event chunks; a device whose log-survival is below SATURATED_LOG has
    # p == 1.0 exactly in double precision and needs no further events.
    step = max(256, 200_000 // max(n, 1))
    for j in range(0, len(y), step):
        blk = y[j:j + step]
        xa = x[active]
        d = np.sqrt((xa[:, None, 0] - blk[None, :, 0]) ** 2 + (xa[:, None, 1] - blk[None, :, 1]) ** 2)
        s, c = _log_survival(d, atpf)
        log_surv[active] += s
        certain[active] |= c
        keep = ~certain[active] & (log_surv[active] > SATURATED_LOG)
        active = active[keep]
        if len(active) == 0:
            break
    p = np.where(certain | (log_surv <= SATURATED_LOG), 1.0, -np.expm1(log_surv))
    return AlarmProbabilityField(p, radius, bound, tuple(notes))
