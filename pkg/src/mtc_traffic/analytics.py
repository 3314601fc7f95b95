"""Closed-form expected rates and the sample autocovariance estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mtc_traffic.atpf import AtpfSpec, first_moment_integral
from mtc_traffic.errors import DegenerateSeriesError
from mtc_traffic.traffic_models import MarkovParams, RateParams


@dataclass(frozen=True)
class ClosedFormRate:
    """Expected total rate and its parts.

    ``value = alarm_term + regular_term`` where the terms are the expected
    alarm and regular traffic, and ``device_mass`` is the expected device
    count in the cell.
    """

    value: float
    device_mass: float
    alarm_term: float
    regular_term: float


def _check_inputs(lambda_m, lambda_e, cell_radius):
    for name, v in (("lambda_m", lambda_m), ("lambda_e", lambda_e)):
        if math.isnan(v) or v < 0:
            raise ValueError(f"{name} must be >= 0, got {v}")
    if not lambda_m < math.inf:
        raise ValueError("lambda_m must be finite")
    if not (math.isfinite(cell_radius) and cell_radius > 0):
        raise ValueError(f"cell_radius must be positive and finite, got {cell_radius}")


def mean_alarm_probability(lambda_e: float, atpf: AtpfSpec) -> float:
    """Alarm probability of a typical device averaged over events, ``1 - exp(-2 pi lambda_E I_f)``.

    ``lambda_e = math.inf`` gives the saturation limit.
    """
    if math.isnan(lambda_e) or lambda_e < 0:
        raise ValueError(f"lambda_e must be >= 0, got {lambda_e}")
    i_f = first_moment_integral(atpf)
    if math.isinf(lambda_e):
        return 1.0 if i_f > 0 else 0.0
    return -math.expm1(-2.0 * math.pi * lambda_e * i_f)


def expected_total_rate(lambda_m: float, lambda_e: float, cell_radius: float,
                        rates: RateParams, atpf: AtpfSpec) -> ClosedFormRate:
    """Expected total Bernoulli-model rate, averaged over devices and events.

    ``lambda_M pi R^2 (R_A + (R_R - R_A) exp(-2 pi lambda_E I_f))``.
    ``lambda_e`` may be ``math.inf`` for the alarm-saturation limit.
    """
    _check_inputs(lambda_m, lambda_e, cell_radius)
    mass = lambda_m * math.pi * cell_radius**2
    p_bar = mean_alarm_probability(lambda_e, atpf)
    alarm = mass * p_bar * rates.rate_alarm
    regular = mass * (1.0 - p_bar) * rates.rate_regular
    return ClosedFormRate(alarm + regular, mass, alarm, regular)


def approx_total_rate_markov(lambda_m: float, lambda_e: float, cell_radius: float,
                             rates: RateParams, atpf: AtpfSpec, mp: MarkovParams) -> float:
    """Steady-state approximation of the Markov-model total rate.

    Every device's alarm probability is replaced by the mean one before
    taking the chain's stationary law.  Because the stationary alarm
    probability is concave in p, this over-estimates the true mean when
    ``R_A > R_R``.
    """
    _check_inputs(lambda_m, lambda_e, cell_radius)
    mass = lambda_m * math.pi * cell_radius**2
    p_bar = mean_alarm_probability(lambda_e, atpf)
    q = mp.q
    denom = 1.0 + p_bar - q
    return mass * (p_bar / denom * rates.rate_alarm + (1.0 - q) / denom * rates.rate_regular)


@dataclass(frozen=True)
class AcfEstimate:
    """Normalized autocovariance at ``lags``; ``stderr`` is across trials when averaged."""

    lags: np.ndarray
    values: np.ndarray
    n_trials: int
    n_slots: int
    stderr: np.ndarray | None = None

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=np.int64)
        if len(lags) == 0 or lags[0] != 0 or np.any(np.diff(lags) <= 0):
            raise ValueError("lags must start at 0 and be strictly increasing")
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def at(self, lag: int) -> float:
        return float(self.values[int(np.searchsorted(self.lags, lag))])


def sample_autocovariance(series, max_lag: int, convention: str = "trimmed") -> AcfEstimate:
    """Per-trial normalized sample autocovariance for lags ``0..max_lag``.

    With ``convention="trimmed"`` lag ``k`` sums ``N_S - k - 1`` products
    (``i = 1 .. N_S - k - 1``, 1-based) and divides by ``(N_S - k)``;
    ``"textbook"`` sums all ``N_S - k`` products.  The variance estimate uses
    denominator ``N_S - 1``.
    """
    x = np.asarray(getattr(series, "values", series), dtype=float)
    n = len(x)
    if max_lag < 0 or n <= max_lag + 1:
        raise ValueError(f"series of length {n} too short for max_lag={max_lag}")
    if convention not in ("trimmed", "textbook"):
        raise ValueError(f"unknown convention {convention!r}")
    mu = x.mean()
    var = x.var(ddof=1)
    # a constant series can still give a rounding-level variance
    if not var > 0 or np.ptp(x) == 0:
        raise DegenerateSeriesError("degenerate series: sample variance is zero")
    c = x - mu
    drop = 1 if convention == "trimmed" else 0
    vals = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        m = n - k - drop
        vals[k] = np.dot(c[:m], c[k:k + m]) / ((n - k) * var)
    return AcfEstimate(np.arange(max_lag + 1), vals, 1, n)


def averaged_acf(per_trial: Sequence[AcfEstimate]) -> AcfEstimate:
    """Pointwise mean of per-trial estimates, with the standard error across them."""
    if not per_trial:
        raise ValueError("need at least one ACF estimate")
    first = per_trial[0]
    for est in per_trial[1:]:
        if not np.array_equal(est.lags, first.lags) or est.n_slots != first.n_slots:
            raise ValueError("ACF estimates have mismatched lag grids or series lengths")
    weights = np.array([e.n_trials for e in per_trial], dtype=float)
    stack = np.stack([e.values for e in per_trial])
    mean = (weights[:, None] * stack).sum(axis=0) / weights.sum()
    if len(per_trial) == 1:
        stderr = first.stderr
    else:
        stderr = stack.std(axis=0, ddof=1) / math.sqrt(len(per_trial))
    return AcfEstimate(first.lags, mean, int(weights.sum()), first.n_slots, stderr)
