"""Monte Carlo orchestration: trials, experiments and parameter sweeps."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from mtc_traffic import rng as rngmod
from mtc_traffic.alarm_field import DEFAULT_EPSILON, field_for_realization, required_event_window
from mtc_traffic.analytics import (
    AcfEstimate,
    ClosedFormRate,
    approx_total_rate_markov,
    averaged_acf,
    expected_total_rate,
    sample_autocovariance,
)
from mtc_traffic.atpf import AtpfSpec, ExponentialAtpf
from mtc_traffic.errors import DegenerateSeriesError
from mtc_traffic.point_process import Disk, Rectangle, sample_ppp
from mtc_traffic.traffic_models import (
    TABLE1_RATES,
    MarkovParams,
    RateParams,
    alarm_counts_bernoulli,
    alarm_counts_markov,
    packetize,
)

log = logging.getLogger(__name__)

MODELS = ("bernoulli", "markov", "markov_matched")
WINDOW_POLICIES = ("auto", "fixed")


@dataclass(frozen=True)
class Scenario:
    """Full parameter set of one Monte Carlo experiment.

    ``model="markov_matched"`` runs the Markov chain with each device's
    ``q`` set to its own alarm probability, which reproduces the Bernoulli
    law.  ``event_window="fixed"`` simulates events on a square of side
    ``window_extent`` centred on the base station; ``"auto"`` uses the
    smallest disk whose omitted-event error is below ``epsilon``.
    """

    lambda_m: float = 0.1
    lambda_e: float = 1e-2
    cell_radius: float = 20.0
    rates: RateParams = TABLE1_RATES
    atpf: AtpfSpec = field(default_factory=lambda: ExponentialAtpf(1.0))
    model: str = "bernoulli"
    q: float | None = None
    n_slots: int = 200
    n_trials: int = 500
    event_window: str = "auto"
    epsilon: float = DEFAULT_EPSILON
    window_extent: float = 100.0
    seed: int = 0
    stream_id: int = 0
    device_count: int | None = None
    max_lag: int | None = None
    acf_convention: str = "trimmed"
    packetize: bool = False

    def __post_init__(self):
        for name in ("lambda_m", "lambda_e"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if not (math.isfinite(self.cell_radius) and self.cell_radius > 0):
            raise ValueError(f"cell_radius must be positive, got {self.cell_radius}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.model == "markov":
            if self.q is None:
                raise ValueError("the markov model needs q")
            MarkovParams(self.q)
        elif self.q is not None:
            MarkovParams(self.q)
        if int(self.n_slots) != self.n_slots or self.n_slots < 1:
            raise ValueError(f"n_slots must be >= 1, got {self.n_slots}")
        if int(self.n_trials) != self.n_trials or self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")
        if self.event_window not in WINDOW_POLICIES:
            raise ValueError(f"event_window must be one of {WINDOW_POLICIES}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not (math.isfinite(self.window_extent) and self.window_extent > 0):
            raise ValueError("window_extent must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.device_count is not None and self.device_count < 0:
            raise ValueError("device_count must be >= 0")
        if self.max_lag is not None and not 0 <= self.max_lag < self.n_slots - 1:
            raise ValueError("max_lag must satisfy 0 <= max_lag < n_slots - 1")
        if self.acf_convention not in ("trimmed", "textbook"):
            raise ValueError("acf_convention must be 'trimmed' or 'textbook'")

    @property
    def cell(self) -> Disk:
        return Disk(self.cell_radius)

    def event_window_shape(self):
        if self.event_window == "fixed":
            return Rectangle.centered_square(self.window_extent)
        return required_event_window(self.cell, self.atpf, self.lambda_e, self.epsilon)


@dataclass(frozen=True)
class RateSeries:
    values: np.ndarray
    trial_index: int
    n_devices: int = 0

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SummaryStats:
    mean_rate: float
    std_error: float
    n_trials: int
    n_slots: int
    scenario: Scenario | None = None
    axis_value: float | None = None
    closed_form: ClosedFormRate | None = None
    approx_markov: float | None = None
    acf: AcfEstimate | None = None
    stderr_defined: bool = True
    n_degenerate_acf: int = 0
    error: str | None = None


def run_trial(scenario: Scenario, trial_index: int, event_window=None) -> RateSeries:
    """One device/event realization and its per-slot total rate."""
    sc = scenario
    dev_rng = rngmod.trial_stream(sc.seed, sc.stream_id, trial_index, rngmod.Role.DEVICES)
    ev_rng = rngmod.trial_stream(sc.seed, sc.stream_id, trial_index, rngmod.Role.EVENTS)
    st_rng = rngmod.trial_stream(sc.seed, sc.stream_id, trial_index, rngmod.Role.STATES)
    devices = sample_ppp(sc.lambda_m, sc.cell, dev_rng, fixed_count=sc.device_count)
    window = event_window if event_window is not None else sc.event_window_shape()
    events = sample_ppp(sc.lambda_e, window, ev_rng)
    p = field_for_realization(devices, events, sc.atpf, sc.epsilon).per_device_p
    if sc.model == "bernoulli":
        counts = alarm_counts_bernoulli(p, sc.n_slots, st_rng)
    elif sc.model == "markov":
        counts = alarm_counts_markov(p, sc.q, sc.n_slots, st_rng)
    else:
        counts = alarm_counts_markov(p, p, sc.n_slots, st_rng)
    n = len(devices)
    rr, ra = sc.rates.rate_regular, sc.rates.rate_alarm
    rates = (n - counts) * rr + counts * ra
    if sc.packetize:
        rates = packetize(rates, rngmod.trial_stream(sc.seed, sc.stream_id, trial_index,
                                                    rngmod.Role.EXTRA)).astype(float)
    return RateSeries(np.asarray(rates, dtype=float), trial_index, n)


def _trial_summary(args):
    scenario, trial_index, window = args
    series = run_trial(scenario, trial_index, window)
    acf = None
    if scenario.max_lag is not None:
        try:
            acf = sample_autocovariance(series, scenario.max_lag, scenario.acf_convention)
        except DegenerateSeriesError:
            acf = None
    return math.fsum(series.values) / len(series), acf


def run_experiment(scenario: Scenario, workers: int = 1) -> SummaryStats:
    """Average the time-mean total rate over ``n_trials`` independent trials.

    Trials may run in a process pool; results are reduced in trial order so
    the output does not depend on ``workers``.
    """
    sc = scenario
    window = sc.event_window_shape()
    jobs = [(sc, t, window) for t in range(sc.n_trials)]
    if workers > 1 and sc.n_trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial_summary, jobs, chunksize=max(1, sc.n_trials // (4 * workers))))
    else:
        results = [_trial_summary(j) for j in jobs]
    means = np.array([m for m, _ in results])
    mean = math.fsum(means) / len(means)
    if len(means) > 1:
        std_error = float(np.std(means, ddof=1)) / math.sqrt(len(means))
        defined = True
    else:
        std_error, defined = 0.0, False
    acf = None
    n_degenerate = 0
    if sc.max_lag is not None:
        ests = [a for _, a in results if a is not None]
        n_degenerate = len(results) - len(ests)
        if n_degenerate:
            log.warning("%d of %d trials had a constant rate series and were left out of the ACF",
                        n_degenerate, len(results))
        if ests:
            acf = averaged_acf(ests)
    closed = expected_total_rate(sc.lambda_m, sc.lambda_e, sc.cell_radius, sc.rates, sc.atpf)
    approx = None
    if sc.q is not None:
        approx = approx_total_rate_markov(sc.lambda_m, sc.lambda_e, sc.cell_radius, sc.rates,
                                          sc.atpf, MarkovParams(sc.q))
    return SummaryStats(
        mean_rate=mean, std_error=std_error, n_trials=sc.n_trials, n_slots=sc.n_slots,
        scenario=sc, closed_form=closed, approx_markov=approx, acf=acf,
        stderr_defined=defined, n_degenerate_acf=n_degenerate,
    )


SWEEP_AXES = ("lambda_e", "q")


def sweep(template: Scenario, axis: str, values: Sequence[float], workers: int = 1) -> list[SummaryStats]:
    """One experiment per value of ``axis``; point ``i`` uses stream offset ``i``.

    A point that fails validation or simulation is returned with ``error``
    set and NaN statistics; the remaining points still run.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    out = []
    for i, v in enumerate(values):
        try:
            sc = replace(template, **{axis: float(v)}, stream_id=template.stream_id + i)
            stats = run_experiment(sc, workers=workers)
            out.append(replace(stats, axis_value=float(v)))
        except (ValueError, ArithmeticError) as exc:
            log.error("sweep point %s=%r failed: %s", axis, v, exc)
            out.append(SummaryStats(math.nan, math.nan, template.n_trials, template.n_slots,
                                    axis_value=float(v), stderr_defined=False, error=str(exc)))
    return out
