"""Per-device state processes: i.i.d. Bernoulli and the two-state Markov chain.

States are ordered (Regular, Alarm) everywhere; in arrays ``True`` means
Alarm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class DeviceState(enum.IntEnum):
    REGULAR = 0
    ALARM = 1


@dataclass(frozen=True)
class RateParams:
    rate_regular: float
    rate_alarm: float

    def __post_init__(self):
        for name in ("rate_regular", "rate_alarm"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


TABLE1_RATES = RateParams(rate_regular=0.01, rate_alarm=1.0)


@dataclass(frozen=True)
class MarkovParams:
    """Alarm self-transition probability ``q``; q = 1 would make alarm absorbing."""

    q: float

    def __post_init__(self):
        if not (math.isfinite(self.q) and 0 <= self.q < 1):
            raise ValueError(
                f"q must satisfy 0 <= q < 1, got {self.q}; q = 1 makes the alarm state "
                "absorbing so the chain is not ergodic and has no unique steady state"
            )


@dataclass(frozen=True)
class StateSequence:
    states: np.ndarray  # bool, True = Alarm
    device_index: int = 0

    def __post_init__(self):
        s = np.asarray(self.states, dtype=bool)
        if s.ndim != 1 or len(s) < 1:
            raise ValueError("a state sequence needs at least one slot")
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, k) -> DeviceState:
        return DeviceState(int(self.states[k]))

    def alarm_fraction(self) -> float:
        return float(self.states.mean())


def _check_p(p, name="p"):
    if not (math.isfinite(p) and 0 <= p <= 1):
        raise ValueError(f"{name} must be a probability in [0, 1], got {p}")


def _check_slots(n_slots):
    if int(n_slots) != n_slots or n_slots < 1:
        raise ValueError(f"n_slots must be an integer >= 1, got {n_slots}")


def sample_bernoulli_states(p: float, n_slots: int, rng: np.random.Generator,
                            device_index: int = 0) -> StateSequence:
    """Each slot is Alarm independently with probability ``p``."""
    _check_p(p)
    _check_slots(n_slots)
    return StateSequence(rng.random(int(n_slots)) < p, device_index)


def markov_transition_matrix(p: float, mp: MarkovParams) -> np.ndarray:
    """Row-stochastic matrix ``[[1-p, p], [1-q, q]]``, rows (Regular, Alarm)."""
    _check_p(p)
    q = mp.q
    return np.array([[1.0 - p, p], [1.0 - q, q]])


def steady_state(p: float, mp: MarkovParams) -> tuple[float, float]:
    """Stationary ``(pi_A, pi_R)`` of the chain."""
    _check_p(p)
    return _steady_alarm(p, mp.q), (1.0 - mp.q) / (1.0 + p - mp.q)


def _steady_alarm(p, q):
    denom = 1.0 + p - q
    return p / denom if denom > 0 else 0.0


def _markov_runs(p: float, q: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """One stationary chain path of length ``n`` built from alternating sojourns.

    Regular sojourns are Geometric(p), alarm sojourns Geometric(1 - q); a zero
    leaving probability gives a sojourn covering the rest of the horizon.
    """
    alarm = rng.random() < _steady_alarm(p, q)
    leave_r, leave_a = p, 1.0 - q
    if (alarm and leave_a == 0) or (not alarm and leave_r == 0):
        return np.full(n, alarm)
    mean_cycle = (1.0 / leave_r if leave_r > 0 else n) + (1.0 / leave_a if leave_a > 0 else n)
    lengths = []
    total = 0
    first = alarm
    while total < n:
        m = int((n - total) / mean_cycle + 4.0 * math.sqrt((n - total) / mean_cycle) + 4)
        a_len = rng.geometric(leave_a, m) if leave_a > 0 else np.full(m, n, dtype=np.int64)
        r_len = rng.geometric(leave_r, m) if leave_r > 0 else np.full(m, n, dtype=np.int64)
        # sojourns past the horizon are cut anyway; clipping avoids int64 overflow
        a_len = np.minimum(a_len, n)
        r_len = np.minimum(r_len, n)
        pair = np.empty(2 * m, dtype=np.int64)
        if first:
            pair[0::2], pair[1::2] = a_len, r_len
        else:
            pair[0::2], pair[1::2] = r_len, a_len
        lengths.append(pair)
        total += int(pair.sum())
    runs = np.concatenate(lengths)
    ends = np.cumsum(runs)
    k = int(np.searchsorted(ends, n)) + 1
    runs = runs[:k]
    runs[-1] -= int(ends[k - 1]) - n
    labels = np.zeros(k, dtype=bool)
    start = 0 if alarm else 1
    labels[start::2] = True
    return np.repeat(labels, runs)


def sample_markov_states(p: float, mp: MarkovParams, n_slots: int, rng: np.random.Generator,
                         device_index: int = 0) -> StateSequence:
    """Stationary two-state chain path; S(0) is drawn from the steady state."""
    _check_p(p)
    _check_slots(n_slots)
    return StateSequence(_markov_runs(p, mp.q, int(n_slots), rng), device_index)


def alarm_counts_bernoulli(p: np.ndarray, n_slots: int, rng: np.random.Generator) -> np.ndarray:
    """Number of devices in alarm per slot, devices i.i.d. Bernoulli(p_x)."""
    p = np.asarray(p, dtype=float)
    if len(p) == 0:
        return np.zeros(n_slots, dtype=np.int64)
    counts = np.zeros(n_slots, dtype=np.int64)
    # bounded block of devices per draw keeps memory flat for long horizons
    step = max(1, 2_000_000 // n_slots)
    for i in range(0, len(p), step):
        blk = p[i:i + step]
        counts += (rng.random((len(blk), n_slots)) < blk[:, None]).sum(axis=0)
    return counts


def alarm_counts_markov(p: np.ndarray, q, n_slots: int, rng: np.random.Generator) -> np.ndarray:
    """Number of devices in alarm per slot under independent stationary chains.

    ``q`` is a scalar or one value per device.
    """
    p = np.asarray(p, dtype=float)
    q = np.broadcast_to(np.asarray(q, dtype=float), p.shape)
    counts = np.zeros(n_slots, dtype=np.int64)
    for pi, qi in zip(p, q):
        counts += _markov_runs(float(pi), float(qi), n_slots, rng)
    return counts


def rate_of(state: DeviceState, rp: RateParams) -> float:
    return rp.rate_alarm if DeviceState(state) is DeviceState.ALARM else rp.rate_regular


def packetize(rates: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Integer packets per slot: one packet with probability equal to the rate.

    Rates above 1 packet/slot emit ``floor(rate)`` packets plus one more with
    the fractional remainder.
    """
    rates = np.asarray(rates, dtype=float)
    base = np.floor(rates)
    return (base + (rng.random(rates.shape) < rates - base)).astype(np.int64)
