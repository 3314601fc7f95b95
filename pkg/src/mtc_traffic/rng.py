"""Counter-based random streams keyed by (point, trial, role).

Every random draw in a simulation comes from a Philox generator whose key is
derived from the scenario seed and a spawn key.  Two streams with different
keys are statistically independent, and a stream is reproducible no matter
which worker process creates it.
"""

from __future__ import annotations

import enum

import numpy as np


class Role(enum.IntEnum):
    DEVICES = 0
    EVENTS = 1
    STATES = 2
    EXTRA = 3


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return an independent generator for ``seed`` and the integer ``key``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def trial_stream(seed: int, point: int, trial: int, role: Role) -> np.random.Generator:
    return stream(seed, point, trial, int(role))
