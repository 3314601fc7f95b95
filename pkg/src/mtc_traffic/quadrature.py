"""Adaptive Gauss-Kronrod (G7/K15) quadrature with interval bisection."""

from __future__ import annotations

import heapq
import math
from typing import Callable

import numpy as np

from mtc_traffic.errors import NonIntegrableAtpfError

# 15-point Kronrod nodes on [-1, 1] (non-negative half) and the weights of the
# embedded 7-point Gauss rule.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KW = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def gk15(f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> tuple[float, float]:
    """One G7/K15 panel on [a, b]. Returns (kronrod estimate, |K15 - G7|)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    fx = np.asarray(f(mid + half * _NODES), dtype=float)
    k = half * float(_KW @ fx)
    g = half * float(_GW @ fx)
    return k, abs(k - g)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    abs_tol: float = 1e-10,
    max_intervals: int = 2000,
    breakpoints=(),
) -> tuple[float, float]:
    """Integrate a vectorised ``f`` over [a, b] by global adaptive bisection.

    ``breakpoints`` inside (a, b) seed the initial partition, which matters
    for integrands with kinks (piecewise-linear tables, step functions).
    Returns ``(value, error_estimate)``.
    """
    if b <= a:
        return 0.0, 0.0
    edges = sorted({a, b, *(p for p in breakpoints if a < p < b)})
    heap = []
    total = err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = gk15(f, lo, hi)
        total += v
        err += e
        heapq.heappush(heap, (-e, lo, hi, v))
    while err > abs_tol and len(heap) < max_intervals:
        neg_e, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            heapq.heappush(heap, (neg_e, lo, hi, v))
            break
        v1, e1 = gk15(f, lo, mid)
        v2, e2 = gk15(f, mid, hi)
        total += v1 + v2 - v
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
    # re-sum to shed accumulated rounding from the running updates
    total = math.fsum(item[3] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return total, err


def integrate_to_infinity(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    abs_tol: float = 1e-10,
    tail_tol: float = 1e-12,
    initial_width: float = 1.0,
    max_panels: int = 60,
    breakpoints=(),
) -> tuple[float, float]:
    """Integrate ``f`` over [a, inf) by summing panels of doubling width.

    Stops at the cut-off ``r_cut`` once a panel contributes less than
    ``tail_tol`` and the panel contributions are shrinking.  Returns
    ``(value, r_cut)``; raises NonIntegrableAtpfError when that never happens.
    """
    lo = a
    width = initial_width
    parts = []
    prev = math.inf
    for _ in range(max_panels):
        hi = lo + width
        v, _ = integrate(f, lo, hi, abs_tol=abs_tol, breakpoints=breakpoints)
        parts.append(v)
        if abs(v) < tail_tol and abs(v) <= abs(prev):
            return math.fsum(parts), hi
        prev = v
        lo = hi
        width *= 2.0
    raise NonIntegrableAtpfError(
        f"tail integral from {a} did not converge by r = {lo:.3g} "
        f"(last panel contributed {prev:.3g})"
    )
