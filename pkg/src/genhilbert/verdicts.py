"""Dyadic grids and finite-sample decision rules for sup / limsup questions.

Grid points near 1 are stored by their distance to 1, ``delta = 1 - r``, so
``r = 1 - 2**-j`` stays exact far past double-precision resolution of ``r``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

TRAILING_WINDOW = 8
SLACK = 0.10
VANISH_FRACTION = 0.05
TREND_TOL = 0.05
DEFAULT_DEPTH = 128


def dyadic_deltas(first: int = 1, last: int = DEFAULT_DEPTH) -> np.ndarray:
    """``2**-j`` for ``j = first..last`` (distances of ``1 - 2**-j`` to 1)."""
    return np.ldexp(1.0, -np.arange(first, last + 1))


def log_inv(delta) -> np.ndarray:
    """``log(1/delta)``, the natural abscissa for power-log asymptotics."""
    return -np.log(np.asarray(delta, dtype=float))


class Verdict(NamedTuple):
    bounded: bool
    vanishing: bool
    slope: float
    trailing_max: float
    leading_median: float


def trend_slope(values, x) -> float:
    """Least-squares slope of ``log(values)`` against ``x``.

    Returns ``-inf`` when the window ends in exact zeros (the quantity has
    died out), ``nan`` when nothing positive remains to fit.
    """
    values = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float)
    if values[-1] == 0.0:
        return -np.inf
    pos = values > 0
    if pos.sum() < 2:
        return np.nan
    return float(np.polyfit(x[pos], np.log(values[pos]), 1)[0])


def judge(values, x, window: int = TRAILING_WINDOW, slack: float = SLACK) -> Verdict:
    """Decide boundedness and vanishing of a sequence sampled toward a limit.

    bounded:   trailing-window max <= (1 + slack) * median of the points
               before the window, and the trailing log-trend slope is at
               most ``TREND_TOL``.
    vanishing: trailing-window max < ``VANISH_FRACTION`` * global max and
               the trailing trend is negative (or the tail is exactly 0).
    """
    values = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ValueError("values must be finite and nonnegative")
    window = min(window, max(len(values) - 1, 1))
    trail = values[-window:]
    lead = values[:-window] if len(values) > window else values[:1]
    t_max = float(trail.max())
    ref = float(np.median(lead))
    slope = trend_slope(trail, x[-window:])
    if t_max == 0.0:
        return Verdict(True, True, slope, t_max, ref)
    flat = not (slope > TREND_TOL)
    bounded = bool(t_max <= (1.0 + slack) * ref and flat)
    vanishing = bool(t_max < VANISH_FRACTION * values.max() and slope < 0)
    return Verdict(bounded or vanishing, vanishing, slope, t_max, ref)
