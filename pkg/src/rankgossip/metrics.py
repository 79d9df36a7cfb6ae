"""Error metrics for the gossip estimators and power-law slope fitting."""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from .engine import Trace
from .errors import InvalidInput, InvalidParameter


def rank_error(estimates, exact, n: int | None = None) -> np.ndarray:
    """Per-node normalized rank error ``|R_k - r_k| / n``."""
    est = np.asarray(estimates, dtype=float)
    ref = np.asarray(exact, dtype=float)
    if est.shape != ref.shape:
        raise InvalidParameter(f"shape mismatch: {est.shape} vs {ref.shape}")
    return np.abs(est - ref) / (est.size if n is None else n)


def relative_stat_error(z, t_n: float) -> float:
    """Mean over nodes of ``|Z_k - t_n| / t_n``."""
    if t_n == 0:
        raise InvalidParameter("relative error is undefined for a zero reference")
    return float(np.mean(np.abs(np.asarray(z, dtype=float) - t_n)) / abs(t_n))


def trim_error(z, xbar_alpha: float) -> float:
    """Mean over nodes of ``|Z_k - xbar_alpha|``."""
    return float(np.mean(np.abs(np.asarray(z, dtype=float) - xbar_alpha)))


def rank_functional(r: float, n: int) -> float:
    """``n^{3/2} sqrt(u (1 - u))`` with ``u = (r - 1) / n``; 0 outside ``(0, 1)``."""
    u = (r - 1.0) / n
    if not 0.0 < u < 1.0:
        return 0.0
    return n**1.5 * math.sqrt(u * (1.0 - u))


def loglog_slope(
    trace: Union[Trace, tuple],
    window_fraction: float = 1.0,
    bins: int = 20,
    column: str | None = None,
) -> float:
    """Least-squares slope of ``log(value)`` against ``log(tick)``.

    Only the trailing ``window_fraction`` of the recorded points is used. The
    window is split into ``bins`` log-spaced tick bins; each non-empty bin
    contributes the medians of its log-ticks and log-values, and the line is
    fitted through those medians.

    Args:
        trace: a :class:`Trace` (its trial-mean is fitted) or a
            ``(ticks, values)`` pair.
        window_fraction: share of trailing points to keep, in ``(0, 1]``.
        bins: number of log-spaced bins.
        column: metric to use when ``trace`` has several.
    """
    if isinstance(trace, Trace):
        ticks, values = trace.ticks, trace.mean(column)
    else:
        ticks, values = trace
    ticks = np.asarray(ticks, dtype=float)
    values = np.asarray(values, dtype=float)
    if not 0.0 < window_fraction <= 1.0:
        raise InvalidParameter(f"window_fraction must be in (0, 1], got {window_fraction}")
    keep = max(1, math.ceil(window_fraction * ticks.size))
    t, v = ticks[-keep:], values[-keep:]
    if t.size < 10:
        raise InvalidInput(f"need at least 10 points in the window, got {t.size}")
    if np.any(v <= 0) or np.any(t <= 0):
        raise InvalidInput("log-log fit needs strictly positive ticks and values")
    lt, lv = np.log(t), np.log(v)
    edges = np.linspace(lt[0], lt[-1], bins + 1)
    which = np.clip(np.searchsorted(edges, lt, side="right") - 1, 0, bins - 1)
    bx, by = [], []
    for b in range(bins):
        sel = which == b
        if sel.any():
            bx.append(np.median(lt[sel]))
            by.append(np.median(lv[sel]))
    if len(bx) < 2:
        raise InvalidInput("window spans too few distinct ticks")
    return float(np.polyfit(bx, by, 1)[0])
