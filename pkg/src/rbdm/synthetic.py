"""Synthetic linear growth series with injected anomalies."""
from __future__ import annotations

import numpy as np

from .core import TimeSeries, ValidationError

KINDS = ("clean", "obs-outlier", "level-shift", "slope-shift")

# Baseline noise on the scale of a monthly log price index (sd 0.01), where the
# default precision prior (1/beta = 1e4) puts its bulk. Observation noise and
# level innovations are equally large; slope innovations are 10x smaller in sd.
BASE_V = 1e-4
BASE_W = (1e-4, 1e-6)
DEFAULT_MAGNITUDE = {"clean": 0.0, "obs-outlier": 8.0, "level-shift": 6.0,
                     "slope-shift": 6.0}


def generate_synthetic(kind="clean", T=120, magnitude=None, seed=0, t_star=None,
                       V=BASE_V, W=BASE_W, level0=4.6, slope0=0.003,
                       start=(1980, 1)):
    """Simulate the linear growth model and inject one anomaly.

    ``t_star`` is 1-based and defaults to ``T // 2``. Magnitudes are in
    standard deviations of the affected noise term: an observation outlier
    adds ``magnitude * sqrt(V)`` to the noisy ``y_{t*}``; a level (slope)
    shift sets the level (slope) innovation at ``t*`` to exactly
    ``magnitude * sqrt(W_1)`` (``sqrt(W_2)``), so the state jumps by that
    amount and the change persists.

    Returns ``(series, truth)`` where ``truth`` is a JSON-ready dict.
    """
    if kind not in KINDS:
        raise ValidationError(f"unknown synthetic kind {kind!r}; expected one of {KINDS}")
    if T < 10:
        raise ValidationError("synthetic series need T >= 10")
    if magnitude is None:
        magnitude = DEFAULT_MAGNITUDE[kind]
    if t_star is None:
        t_star = T // 2
    if not 1 <= t_star <= T:
        raise ValidationError(f"t_star={t_star} outside 1..{T}")
    rng = np.random.default_rng(seed)
    sd_w = np.sqrt(np.asarray(W, dtype=float))
    sd_v = float(np.sqrt(V))
    shocks = rng.standard_normal((T, 2)) * sd_w
    noise = rng.standard_normal(T) * sd_v
    k = t_star - 1
    if kind == "level-shift":
        shocks[k, 0] = magnitude * sd_w[0]
    elif kind == "slope-shift":
        shocks[k, 1] = magnitude * sd_w[1]
    level = np.empty(T)
    slope = np.empty(T)
    mu, xi = level0, slope0
    for t in range(T):
        mu, xi = mu + xi + shocks[t, 0], xi + shocks[t, 1]
        level[t], slope[t] = mu, xi
    y = level + noise
    if kind == "obs-outlier":
        y[k] += magnitude * sd_v
    series = TimeSeries.from_values(y, start=start)
    truth = {
        "kind": kind,
        "T": T,
        "seed": seed,
        "magnitude": float(magnitude),
        "t_star": int(t_star) if kind != "clean" else None,
        "timestamp": series.labels[k] if kind != "clean" else None,
        "V": float(V),
        "W": [float(w) for w in W],
        "level": level.tolist(),
        "slope": slope.tolist(),
    }
    return series, truth


def cpi_like_series(seed=2012):
    """Monthly price-index-like series, January 1980 to December 2012 (T = 396).

    Simulated on the log scale with an early slope jump, a large level break in
    September 2005 and one observation outlier in January 2009, then
    exponentiated and rescaled so the 2006 average is 100.
    """
    T = 396
    rng = np.random.default_rng(seed)
    sd_v = np.sqrt(BASE_V) * 0.5
    sd_w = np.sqrt(BASE_W) * np.array([0.5, 0.5])
    shocks = rng.standard_normal((T, 2)) * sd_w
    noise = rng.standard_normal(T) * sd_v

    def idx(year, month):
        return (year - 1980) * 12 + month - 1

    shocks[idx(1981, 9), 1] += 8 * sd_w[1]
    shocks[idx(1989, 7), 0] += 5 * sd_w[0]
    shocks[idx(2005, 9), 0] += 10 * sd_w[0]
    mu, xi = np.log(40.0), 0.004
    level = np.empty(T)
    for t in range(T):
        mu, xi = mu + xi + shocks[t, 0], xi + shocks[t, 1]
        level[t] = mu
    logy = level + noise
    logy[idx(2009, 1)] += 8 * sd_v
    values = np.exp(logy)
    values *= 100.0 / values[idx(2006, 1):idx(2007, 1)].mean()
    return TimeSeries.from_values(np.round(values, 3), start=(1980, 1))
