"""Posterior summaries, flagged outliers/breaks and convergence statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TimeSeries, format_timestamp
from .gibbs import ChainOutput

FAMILIES = ("observation", "level", "slope")
EVENT_KIND = {
    "observation": "observational outlier",
    "level": "level break",
    "slope": "slope break",
}


@dataclass(frozen=True)
class FlaggedEvent:
    timestamp: str
    t: int            # 1-based time index
    kind: str
    omega_mean: float
    rank: int         # 1 = smallest weight in its family


@dataclass(frozen=True)
class RankedWeight:
    timestamp: str
    t: int
    family: str
    omega_mean: float
    rank: int
    flagged: bool


@dataclass
class PosteriorSummary:
    timestamps: list
    level_mean: np.ndarray
    level_lo: np.ndarray
    level_hi: np.ndarray
    slope_mean: np.ndarray
    slope_lo: np.ndarray
    slope_hi: np.ndarray
    omega_y: np.ndarray
    omega_level: np.ndarray
    omega_slope: np.ndarray
    residuals: np.ndarray
    events: list
    level: float
    threshold: float
    slope_threshold: float

    def weights(self, family):
        return {"observation": self.omega_y, "level": self.omega_level,
                "slope": self.omega_slope}[family]


def _ranks(values):
    """1-based ascending ranks; ties go to the earlier index."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=int)
    ranks[order] = np.arange(1, values.shape[0] + 1)
    return ranks


def summarize(chain: ChainOutput, series: TimeSeries, level=0.95, threshold=0.5,
              slope_threshold=None, F=None) -> PosteriorSummary:
    """Reduce retained draws to per-time posterior summaries.

    Credible intervals are equal-tailed empirical quantiles. Residuals are
    ``y_t - E(F theta_t | y)`` with ``F`` defaulting to ``[1, 0]``. A time point is flagged in every weight family
    whose posterior mean falls below the threshold.
    """
    if len(chain) == 0:
        raise ValueError("chain has no retained draws")
    if not 0 < level < 1:
        raise ValueError(f"credible level must lie in (0, 1), got {level!r}")
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold!r}")
    if slope_threshold is None:
        slope_threshold = threshold
    y = series.values
    states = chain.theta[:, 1:, :]
    tail = 0.5 * (1.0 - level)
    lo, hi = np.quantile(states, [tail, 1.0 - tail], axis=0)
    mean = states.mean(axis=0)
    if F is None:
        F = np.eye(chain.theta.shape[2])[0]
    fitted = mean @ np.asarray(F, dtype=float).ravel()
    omega_y = chain.omega_y.mean(axis=0)
    omega_theta = chain.omega_theta.mean(axis=0)
    labels = series.labels
    events = []
    for family, w, thr in (("observation", omega_y, threshold),
                           ("level", omega_theta[:, 0], threshold),
                           ("slope", omega_theta[:, 1], slope_threshold)):
        ranks = _ranks(w)
        for k in np.flatnonzero(w < thr)[np.argsort(ranks[w < thr])]:
            events.append(FlaggedEvent(labels[k], int(k) + 1, EVENT_KIND[family],
                                       float(w[k]), int(ranks[k])))
    return PosteriorSummary(
        timestamps=labels,
        level_mean=mean[:, 0], level_lo=lo[:, 0], level_hi=hi[:, 0],
        slope_mean=mean[:, 1], slope_lo=lo[:, 1], slope_hi=hi[:, 1],
        omega_y=omega_y, omega_level=omega_theta[:, 0],
        omega_slope=omega_theta[:, 1],
        residuals=y - fitted, events=events, level=level,
        threshold=threshold, slope_threshold=slope_threshold)


def rank_events(summary: PosteriorSummary, k: int, families=FAMILIES):
    """The ``k`` smallest weights per family, ascending, ties to the earlier time."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k!r}")
    out = {}
    for family in families:
        w = summary.weights(family)
        thr = summary.slope_threshold if family == "slope" else summary.threshold
        order = np.argsort(w, kind="stable")[:k]
        out[family] = [
            RankedWeight(summary.timestamps[i], int(i) + 1, family, float(w[i]),
                         r + 1, bool(w[i] < thr))
            for r, i in enumerate(order)]
    return out


def split_rhat(chains):
    """Split-chain potential scale reduction for a scalar quantity.

    ``chains`` is a sequence of 1-d draw arrays (one per chain); each is cut
    in half so a single chain still gives a meaningful value.
    """
    halves = []
    for c in chains:
        c = np.asarray(c, dtype=float)
        h = c.shape[0] // 2
        if h < 2:
            return float("nan")
        halves += [c[:h], c[h:2 * h]]
    x = np.stack(halves)
    n = x.shape[1]
    means = x.mean(axis=1)
    W = x.var(axis=1, ddof=1).mean()
    B = n * means.var(ddof=1)
    if W == 0:
        return float("nan") if B == 0 else float("inf")
    var_plus = (n - 1) / n * W + B / n
    return float(np.sqrt(var_plus / W))


def lambda_summary(chain: ChainOutput, level=0.95):
    tail = 0.5 * (1.0 - level)

    def stats(x):
        q = np.quantile(x, [tail, 0.5, 1.0 - tail])
        return {"mean": float(np.mean(x)), "lo": float(q[0]),
                "median": float(q[1]), "hi": float(q[2])}

    out = {"lambda_y": stats(chain.lambda_y)}
    for i, name in enumerate(("lambda_level", "lambda_slope")[:chain.lambda_theta.shape[1]]):
        out[name] = stats(chain.lambda_theta[:, i])
    return out


def timestamp_label(ts):
    return format_timestamp(ts)
