"""Time series container and dynamic linear model specification."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """Raised when a series or model specification violates its invariants."""


class DomainError(ValueError):
    """Raised when a value lies outside the domain of a transform or density."""


Timestamp = tuple  # (year,) or (year, month)


def _readonly(x, dtype=float):
    arr = np.array(x, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def format_timestamp(ts: Timestamp) -> str:
    if len(ts) == 1:
        return f"{ts[0]:04d}"
    return f"{ts[0]:04d}-{ts[1]:02d}"


@dataclass(frozen=True)
class TimeSeries:
    """Ordered univariate observations.

    Timestamps are ``(year,)`` tuples for annual data or ``(year, month)``
    tuples for monthly data. They are carried for reporting only.
    """

    timestamps: tuple
    values: np.ndarray
    log_transformed: bool = False

    def __post_init__(self):
        ts = tuple(tuple(int(v) for v in t) for t in self.timestamps)
        values = _readonly(self.values)
        if values.ndim != 1:
            raise ValidationError("values must be one-dimensional")
        if len(ts) != values.shape[0]:
            raise ValidationError(
                f"{len(ts)} timestamps but {values.shape[0]} values")
        if values.shape[0] < 2:
            raise ValidationError("a series needs at least two observations")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValidationError(
                f"non-finite value at {format_timestamp(ts[bad])}")
        if len({len(t) for t in ts}) != 1 or len(ts[0]) not in (1, 2):
            raise ValidationError(
                "timestamps must all be (year,) or all be (year, month)")
        for prev, cur in zip(ts, ts[1:]):
            if not cur > prev:
                raise ValidationError(
                    f"timestamps not strictly increasing at "
                    f"{format_timestamp(cur)}")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[0]

    @property
    def labels(self) -> list[str]:
        return [format_timestamp(t) for t in self.timestamps]

    @classmethod
    def from_values(cls, values, start=(2000, 1), log_transformed=False):
        """Build a monthly (or annual, if ``start`` has one field) series."""
        values = np.asarray(values, dtype=float)
        if len(start) == 1:
            ts = [(start[0] + k,) for k in range(len(values))]
        else:
            base = start[0] * 12 + start[1] - 1
            ts = [((base + k) // 12, (base + k) % 12 + 1)
                  for k in range(len(values))]
        return cls(tuple(ts), values, log_transformed)


def log_transform(series: TimeSeries) -> TimeSeries:
    """Natural log of every observation; the series must be strictly positive."""
    bad = np.flatnonzero(series.values <= 0)
    if bad.size:
        ts = format_timestamp(series.timestamps[int(bad[0])])
        raise DomainError(
            f"cannot take log of non-positive value "
            f"{series.values[bad[0]]!r} at {ts}")
    return TimeSeries(series.timestamps, np.log(series.values), True)


@dataclass(frozen=True)
class ModelSpec:
    """Univariate DLM: ``y_t = F theta_t + v_t``, ``theta_t = G theta_{t-1} + w_t``.

    ``theta_0 ~ N(m0, C0)``. The observation and state variances are supplied
    separately (see :class:`rbdm.kalman.VarianceSequences`).
    """

    F: np.ndarray
    G: np.ndarray
    m0: np.ndarray
    C0: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        F = _readonly(np.atleast_2d(self.F))
        G = _readonly(np.atleast_2d(self.G))
        m0 = _readonly(np.atleast_1d(self.m0))
        C0 = _readonly(np.atleast_2d(self.C0))
        if F.ndim != 2 or F.shape[0] != 1:
            raise ValidationError(f"F must be 1 x n, got shape {F.shape}")
        n = F.shape[1]
        if G.shape != (n, n):
            raise ValidationError(f"G must be {n} x {n}, got shape {G.shape}")
        if m0.shape != (n,):
            raise ValidationError(f"m0 must have length {n}, got {m0.shape}")
        if C0.shape != (n, n):
            raise ValidationError(f"C0 must be {n} x {n}, got {C0.shape}")
        for name, arr in (("F", F), ("G", G), ("m0", m0), ("C0", C0)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} has non-finite entries")
        check_psd(C0, "C0")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "m0", m0)
        object.__setattr__(self, "C0", C0)
        object.__setattr__(self, "n", n)

    def __eq__(self, other):
        if not isinstance(other, ModelSpec):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in ("F", "G", "m0", "C0"))

    __hash__ = None

    def with_prior(self, m0, C0) -> "ModelSpec":
        return ModelSpec(self.F, self.G, m0, C0)


def check_psd(M, name="matrix", tol=1e-10):
    M = np.asarray(M, dtype=float)
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if not np.allclose(M, M.T, rtol=0.0, atol=tol * scale):
        raise ValidationError(f"{name} is not symmetric")
    if np.linalg.eigvalsh(M).min() < -tol * scale:
        raise ValidationError(f"{name} is not positive semi-definite")


LINEAR_GROWTH_F = np.array([[1.0, 0.0]])
LINEAR_GROWTH_G = np.array([[1.0, 1.0], [0.0, 1.0]])


def build_linear_growth(m0=(0.0, 0.0), C0=np.eye(2)) -> ModelSpec:
    """Local linear trend: state (level, slope), level += slope each step."""
    return ModelSpec(LINEAR_GROWTH_F, LINEAR_GROWTH_G, m0, C0)


def diffuse_linear_growth(series: TimeSeries, scale: float = 1e7) -> ModelSpec:
    """Linear growth model with a vague prior centred on the first observation.

    ``m0 = (y_1, 0)`` and ``C0 = diag(scale * Var(y), scale * Var(diff(y)))``.
    """
    y = np.asarray(series.values if isinstance(series, TimeSeries) else series)
    var_y = np.var(y, ddof=1)
    var_dy = np.var(np.diff(y), ddof=1) if y.shape[0] > 2 else var_y
    if var_y <= 0:
        raise ValidationError("series is constant")
    if not var_dy > 0:
        var_dy = var_y
    return build_linear_growth((y[0], 0.0), np.diag([scale * var_y,
                                                     scale * var_dy]))
