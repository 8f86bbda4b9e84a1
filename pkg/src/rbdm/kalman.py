"""Kalman filtering, forward-filtering backward-sampling and RTS smoothing.

Arrays follow one indexing rule: ``m`` and ``C`` have ``T + 1`` rows with row 0
holding the prior ``(m0, C0)``; every other per-time array has ``T`` rows and
row ``k`` belongs to time ``t = k + 1``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import ModelSpec, TimeSeries, ValidationError

log = logging.getLogger(__name__)

JITTER = 1e-12


class FilterError(ArithmeticError):
    """Numerical breakdown of the forward filter."""

    def __init__(self, t, message):
        super().__init__(f"t={t}: {message}")
        self.t = t


@dataclass(frozen=True)
class VarianceSequences:
    """Observation variances ``V`` (T,) and diagonal state variances ``W`` (T, n)."""

    V: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        W = np.asarray(self.W, dtype=float)
        if W.ndim == 1:
            W = W[:, None]
        if V.ndim != 1 or W.ndim != 2 or W.shape[0] != V.shape[0]:
            raise ValidationError(f"V {V.shape} and W {W.shape} are inconsistent")
        if not (np.all(np.isfinite(V)) and np.all(V > 0)):
            raise ValidationError("observation variances must be positive and finite")
        # W = 0 is allowed: it gives a deterministic state transition.
        if not (np.all(np.isfinite(W)) and np.all(W >= 0)):
            raise ValidationError("state variances must be non-negative and finite")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "W", W)

    @classmethod
    def constant(cls, T, V, W):
        W = np.broadcast_to(np.asarray(W, dtype=float), (T, np.size(W)))
        return cls(np.full(T, float(V)), W.copy())

    @classmethod
    def from_precisions(cls, lambda_y, omega_y, lambda_theta, omega_theta):
        """``V_t = 1 / (lambda_y omega_{y,t})``, ``W_{t,i} = 1 / (lambda_i omega_{t,i})``."""
        V = 1.0 / (lambda_y * np.asarray(omega_y))
        W = 1.0 / (np.asarray(lambda_theta)[None, :] * np.asarray(omega_theta))
        return cls(V, W)

    def __len__(self):
        return self.V.shape[0]


@dataclass(frozen=True)
class FilterResult:
    a: np.ndarray
    R: np.ndarray
    f: np.ndarray
    Q: np.ndarray
    m: np.ndarray
    C: np.ndarray
    e: np.ndarray
    A: np.ndarray
    max_asymmetry: float = 0.0

    @property
    def T(self):
        return self.f.shape[0]

    def loglik(self):
        """Prediction-error decomposition of ``log p(y_1:T)``."""
        return float(-0.5 * np.sum(np.log(2 * np.pi * self.Q) + self.e ** 2 / self.Q))


def _values(series):
    if isinstance(series, TimeSeries):
        return series.values
    return np.asarray(series, dtype=float)


def _sym(M):
    return 0.5 * (M + M.T)


def kalman_filter(spec: ModelSpec, series, variances: VarianceSequences) -> FilterResult:
    """Forward filter; the state noise ``W_t`` is added to the prior covariance."""
    y = _values(series)
    T, n = y.shape[0], spec.n
    if len(variances) != T:
        raise ValidationError(f"{len(variances)} variances for {T} observations")
    if variances.W.shape[1] != n:
        raise ValidationError(f"W has {variances.W.shape[1]} columns, state has {n}")
    F, G = spec.F[0], spec.G
    a = np.empty((T, n))
    R = np.empty((T, n, n))
    f = np.empty(T)
    Q = np.empty(T)
    m = np.empty((T + 1, n))
    C = np.empty((T + 1, n, n))
    e = np.empty(T)
    A = np.empty((T, n))
    m[0], C[0] = spec.m0, spec.C0
    asym = 0.0
    for k in range(T):
        a[k] = G @ m[k]
        Rk = G @ C[k] @ G.T + np.diag(variances.W[k])
        asym = max(asym, float(np.max(np.abs(Rk - Rk.T))))
        R[k] = _sym(Rk)
        f[k] = F @ a[k]
        Q[k] = F @ R[k] @ F + variances.V[k]
        if not (Q[k] > 0 and np.isfinite(Q[k])):
            raise FilterError(k + 1, f"forecast variance {Q[k]!r} is not positive")
        A[k] = R[k] @ F / Q[k]
        e[k] = y[k] - f[k]
        m[k + 1] = a[k] + A[k] * e[k]
        Ck = R[k] - Q[k] * np.outer(A[k], A[k])
        asym = max(asym, float(np.max(np.abs(Ck - Ck.T))))
        C[k + 1] = _sym(Ck)
    return FilterResult(a, R, f, Q, m, C, e, A, asym)


def psd_factor(M):
    """Lower-triangular ``L`` with ``L L' = M`` for symmetric PSD ``M``.

    Falls back to a pivot-clamped Cholesky when ``M`` is singular.
    """
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        pass
    n = M.shape[0]
    L = np.zeros_like(M)
    for j in range(n):
        d = M[j, j] - L[j, :j] @ L[j, :j]
        if d <= 0:
            continue
        L[j, j] = np.sqrt(d)
        L[j + 1:, j] = (M[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def backward_gain(C, G, R_next):
    """``B = C G' R_next^{-1}``, with jitter and pseudo-inverse fallbacks.

    Returns ``(B, fell_back)``.
    """
    GC = G @ C
    try:
        L = np.linalg.cholesky(R_next)
    except np.linalg.LinAlgError:
        jitter = JITTER * np.trace(R_next)
        try:
            L = np.linalg.cholesky(R_next + jitter * np.eye(R_next.shape[0]))
        except np.linalg.LinAlgError:
            return (np.linalg.pinv(R_next) @ GC).T, True
    Bt = np.linalg.solve(L.T, np.linalg.solve(L, GC))
    return Bt.T, False


def ffbs_sample(filt: FilterResult, spec: ModelSpec, rng: np.random.Generator,
                z=None) -> np.ndarray:
    """One joint draw of the state path ``theta_0:T`` given ``y_1:T``.

    ``z`` optionally supplies the ``(T + 1, n)`` standard normals; row ``T``
    is used first.
    """
    T, n = filt.T, spec.n
    if z is None:
        z = rng.standard_normal((T + 1, n))
    G = spec.G
    theta = np.empty((T + 1, n))
    theta[T] = filt.m[T] + psd_factor(filt.C[T]) @ z[T]
    fallbacks = 0
    for t in range(T - 1, -1, -1):
        B, fell_back = backward_gain(filt.C[t], G, filt.R[t])
        fallbacks += fell_back
        mean = filt.m[t] + B @ (theta[t + 1] - filt.a[t])
        cov = _sym(filt.C[t] - B @ filt.R[t] @ B.T)
        theta[t] = mean + psd_factor(cov) @ z[t]
    if fallbacks:
        log.warning("FFBS used a pseudo-inverse at %d of %d steps", fallbacks, T)
    return theta


def smoother_oracle(filt: FilterResult, spec: ModelSpec):
    """Fixed-interval (RTS) smoothed means ``(T+1, n)`` and covariances ``(T+1, n, n)``."""
    T = filt.T
    G = spec.G
    s = np.empty_like(filt.m)
    S = np.empty_like(filt.C)
    s[T], S[T] = filt.m[T], filt.C[T]
    for t in range(T - 1, -1, -1):
        Rn = filt.R[t]
        try:
            Rinv = np.linalg.inv(Rn)
        except np.linalg.LinAlgError:
            Rinv = np.linalg.pinv(Rn)
        B = filt.C[t] @ G.T @ Rinv
        s[t] = filt.m[t] + B @ (s[t + 1] - filt.a[t])
        S[t] = _sym(filt.C[t] + B @ (S[t + 1] - Rn) @ B.T)
    return s, S
