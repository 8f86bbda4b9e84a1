"""Gibbs sampler for the robust linear growth model.

Hierarchy (all Gamma second arguments are RATES)::

    V_t^{-1} = lambda_y * omega_{y,t}        W_{t,i}^{-1} = lambda_i * omega_{t,i}
    lambda   ~ Gamma(q, rate=beta * rho)     omega ~ Gamma(nu/2, rate=nu/2)
    rho      ~ Gamma(p, rate=1)

Integrating out ``rho`` gives the scaled Beta2 precision prior on ``lambda``;
integrating out ``omega`` gives Student-t errors with ``nu`` degrees of freedom.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .core import ModelSpec, TimeSeries, ValidationError
from .kalman import (VarianceSequences, kalman_filter, smoother_oracle,
                     psd_factor)
from ._kernels import ffbs_2d


class InitializationError(ValueError):
    pass


class SamplerError(ArithmeticError):
    def __init__(self, iteration, step, message):
        super().__init__(f"iteration {iteration}, step '{step}': {message}")
        self.iteration = iteration
        self.step = step


@dataclass(frozen=True)
class HyperParams:
    nu: float = 4.0
    p: float = 1.0
    q: float = 1.0
    beta: float = 1e-4
    n_iter: int = 30000
    n_burn: int = 10000
    thin: int = 1
    seed: int = 0
    nu_state: Optional[float] = None  # None shares nu with the observation weights

    def __post_init__(self):
        for name in ("nu", "p", "q", "beta"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive, got {v!r}")
        if self.nu_state is not None and not self.nu_state > 0:
            raise ValidationError(f"nu_state must be positive, got {self.nu_state!r}")
        if self.n_iter < 0 or self.n_burn < 0:
            raise ValidationError("n_iter and n_burn must be non-negative")
        if self.thin < 1:
            raise ValidationError("thin must be at least 1")

    @property
    def nu_theta(self):
        return self.nu if self.nu_state is None else self.nu_state

    def to_dict(self):
        return asdict(self)


@dataclass
class ChainState:
    theta: np.ndarray        # (T+1, n), row 0 is theta_0
    lambda_y: float
    lambda_theta: np.ndarray  # (n,)
    omega_y: np.ndarray      # (T,)
    omega_theta: np.ndarray  # (T, n)
    rho_y: float
    rho_theta: np.ndarray    # (n,)

    def copy(self):
        return ChainState(self.theta.copy(), float(self.lambda_y),
                          self.lambda_theta.copy(), self.omega_y.copy(),
                          self.omega_theta.copy(), float(self.rho_y),
                          self.rho_theta.copy())

    def variances(self) -> VarianceSequences:
        return VarianceSequences.from_precisions(
            self.lambda_y, self.omega_y, self.lambda_theta, self.omega_theta)


@dataclass
class ChainOutput:
    theta: np.ndarray         # (S, T+1, n)
    omega_y: np.ndarray       # (S, T)
    omega_theta: np.ndarray   # (S, T, n)
    lambda_y: np.ndarray      # (S,)
    lambda_theta: np.ndarray  # (S, n)
    rho_y: np.ndarray         # (S,)
    rho_theta: np.ndarray     # (S, n)
    hyper: HyperParams
    n_sweeps: int = 0
    runtime: float = 0.0
    ffbs_fallbacks: int = 0
    chain_lengths: list = field(default_factory=list)

    def __len__(self):
        return self.lambda_y.shape[0]

    @classmethod
    def concatenate(cls, chains):
        """Pool draws from independent chains."""
        keys = ("theta", "omega_y", "omega_theta", "lambda_y", "lambda_theta",
                "rho_y", "rho_theta")
        pooled = {k: np.concatenate([getattr(c, k) for c in chains]) for k in keys}
        return cls(**pooled, hyper=chains[0].hyper,
                   n_sweeps=sum(c.n_sweeps for c in chains),
                   runtime=sum(c.runtime for c in chains),
                   ffbs_fallbacks=sum(c.ffbs_fallbacks for c in chains),
                   chain_lengths=[len(c) for c in chains])


def _y(series):
    return series.values if isinstance(series, TimeSeries) else np.asarray(series, float)


def gamma_rate(rng, shape, rate, size=None):
    """Gamma draw from (shape, rate); numpy wants (shape, scale = 1/rate)."""
    return rng.gamma(shape, 1.0 / np.asarray(rate), size=size)


def init_chain(spec: ModelSpec, series, hp: HyperParams, rng) -> ChainState:
    """Starting values: unit weights, moment-based precisions, smoothed states."""
    y = _y(series)
    T, n = y.shape[0], spec.n
    dy = np.diff(y)
    var_dy = np.var(dy, ddof=1 if dy.size > 1 else 0)
    if not var_dy > 0:
        raise InitializationError(
            "first differences of the series have zero variance; "
            "cannot initialise the precisions")
    lam = 1.0 / var_dy
    lambda_theta = np.full(n, lam)
    omega_y = np.ones(T)
    omega_theta = np.ones((T, n))
    rho_y = float(rng.gamma(hp.p, 1.0))          # scale 1
    rho_theta = rng.gamma(hp.p, 1.0, size=n)     # scale 1
    v = VarianceSequences.from_precisions(lam, omega_y, lambda_theta, omega_theta)
    theta, _ = smoother_oracle(kalman_filter(spec, y, v), spec)
    return ChainState(theta, lam, lambda_theta, omega_y, omega_theta,
                      rho_y, rho_theta)


def observation_residuals(theta, y, spec):
    return y - theta[1:] @ spec.F[0]


def state_innovations(theta, spec):
    """``theta_t - G theta_{t-1}`` for t = 1..T, shape (T, n)."""
    return theta[1:] - theta[:-1] @ spec.G.T


def lambda_y_conditional(state, series, spec, hp):
    """(shape, rate) of lambda_y | rest."""
    y = _y(series)
    e = observation_residuals(state.theta, y, spec)
    ss = float(np.sum(state.omega_y * e * e))
    return hp.q + 0.5 * y.shape[0], 0.5 * ss + hp.beta * state.rho_y


def draw_lambda_y(state, series, spec, hp, rng):
    shape, rate = lambda_y_conditional(state, series, spec, hp)
    return float(gamma_rate(rng, shape, rate))


def omega_y_conditional(state, series, spec, hp):
    e = observation_residuals(state.theta, _y(series), spec)
    return 0.5 * (hp.nu + 1.0), 0.5 * (hp.nu + state.lambda_y * e * e)


def draw_omega_y(state, series, spec, hp, rng):
    shape, rate = omega_y_conditional(state, series, spec, hp)
    return gamma_rate(rng, shape, rate)


def lambda_theta_conditional(state, spec, hp, i):
    d = state_innovations(state.theta, spec)[:, i]
    ss = float(np.sum(state.omega_theta[:, i] * d * d))
    T = d.shape[0]
    return hp.q + 0.5 * T, 0.5 * ss + hp.beta * state.rho_theta[i]


def draw_lambda_theta(state, spec, hp, rng, i):
    shape, rate = lambda_theta_conditional(state, spec, hp, i)
    return float(gamma_rate(rng, shape, rate))


def omega_theta_conditional(state, spec, hp):
    d = state_innovations(state.theta, spec)
    nu = hp.nu_theta
    return 0.5 * (nu + 1.0), 0.5 * (nu + state.lambda_theta[None, :] * d * d)


def draw_omega_theta(state, spec, hp, rng):
    shape, rate = omega_theta_conditional(state, spec, hp)
    return gamma_rate(rng, shape, rate)


def rho_conditional(state, hp):
    """Shape and rates for (rho_y, rho_theta)."""
    return (hp.p + hp.q, hp.beta * state.lambda_y + 1.0,
            hp.beta * np.asarray(state.lambda_theta) + 1.0)


def draw_rho(state, hp, rng):
    shape, rate_y, rate_theta = rho_conditional(state, hp)
    return float(gamma_rate(rng, shape, rate_y)), gamma_rate(rng, shape, rate_theta)


def draw_states(state, y, spec, rng):
    """FFBS draw of theta_0:T under the variances implied by ``state``.

    Returns ``(theta, n_fallbacks)``.
    """
    v = state.variances()
    T, n = y.shape[0], spec.n
    z = rng.standard_normal((T + 1, n))
    if n == 2:
        theta = np.empty((T + 1, 2))
        status, fallbacks = ffbs_2d(y, v.V, v.W, spec.F[0], spec.G,
                                    spec.m0, spec.C0, z, theta)
        if status >= 0:
            raise ArithmeticError(f"forecast variance not positive at t={status}")
        return theta, fallbacks
    from .kalman import ffbs_sample
    return ffbs_sample(kalman_filter(spec, y, v), spec, rng, z), 0


def _check(iteration, step, *values):
    for v in values:
        v = np.asarray(v)
        if not (np.all(np.isfinite(v))):
            raise SamplerError(iteration, step, "non-finite value drawn")


def _check_positive(iteration, step, *values):
    for v in values:
        v = np.asarray(v)
        if not (np.all(np.isfinite(v)) and np.all(v > 0)):
            raise SamplerError(iteration, step, "draw is not a positive finite number")


def gibbs_sweep(state: ChainState, y, spec, hp, rng, iteration=0) -> int:
    """One sweep in the order states, weights, precisions, mixing variables.

    Updates ``state`` in place and returns the number of FFBS fallbacks.
    """
    try:
        state.theta, fallbacks = draw_states(state, y, spec, rng)
    except (ArithmeticError, ValidationError) as exc:
        raise SamplerError(iteration, "states", str(exc)) from exc
    _check(iteration, "states", state.theta)
    state.omega_y = draw_omega_y(state, y, spec, hp, rng)
    state.omega_theta = draw_omega_theta(state, spec, hp, rng)
    _check_positive(iteration, "omega", state.omega_y, state.omega_theta)
    state.lambda_y = draw_lambda_y(state, y, spec, hp, rng)
    state.lambda_theta = np.array([draw_lambda_theta(state, spec, hp, rng, i)
                                   for i in range(spec.n)])
    _check_positive(iteration, "lambda", state.lambda_y, state.lambda_theta)
    state.rho_y, state.rho_theta = draw_rho(state, hp, rng)
    _check_positive(iteration, "rho", state.rho_y, state.rho_theta)
    return fallbacks


def run_gibbs(spec: ModelSpec, series, hp: HyperParams, rng=None,
              init: ChainState = None) -> ChainOutput:
    """Run ``n_burn + n_iter`` sweeps and keep every ``thin``-th post-burn-in draw."""
    y = _y(series)
    T, n = y.shape[0], spec.n
    if T < 2:
        raise ValidationError("need at least two observations")
    if rng is None:
        rng = np.random.default_rng(hp.seed)
    state = init.copy() if init is not None else init_chain(spec, y, hp, rng)
    S = hp.n_iter // hp.thin
    out = ChainOutput(
        theta=np.empty((S, T + 1, n)), omega_y=np.empty((S, T)),
        omega_theta=np.empty((S, T, n)), lambda_y=np.empty(S),
        lambda_theta=np.empty((S, n)), rho_y=np.empty(S),
        rho_theta=np.empty((S, n)), hyper=hp)
    start = time.perf_counter()
    fallbacks = 0
    s = 0
    for it in range(hp.n_burn + hp.n_iter):
        fallbacks += gibbs_sweep(state, y, spec, hp, rng, it)
        k = it - hp.n_burn + 1
        if k > 0 and k % hp.thin == 0 and s < S:
            out.theta[s] = state.theta
            out.omega_y[s] = state.omega_y
            out.omega_theta[s] = state.omega_theta
            out.lambda_y[s] = state.lambda_y
            out.lambda_theta[s] = state.lambda_theta
            out.rho_y[s] = state.rho_y
            out.rho_theta[s] = state.rho_theta
            s += 1
    out.n_sweeps = hp.n_burn + hp.n_iter
    out.runtime = time.perf_counter() - start
    out.ffbs_fallbacks = fallbacks
    out.chain_lengths = [S]
    return out


def _run_one(args):
    spec, y, hp, seed_seq = args
    return run_gibbs(spec, y, hp, np.random.default_rng(seed_seq))


def run_chains(spec, series, hp: HyperParams, n_chains=1, parallel=True):
    """Independent chains seeded from ``hp.seed``; a single chain uses the seed directly."""
    y = _y(series)
    if n_chains == 1:
        return [run_gibbs(spec, y, hp)]
    seeds = np.random.SeedSequence(hp.seed).spawn(n_chains)
    jobs = [(spec, y, hp, s) for s in seeds]
    if parallel:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor() as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


# --- joint-distribution checks ------------------------------------------------

def sample_prior(spec: ModelSpec, T: int, hp: HyperParams, rng):
    """Draw ``(state, y)`` from the full generative model."""
    n = spec.n
    rho_y = float(rng.gamma(hp.p, 1.0))
    rho_theta = rng.gamma(hp.p, 1.0, size=n)
    lambda_y = float(gamma_rate(rng, hp.q, hp.beta * rho_y))
    lambda_theta = gamma_rate(rng, hp.q, hp.beta * rho_theta)
    omega_y = gamma_rate(rng, hp.nu / 2, hp.nu / 2, size=T)
    nu_t = hp.nu_theta
    omega_theta = gamma_rate(rng, nu_t / 2, nu_t / 2, size=(T, n))
    theta = np.empty((T + 1, n))
    theta[0] = spec.m0 + psd_factor(spec.C0) @ rng.standard_normal(n)
    W = 1.0 / (lambda_theta[None, :] * omega_theta)
    for t in range(1, T + 1):
        theta[t] = spec.G @ theta[t - 1] + np.sqrt(W[t - 1]) * rng.standard_normal(n)
    state = ChainState(theta, lambda_y, lambda_theta, omega_y, omega_theta,
                       rho_y, rho_theta)
    return state, simulate_observations(state, spec, rng)


def simulate_observations(state: ChainState, spec, rng):
    """``y_t ~ N(F theta_t, 1 / (lambda_y omega_{y,t}))``."""
    mean = state.theta[1:] @ spec.F[0]
    sd = 1.0 / np.sqrt(state.lambda_y * state.omega_y)
    return mean + sd * rng.standard_normal(mean.shape[0])


def successive_conditional(spec, T, hp: HyperParams, n_sweeps, rng):
    """Alternate data simulation and one Gibbs sweep, starting from the prior.

    If the sampler is correct the marginal of every parameter stays equal to
    its prior. Returns the ``lambda_y`` trace.
    """
    state, y = sample_prior(spec, T, hp, rng)
    trace = np.empty(n_sweeps)
    for it in range(n_sweeps):
        gibbs_sweep(state, y, spec, hp, rng, it)
        y = simulate_observations(state, spec, rng)
        trace[it] = state.lambda_y
    return trace
