"""Scaled Beta2 and Student-t-Beta2 densities and samplers.

Gamma conventions: numpy's ``Generator.gamma`` takes (shape, scale). Every
call site below states which of the two it is passing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import DomainError


class PoleError(DomainError):
    """The density diverges at the requested point."""


@dataclass(frozen=True)
class Beta2Params:
    p: float = 1.0
    q: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("p", "q", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"Beta2 parameter {name} must be positive, got {v!r}")


@dataclass(frozen=True)
class StB2Params:
    nu: float = 1.0
    mu: float = 0.0
    scale: Beta2Params = Beta2Params()

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise DomainError(f"nu must be positive, got {self.nu!r}")
        if not math.isfinite(self.mu):
            raise DomainError(f"mu must be finite, got {self.mu!r}")


def _log_norm(p, q):
    return special.gammaln(p + q) - special.gammaln(p) - special.gammaln(q)


def _beta2_kernel(u, a, b, log_const, x_scale, params_exp_name):
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise DomainError("Beta2 density is only defined for x >= 0")
    if a < 1 and np.any(u == 0):
        raise PoleError(f"density has a pole at 0 when {params_exp_name} < 1")
    with np.errstate(divide="ignore"):
        logpdf = log_const + x_scale + special.xlogy(a - 1, u) - (a + b) * np.log1p(u)
    out = np.exp(logpdf)
    return out if out.ndim else float(out)


def beta2_precision_density(lam, params: Beta2Params):
    """Scaled Beta2 prior on a precision ``lam``.

    ``Gamma(p+q)/(Gamma(p)Gamma(q)) * beta * (beta*lam)^(q-1) / (1+beta*lam)^(p+q)``.
    This is the marginal of ``lam ~ Gamma(q, rate=beta*rho)``, ``rho ~ Gamma(p, 1)``.
    """
    p, q, b = params.p, params.q, params.beta
    return _beta2_kernel(np.asarray(lam, dtype=float) * b, q, p,
                         _log_norm(p, q), math.log(b), "q")


def beta2_variance_density(tau2, params: Beta2Params):
    """Scaled Beta2 density on a variance ``tau2``.

    ``Gamma(p+q)/(Gamma(p)Gamma(q)) / beta * (tau2/beta)^(p-1) / (1+tau2/beta)^(p+q)``,
    the law of :func:`beta2_sample`.
    """
    p, q, b = params.p, params.q, params.beta
    return _beta2_kernel(np.asarray(tau2, dtype=float) / b, p, q,
                         _log_norm(p, q), -math.log(b), "p")


def beta2_density(x, params: Beta2Params, parameterization: str = "precision"):
    """Scaled Beta2 density of ``x`` read either as a precision or a variance."""
    if parameterization == "precision":
        return beta2_precision_density(x, params)
    if parameterization == "variance":
        return beta2_variance_density(x, params)
    raise ValueError(f"unknown parameterization {parameterization!r}")


def beta2_cdf(x, params: Beta2Params, parameterization: str = "precision"):
    """Closed-form CDF via the regularized incomplete beta function."""
    x = np.asarray(x, dtype=float)
    if parameterization == "precision":
        u, a, b = x * params.beta, params.q, params.p
    elif parameterization == "variance":
        u, a, b = x / params.beta, params.p, params.q
    else:
        raise ValueError(f"unknown parameterization {parameterization!r}")
    out = special.betainc(a, b, u / (1.0 + u))
    return out if out.ndim else float(out)


def beta2_sample(params: Beta2Params, rng: np.random.Generator, size=None):
    """Draw a variance from the scaled Beta2 as a ratio of gammas.

    ``rho ~ Gamma(q, scale=1)``, then ``tau2 ~ Gamma(p, scale=beta/rho)``.
    """
    rho = rng.gamma(params.q, 1.0, size=size)            # scale 1
    return rng.gamma(params.p, params.beta / rho, size=size)  # scale beta/rho


def stb2_density_1111(theta, mu=0.0, beta=1.0):
    """Student-t-Beta2(1, 1, 1, beta) density in closed form."""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    sb = math.sqrt(beta)
    d = np.abs(np.asarray(theta, dtype=float) - mu)
    out = 1.0 / (2.0 * sb * (1.0 + d / sb) ** 2)
    return out if out.ndim else float(out)


def cauchy_density(theta):
    theta = np.asarray(theta, dtype=float)
    out = 1.0 / (math.pi * (1.0 + theta ** 2))
    return out if out.ndim else float(out)


def normal_density(theta, variance=1.0):
    theta = np.asarray(theta, dtype=float)
    out = np.exp(-0.5 * theta ** 2 / variance) / math.sqrt(2 * math.pi * variance)
    return out if out.ndim else float(out)


# Normal reference curve used in the tail comparison figure.
TAIL_NORMAL_VARIANCE = 2.19


def tail_comparison_table(grid, beta=1.0):
    """Rows ``(theta, stb2, cauchy, normal)`` for the prior tail figure."""
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("grid must be non-empty")
    return np.column_stack([
        grid,
        stb2_density_1111(grid, 0.0, beta),
        cauchy_density(grid),
        normal_density(grid, TAIL_NORMAL_VARIANCE),
    ])
