"""Successive-conditional check of the sampler against its prior.

For each seed, run T=10 data/parameter alternation and test uniformity of the
lambda_y prior CDF at thinned draws with a 10-bin chi-square.
"""
import argparse

import numpy as np
from scipy import stats

from rbdm.core import build_linear_growth
from rbdm.gibbs import HyperParams, successive_conditional
from rbdm.priors import Beta2Params, beta2_cdf

ap = argparse.ArgumentParser()
ap.add_argument("--seeds", type=int, default=20)
ap.add_argument("--sweeps", type=int, default=5000)
ap.add_argument("--inv-beta", type=float, default=1e4)
args = ap.parse_args()

hp = HyperParams(beta=1 / args.inv_beta)
spec = build_linear_growth((0.0, 0.0), np.eye(2))
prior = Beta2Params(hp.p, hp.q, hp.beta)
fails = 0
for seed in range(args.seeds):
    trace = successive_conditional(spec, 10, hp, args.sweeps, np.random.default_rng(seed))
    counts = np.histogram(beta2_cdf(trace[::50], prior), bins=10, range=(0, 1))[0]
    p = stats.chisquare(counts).pvalue
    fails += p < 0.01
    print(f"seed {seed:2d}  p={p:.3f}")
print(f"{fails}/{args.seeds} below 0.01")
