"""Tabulate the Student-t-Beta2(1,1,1,1), Cauchy and wide normal densities.

Writes tails.csv and prints the crossover and the far-tail ratio to Cauchy.
"""
import sys

import numpy as np
from scipy import optimize

from rbdm.io import write_tails
from rbdm.priors import cauchy_density, stb2_density_1111

out = sys.argv[1] if len(sys.argv) > 1 else "tails.csv"
write_tails(out)
cross = optimize.brentq(lambda d: stb2_density_1111(d) - cauchy_density(d), 1, 10)
print(f"wrote {out}")
print(f"stb2 exceeds Cauchy for |theta| > {cross:.3f}")
for d in (10, 100, 1e4):
    print(f"  ratio at {d:g}: {stb2_density_1111(d) / cauchy_density(d):.4f}")
print(f"  limit pi/2 = {np.pi / 2:.4f}")
