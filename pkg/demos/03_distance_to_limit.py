"""
How far is runsort(pi) from the limit?
======================================

Bracket the rectangle distance between the scaled plot of runsort(pi) and
the limiting permuton on an m x m grid, for growing n.
"""

import numpy as np

from runsort import EmpiricalMeasure, RunsortPermuton, d_square_estimate, runsort, sample_uniform, substream
from runsort.empirical import mass_beyond_curve

R = RunsortPermuton()
seed = 7
for n in (1000, 10_000, 50_000):
    pi = sample_uniform(n, substream(seed, n))
    out = runsort(pi)
    est = d_square_estimate(EmpiricalMeasure(out), R, m=100)
    raw = d_square_estimate(EmpiricalMeasure(pi), R, m=100)
    beyond = mass_beyond_curve(out, 0.02)
    print(f"n={n:6d}  sorted: [{est.lower:.4f}, {est.upper:.4f}]  unsorted lower: {raw.lower:.4f}  "
          f"mass right of curve+0.02: {beyond:.4f}")

# the grid CDF of the sample is exact: integer numerators over n m^2
g = EmpiricalMeasure(out)
num, den = g.grid_cdf_numerators(4)
print("grid CDF numerators (m=4), denominator", den)
print(num)
print("analytic grid CDF (m=4)")
print(np.round(R.grid_cdf(4), 4))
