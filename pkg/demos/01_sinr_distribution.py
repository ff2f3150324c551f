"""Per-beam SINR of one user: simulated draws against the analytic CDF and its bounds.

Run:  python demos/01_sinr_distribution.py
"""

import numpy as np

from cdfsched.analytic import SinrDistribution, cdf_bounds, cdf_sinr
from cdfsched.scenario import Scenario
from cdfsched.validation import ks_critical_value, ks_test, sinr_samples

# a 2-antenna user with a strong and a weak interfering cell
cell = Scenario.from_rhos(2, [(2.0, [0.5, 3.0])])
d = SinrDistribution.for_user(cell, 0)
print("pole locations (a, multiplicity):", d.poles)

z = sinr_samples(cell, 200_000, seed=1)[:, 0]

print(f"\n{'x':>6} {'empirical':>10} {'F(x)':>10} {'lower':>10} {'upper':>10}")
for x in (0.05, 0.2, 0.5, 1.0, 2.0, 5.0):
    lb, ub = cdf_bounds(d, x)
    print(f"{x:6.2f} {np.mean(z <= x):10.5f} {cdf_sinr(d, x):10.5f} {lb:10.5f} {ub:10.5f}")

check = ks_test(z, lambda x: cdf_sinr(d, x), "sinr_cdf")
print(f"\nKS statistic {check.statistic:.5f}, 1% critical value {ks_critical_value(z.size):.5f}")
