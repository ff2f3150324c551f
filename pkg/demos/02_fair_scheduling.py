"""Scheduling users with very different SNRs on their CDF values.

Every user wins each beam with probability 1/K0, and K0 times a user's
simulated rate lands on its analytic individual sum rate.

Run:  python demos/02_fair_scheduling.py
"""

import numpy as np

from cdfsched.rate import individual_sum_rate_quadrature
from cdfsched.scenario import Scenario
from cdfsched.scheduler import simulate

cell = Scenario.from_rhos(
    2,
    [
        (10.0, [0.3]),  # near the base station
        (1.0, [0.8, 0.2]),
        (0.1, [0.05]),  # cell edge, 100x weaker
    ],
)
rep = simulate(cell, 200_000, seed=3)

share = rep.selection_counts / rep.trials
print("selection share per user and beam (target 1/3):")
print(np.array2string(share, precision=4))

print(f"\n{'user':>4} {'MC K0*R_k':>10} {'+-':>8} {'analytic':>10}")
for k in range(cell.num_users):
    print(
        f"{k:4d} {rep.per_user_individual_sum_rate[k]:10.4f} "
        f"{rep.per_user_individual_sum_rate_stderr[k]:8.4f} {individual_sum_rate_quadrature(cell, k):10.4f}"
    )
print(f"\nsum rate {rep.mean_sum_rate:.4f} +- {rep.sum_rate_stderr:.4f} bits/use")
print(f"trials where one user took both beams: {rep.multi_beam_collision_rate:.3f}")
