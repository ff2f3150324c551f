"""How one user's individual sum rate grows with the number of users.

The rate approaches M log2(e) ln ln K0, slowly; the level crossing w sits
between the crossings of the two bounding distributions.

Run:  python demos/04_scaling_law.py
"""

from cdfsched.analytic import SinrDistribution
from cdfsched.scaling import gumbel_attraction_check, scaling_ratio_sweep
from cdfsched.scenario import Scenario

cell = Scenario.from_rhos(2, [(2.0, [0.5, 3.0])])
sweep = scaling_ratio_sweep(cell, 0, [10**j for j in range(2, 13)])

print(f"{'K0':>8} {'w_lb':>8} {'w':>8} {'w_ub':>8} {'rate':>8} {'ratio':>7} {'ceiling':>8}")
for r in sweep.rows:
    print(
        f"{r.K0:8.0e} {r.w_lb:8.3f} {r.w:8.3f} {r.w_ub:8.3f} "
        f"{r.rate_bits:8.4f} {r.scaling_ratio:7.4f} {r.eq27_bound:8.4f}"
    )

g = gumbel_attraction_check(SinrDistribution.for_user(cell, 0))
print("\ngrowth-function slope at x = 1e0 .. 1e8:")
print(" ".join(f"{v:.1e}" for v in g.criterion))
print("Gumbel attraction check passed:", g.passed)
