"""The exact individual sum rate next to plain quadrature as the cell grows.

The finite expression is an alternating sum with binomial weights, so it
is evaluated with as many bits as the cancellation needs.

Run:  python demos/03_closed_form_rate.py
"""

import time

from cdfsched.analytic import SinrDistribution
from cdfsched.rate import closed_form_rate, quadrature_rate

d = SinrDistribution(2, 1.5, (0.4, 2.0))
print(f"{'K0':>4} {'closed':>18} {'quadrature':>18} {'rel diff':>9} {'ms':>7}")
for K0 in (1, 2, 4, 8, 16, 32, 64):
    t = time.perf_counter()
    a = closed_form_rate(d, K0)
    ms = 1e3 * (time.perf_counter() - t)
    b = quadrature_rate(d, K0)
    print(f"{K0:4d} {a:18.14f} {b:18.14f} {abs(a - b) / b:9.1e} {ms:7.1f}")
