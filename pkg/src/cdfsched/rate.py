"""Individual sum rate of one user under CDF-based scheduling.

Two independent routes to the same number, in bits per channel use:

* :func:`individual_sum_rate_closed` -- the exact finite expression: binomial
  decomposition of d(F^K0), partial fractions of the rational part of the
  tail, and the I1/I2 integral families.  It is evaluated in arbitrary
  precision because the alternating sum and the high-order pole
  coefficients cancel far beyond what doubles can carry.
* :func:`individual_sum_rate_quadrature` -- adaptive quadrature of
  M/ln2 * int_0^inf (1 - F(x)^K0) / (1 + x) dx, stable for any K0.
"""

from __future__ import annotations

import math
import operator
import warnings
from dataclasses import dataclass

import gmpy2
import numpy as np
from scipy import integrate

from .analytic import SinrDistribution, _bisect_decreasing, log_tail, solve_level
from .special import FLOAT, integral_I1_seq, integral_I2_seq, mpfr_context

CLOSED_FORM_MAX_USERS = 64
_LN2 = math.log(2.0)


class ClosedFormRangeError(ValueError):
    pass


def pdf_decomposition_terms(K0: int) -> list[tuple[int, int]]:
    """Weights of d(F^K0) = sum_l w_l d(1 - T^(l+1)).

    w_l = K0 * C(K0-1, l) * (-1)^l / (l+1), which is the integer
    (-1)^l * C(K0, l+1).
    """
    if K0 < 1:
        raise ValueError("K0 must be >= 1")
    return [(ell, (-1) ** ell * math.comb(K0, ell + 1)) for ell in range(K0)]


@dataclass(frozen=True)
class PoleSystem:
    poles: tuple[tuple[float, int], ...]
    ell: int = 0

    @classmethod
    def from_distribution(cls, d: SinrDistribution, ell: int) -> "PoleSystem":
        return cls(tuple((a, n * (ell + 1)) for a, n in d.poles), ell)

    def evaluate(self, x):
        """The rational function prod_i (x + a_i)^-n_i."""
        out = 1.0
        for a, n in self.poles:
            out = out / (x + a) ** n
        return out


@dataclass(frozen=True)
class PartialFraction:
    terms: tuple  # (location a, order j, coefficient psi)

    def evaluate(self, x):
        return sum(psi / (x + a) ** j for a, j, psi in self.terms)

    def by_pole(self) -> dict:
        out: dict = {}
        for a, j, psi in self.terms:
            out.setdefault(a, {})[j] = psi
        return out


def _dot(a, b):
    return sum(map(operator.mul, a, b))


def partial_fractions(ps: PoleSystem, ctx=FLOAT) -> PartialFraction:
    """Coefficients of prod_i (x+a_i)^-n_i = sum_i sum_j psi_ij / (x+a_i)^j.

    Around x = -a the cofactor g(x) = prod_{i != a} (x+a_i)^-n_i has Taylor
    coefficients c_m from the logarithmic derivative:
    c_0 = g(-a), c_m = (1/m) sum_{j=1..m} s_j c_{m-j},
    s_j = sum_i -n_i (-1)^(j-1) / (a_i - a)^j.  Then psi for order n-m is c_m.
    """
    locs = [a for a, _ in ps.poles]
    if len(set(locs)) != len(locs):
        raise ValueError("pole locations must be distinct; merge duplicates first")
    poles = [(ctx.mpf(a), n) for a, n in ps.poles]
    terms = []
    for p, (a, n) in enumerate(poles):
        others = [(ai - a, ni) for q, (ai, ni) in enumerate(poles) if q != p]
        c0 = ctx.mpf(1)
        for di, ni in others:
            c0 = c0 / di**ni
        inv = [1 / di for di, _ in others]
        pw = list(inv)
        s = [None]
        for j in range(1, n):
            sign = 1 if j % 2 == 1 else -1
            s.append(-sign * sum(ni * pj for (_, ni), pj in zip(others, pw)))
            pw = [pj * ij for pj, ij in zip(pw, inv)]
        c = [c0]
        for m in range(1, n):
            c.append(_dot(s[1 : m + 1], c[::-1]) / m)
        for m in range(n):
            terms.append((a, n - m, c[m]))
    return PartialFraction(tuple(terms))


def _rate_integral(d: SinrDistribution, ell: int, ctx):
    """int_0^inf T(x)^(l+1) / (1+x) dx via partial fractions and I1/I2.

    Returns the value and the largest single term, whose ratio measures the
    cancellation.
    """
    n = ell + 1
    alpha = n / ctx.mpf(d.rho_serving)
    const = ctx.mpf(1)
    for a in d.ratios:
        const *= ctx.mpf(float(a)) ** (d.M * n)
    ps = PoleSystem.from_distribution(d, ell)
    if not ps.poles:
        v = const * integral_I2_seq(alpha, ctx.mpf(1), 1, ctx)[0]
        return v, abs(v)
    total = ctx.mpf(0)
    biggest = ctx.mpf(0)
    for a, coeffs in partial_fractions(ps, ctx).by_pole().items():
        top = max(coeffs)
        if a == 1:
            vals = integral_I2_seq(alpha, a, top + 1, ctx)
            parts = [psi * vals[j] for j, psi in coeffs.items()]
        else:
            vals = integral_I1_seq(alpha, a, top, ctx)
            parts = [psi * vals[j - 1] for j, psi in coeffs.items()]
        total += sum(parts)
        biggest = max(biggest, max(abs(p) for p in parts))
    return const * total, const * biggest


def _closed_form_at(d: SinrDistribution, K0: int, bits: int, ells=None):
    """Closed-form value (bits/channel use) and log2 of the largest cancelling term."""
    with mpfr_context(bits) as ctx:
        total = ctx.mpf(0)
        biggest = ctx.mpf(0)
        for ell, weight in pdf_decomposition_terms(K0):
            if ells is not None and ell not in ells:
                continue
            v, big = _rate_integral(d, ell, ctx)
            total += weight * v
            biggest = max(biggest, abs(weight) * big, abs(weight * v))
        value = d.M * total / ctx.log(2)
        return value, float(gmpy2.log2(biggest)) if biggest > 0 else 0.0


def individual_sum_rate_closed(
    scenario,
    k: int,
    *,
    max_users: int = CLOSED_FORM_MAX_USERS,
    rtol: float = 1e-14,
) -> float:
    """Closed-form individual sum rate K0 * R_k in bits per channel use."""
    K0 = scenario.num_users
    if K0 > max_users:
        raise ClosedFormRangeError(
            f"closed form limited to K0 <= {max_users} (got {K0}); "
            "use the quadrature method for larger cells"
        )
    d = SinrDistribution.for_user(scenario, k)
    return closed_form_rate(d, K0, rtol=rtol)


def closed_form_rate(d: SinrDistribution, K0: int, *, rtol: float = 1e-14) -> float:
    """Evaluate the closed form with enough working precision.

    A cheap pass over the highest-order term sizes the cancellation (pole
    coefficients peak there; the binomial weights add at most log2 C(K0, K0/2)
    bits); the working precision starts at that magnitude plus 80 guard bits and grows until two successive runs, at
    least 64 bits apart, agree to ``rtol``.
    """
    _, log2_big = _closed_form_at(d, K0, 64, ells={K0 - 1})
    log2_big += math.log2(math.comb(K0, K0 // 2))
    bits = max(128, int(log2_big) + 80)
    prev, _ = _closed_form_at(d, K0, bits)
    while bits < 200000:
        bits = int(bits * 1.25) + 64
        cur, _ = _closed_form_at(d, K0, bits)
        if abs(cur - prev) <= rtol * abs(cur):
            return float(cur)
        prev = cur
    raise ArithmeticError("closed form did not stabilise; use quadrature")


def _upper_cut(d: SinrDistribution, K0: int, tail_eps: float = 1e-14) -> float:
    """Point beyond which 1 - F^K0 < tail_eps (K0 * T < tail_eps suffices)."""
    target = math.log(tail_eps / K0)
    hi = d.rho_serving * (-target) + 1.0
    return _bisect_decreasing(lambda x: log_tail(d, x), 0.0, hi, target)


def quadrature_rate(d: SinrDistribution, K0: int) -> float:
    """M/ln2 * int (1 - F^K0)/(1+x) dx in bits, split at the level crossing."""
    if K0 < 1:
        raise ValueError("K0 must be >= 1")

    def log_fk(x):
        return K0 * math.log(-math.expm1(log_tail(d, x))) if x > 0 else -math.inf

    def head(x):  # F^K0 / (1+x)
        return math.exp(log_fk(x)) / (1.0 + x)

    def tail(x):  # (1 - F^K0) / (1+x)
        return -math.expm1(log_fk(x)) / (1.0 + x)

    w = solve_level(d, K0).w if K0 >= 2 else d.rho_serving
    cut = max(_upper_cut(d, K0), 2.0 * w)
    scale = d.rho_serving
    pts = sorted({w - j * scale for j in (0.5, 1, 2, 4, 8, 16) if 0 < w - j * scale < w})
    pts_b = sorted({w + j * scale for j in (0.5, 1, 2, 4, 8, 16, 32) if w < w + j * scale < cut})
    kw = dict(epsabs=0.0, epsrel=1e-10, limit=500)
    with warnings.catch_warnings():
        # QUADPACK's roundoff flag trips near double resolution at large K0
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        a, _ = integrate.quad(head, 0.0, w, points=pts or None, **kw)
        b, _ = integrate.quad(tail, w, cut, points=pts_b or None, **kw)
    return d.M * (math.log1p(w) - a + b) / _LN2


def individual_sum_rate_quadrature(scenario, k: int, K0: int | None = None) -> float:
    """Individual sum rate by quadrature; ``K0`` overrides the cell size."""
    d = SinrDistribution.for_user(scenario, k)
    return quadrature_rate(d, scenario.num_users if K0 is None else K0)


def individual_sum_rate(scenario, k: int, method: str = "quadrature", **kw) -> float:
    if method == "closed":
        return individual_sum_rate_closed(scenario, k, **kw)
    if method == "quadrature":
        return individual_sum_rate_quadrature(scenario, k, **kw)
    raise ValueError(f"unknown method {method!r}")


def sum_rate(scenario) -> float:
    """Cell sum rate (M/K0) sum_k int log2(1+t) d F_k^K0, i.e. mean of the R_hat_k."""
    return float(
        np.mean([individual_sum_rate_quadrature(scenario, k) for k in range(scenario.num_users)])
    )
