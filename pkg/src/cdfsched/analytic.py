"""Exact and bounding distributions of the per-beam SINR.

The per-beam SINR of a user with effective serving SNR ``rho0``, ``M``
antennas and interferers ``rho_b`` has tail

    T(x) = exp(-x/rho0) / ((1+x)^(M-1) * prod_b (1 + x/a_b)^M),   a_b = rho0/rho_b

which is the interference MGF evaluated at ``-x/rho0`` times the exponential
tail of the desired-beam gain.  All evaluation goes through ``log T`` so the
far tail never underflows before it has to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

POLE_RTOL = 1e-12


def _out(x, value):
    return float(value) if np.ndim(x) == 0 else value


def _check_nonneg(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("x must be >= 0")
    return arr


@dataclass(frozen=True)
class SinrDistribution:
    M: int
    rho_serving: float
    rho_interferers: tuple[float, ...] = ()

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not self.rho_serving > 0 or any(not r > 0 for r in self.rho_interferers):
            raise ValueError("effective SNRs must be positive")
        object.__setattr__(self, "rho_interferers", tuple(float(r) for r in self.rho_interferers))

    @classmethod
    def for_user(cls, scenario, k: int) -> "SinrDistribution":
        u = scenario.users[k]
        return cls(scenario.num_antennas, u.rho_serving, u.rho_interferers)

    @property
    def J(self) -> int:
        return len(self.rho_interferers)

    @property
    def ratios(self) -> np.ndarray:
        """Pole locations rho0/rho_b of the interferer factors."""
        return self.rho_serving / np.asarray(self.rho_interferers, dtype=float)

    @property
    def tail_order(self) -> int:
        """Number of interference exponentials, (J+1)M - 1."""
        return (self.J + 1) * self.M - 1

    @property
    def poles(self) -> tuple[tuple[float, int], ...]:
        """Distinct poles of the rational tail factor with multiplicities.

        Locations within ``POLE_RTOL`` of each other are merged; the merged
        location is the first one seen (1.0 for the intracell pole).
        """
        merged: list[list] = []
        raw = [(1.0, self.M - 1)] + [(float(a), self.M) for a in self.ratios]
        for loc, mult in raw:
            if mult == 0:
                continue
            for entry in merged:
                if abs(entry[0] - loc) <= POLE_RTOL * max(entry[0], loc):
                    entry[1] += mult
                    break
            else:
                merged.append([loc, mult])
        return tuple((loc, mult) for loc, mult in merged)

    @property
    def rho_all(self) -> np.ndarray:
        """Effective SNRs over b = 0..J, serving link first."""
        return np.array((self.rho_serving,) + self.rho_interferers)

    def cdf(self, x):
        return cdf_sinr(self, x)

    def pdf(self, x):
        return pdf_sinr(self, x)

    def log_tail(self, x):
        return log_tail(self, x)


def log_tail(d: SinrDistribution, x):
    """log(1 - F(x)), accurate for both tiny and huge x."""
    x = _check_nonneg(x)
    out = -x / d.rho_serving
    if d.M > 1:
        out = out - (d.M - 1) * np.log1p(x)
    for a in d.ratios:
        out = out - d.M * np.log1p(x / a)
    return _out(x, out)


def cdf_sinr(d: SinrDistribution, x):
    return _out(x, -np.expm1(np.asarray(log_tail(d, x))))


def hazard(d: SinrDistribution, x):
    """f/(1-F) = 1/rho0 + (M-1)/(x+1) + sum_b M/(x + a_b)."""
    x = _check_nonneg(x)
    s = 1.0 / d.rho_serving + (d.M - 1) / (x + 1.0)
    for a in d.ratios:
        s = s + d.M / (x + a)
    return _out(x, s)


def _hazard_derivative(d: SinrDistribution, x):
    x = np.asarray(x, dtype=float)
    ds = -(d.M - 1) / (x + 1.0) ** 2
    for a in d.ratios:
        ds = ds - d.M / (x + a) ** 2
    return ds


def pdf_sinr(d: SinrDistribution, x):
    x = _check_nonneg(x)
    return _out(x, np.exp(np.asarray(log_tail(d, x))) * np.asarray(hazard(d, x)))


def pdf_derivative(d: SinrDistribution, x):
    """f'(x) = T(x) (S'(x) - S(x)^2) with S the hazard rate."""
    x = _check_nonneg(x)
    s = np.asarray(hazard(d, x))
    t = np.exp(np.asarray(log_tail(d, x)))
    return _out(x, t * (_hazard_derivative(d, x) - s * s))


def mgf_interference(d: SinrDistribution, tau):
    """MGF of the aggregate interference-plus-intracell power.

    Product of gamma MGFs: (1 - rho0 tau)^-(M-1) * prod_b (1 - rho_b tau)^-M.
    """
    tau = np.asarray(tau, dtype=float)
    rates = list(d.rho_interferers) + ([d.rho_serving] if d.M > 1 else [])
    if rates and np.any(tau >= 1.0 / max(rates)):
        raise ValueError("tau outside the MGF convergence region")
    out = (1.0 - d.rho_serving * tau) ** (-(d.M - 1))
    for r in d.rho_interferers:
        out = out * (1.0 - r * tau) ** (-d.M)
    return float(out) if out.ndim == 0 else out


def _bound_log_tail(d: SinrDistribution, x, rho_b: float):
    return -x / d.rho_serving - d.tail_order * np.log1p(rho_b * x / d.rho_serving)


def cdf_bounds(d: SinrDistribution, x):
    """(lower, upper) bounds on the SINR CDF.

    Every interference exponential is replaced by the weakest (lower bound:
    heaviest tail) or strongest (upper bound) link among b = 0..J.
    """
    x = _check_nonneg(x)
    rho = d.rho_all
    lb = -np.expm1(_bound_log_tail(d, x, rho.min()))
    ub = -np.expm1(_bound_log_tail(d, x, rho.max()))
    return _out(x, lb), _out(x, ub)


def growth_function(d: SinrDistribution, x):
    """(1-F)/f, computed as the reciprocal hazard rate."""
    return _out(x, 1.0 / np.asarray(hazard(d, x)))


def gumbel_criterion(d: SinrDistribution, x):
    """Derivative of the growth function, -S'/S^2."""
    x = _check_nonneg(x)
    s = np.asarray(hazard(d, x))
    return _out(x, -_hazard_derivative(d, x) / (s * s))


def von_mises_ratio(d: SinrDistribution, x):
    """(F-1) f' / f^2, which tends to 1 for distributions in the Gumbel domain."""
    x = _check_nonneg(x)
    # T cancels analytically; forming it would underflow long before x=1e8
    s = np.asarray(hazard(d, x))
    return _out(x, (s * s - _hazard_derivative(d, x)) / (s * s))


# --- level crossings -----------------------------------------------------


@dataclass(frozen=True)
class LevelCrossing:
    K0: int
    w: float
    w_lb: float
    w_ub: float

    def residual(self, d: SinrDistribution) -> float:
        return abs(math.exp(log_tail(d, self.w)) - 1.0 / self.K0)


def _bisect_decreasing(f, lo: float, hi: float, target: float) -> float:
    """Root of f(x) = target for strictly decreasing f on [lo, hi]."""
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
    # pick the endpoint closer in value
    return lo if abs(f(lo) - target) <= abs(f(hi) - target) else hi


def _level_bracket(d: SinrDistribution, K0: int) -> float:
    lk = math.log(K0)
    return d.rho_serving * (lk + (d.J + 1) * d.M * math.log1p(lk)) + 64.0


def solve_level(d: SinrDistribution, K0: int) -> LevelCrossing:
    """Solve 1 - F(w) = 1/K0 by bisection on log T, inside the bound crossings."""
    if K0 < 2:
        raise ValueError("K0 must be >= 2")
    target = -math.log(K0)
    hi = _level_bracket(d, K0)
    rho = d.rho_all
    w_lb = _bisect_decreasing(lambda x: _bound_log_tail(d, x, rho.max()), 0.0, hi, target)
    w_ub = _bisect_decreasing(lambda x: _bound_log_tail(d, x, rho.min()), 0.0, hi, target)
    w = _bisect_decreasing(lambda x: log_tail(d, x), w_lb, w_ub, target)
    return LevelCrossing(K0=int(K0), w=w, w_lb=w_lb, w_ub=w_ub)


class AsymptoticLevel(NamedTuple):
    w_two_term: float
    w_ub_expansion: float
    w_lb_expansion: float


def asymptotic_level(d: SinrDistribution, K0) -> AsymptoticLevel:
    """Large-K0 expansions of the level crossing, natural logs throughout.

    The two-term form drops every constant; the bound expansions keep
    log(rho_b * log K0) with the weakest (upper side) or strongest (lower
    side) link.
    """
    if K0 < 16:
        raise ValueError("K0 must be >= 16")
    r0, n = d.rho_serving, d.tail_order
    lk = math.log(K0)
    rho = d.rho_all
    return AsymptoticLevel(
        w_two_term=r0 * lk - r0 * n * math.log(lk),
        w_ub_expansion=r0 * lk - r0 * n * math.log(rho.min() * lk),
        w_lb_expansion=r0 * lk - r0 * n * math.log(rho.max() * lk),
    )
