"""Large-K0 behaviour: Gumbel attraction, level crossings, concentration and the rate scaling law.

Natural logarithms throughout; rates are in bits, so the scaling-law
denominator is written M * log2(e) * ln ln K0 to keep the ratio base-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .analytic import (
    SinrDistribution,
    asymptotic_level,
    gumbel_criterion,
    solve_level,
    von_mises_ratio,
)
from .rate import quadrature_rate
from .scheduler import simulate

MC_MAX_USERS = 10_000
_LOG2E = 1.0 / math.log(2.0)


def concentration_window(d: SinrDistribution, K0) -> tuple[float, float]:
    """Interval expected to hold the winning SINR with probability 1 - O(1/ln K0).

    lo = rho0 ln K0 - rho0 (J+1) M ln ln K0 and
    hi = rho0 ln K0 - rho0 ((J+1) M - 2) ln ln K0; the O(ln ln ln K0)
    corrections are left out, so hi - lo = 2 rho0 ln ln K0 exactly.
    """
    if K0 < 16:
        raise ValueError("K0 must be >= 16")
    r0 = d.rho_serving
    lk = math.log(K0)
    llk = math.log(lk)
    n = (d.J + 1) * d.M
    return r0 * lk - r0 * n * llk, r0 * lk - r0 * (n - 2) * llk


def scaling_denominator(M: int, K0) -> float:
    """M log2(e) ln ln K0: the scaling law M ln ln K0 expressed in bits."""
    return M * _LOG2E * math.log(math.log(K0))


def eq27_bound(d: SinrDistribution, K0, w: float) -> float:
    """Jensen-type ceiling M log2(1 + w + rho0 ln ln K0) on the individual sum rate."""
    return d.M * math.log2(1.0 + w + d.rho_serving * math.log(math.log(K0)))


@dataclass
class ScalingRow:
    K0: int
    w: float
    w_two_term: float
    w_lb: float
    w_ub: float
    lo: float
    hi: float
    rate_bits: float
    scaling_ratio: float
    eq27_bound: float
    mc_in_window_freq: float | None = None


@dataclass
class ScalingSweep:
    user: int
    rows: list

    @property
    def k0_grid(self) -> list[int]:
        return [r.K0 for r in self.rows]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    @staticmethod
    def columns(with_mc: bool = False) -> list[str]:
        names = [f.name for f in fields(ScalingRow)]
        return names if with_mc else names[:-1]


def _check_grid(k0_grid) -> list[int]:
    grid = [int(k) for k in k0_grid]
    if not grid:
        raise ValueError("empty K0 grid")
    if grid[0] < 16:
        raise ValueError("K0 grid must start at 16 or above")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("K0 grid must be strictly increasing")
    return grid


def in_window_frequency(scenario, k: int, K0: int, trials: int, seed: int = 0, workers=None) -> float:
    """Fraction of (trial, beam) winners whose SINR falls in the concentration window.

    The cell is K0 statistically identical copies of user k, which is the
    setting the individual sum rate describes.
    """
    d = SinrDistribution.for_user(scenario, k)
    lo, hi = concentration_window(d, K0)
    rep = simulate(scenario.clone_user(k, K0), trials, seed, workers=workers, keep_outcomes=True)
    z = rep.true_sinr
    return float(np.mean((z >= lo) & (z <= hi)))


def scaling_ratio_sweep(
    scenario, k: int, k0_grid, *, mc_trials: int | None = None, seed: int = 0, workers=None
) -> ScalingSweep:
    """Level crossings, window, rate and scaling ratio of user k at every K0 in the grid.

    With ``mc_trials`` the in-window frequency is simulated for grid points
    up to ``MC_MAX_USERS``; larger cells get NaN.
    """
    grid = _check_grid(k0_grid)
    d = SinrDistribution.for_user(scenario, k)
    rows = []
    for K0 in grid:
        lev = solve_level(d, K0)
        lo, hi = concentration_window(d, K0)
        rate = quadrature_rate(d, K0)
        freq = None
        if mc_trials:
            freq = (
                in_window_frequency(scenario, k, K0, mc_trials, seed, workers)
                if K0 <= MC_MAX_USERS
                else math.nan
            )
        rows.append(
            ScalingRow(
                K0=K0,
                w=lev.w,
                w_two_term=asymptotic_level(d, K0).w_two_term,
                w_lb=lev.w_lb,
                w_ub=lev.w_ub,
                lo=lo,
                hi=hi,
                rate_bits=rate,
                scaling_ratio=rate / scaling_denominator(d.M, K0),
                eq27_bound=eq27_bound(d, K0, lev.w),
                mc_in_window_freq=freq,
            )
        )
    return ScalingSweep(user=k, rows=rows)


def fit_lll_constant(K0, residual) -> np.ndarray:
    """Pointwise c in residual = c * ln ln ln K0."""
    K0 = np.asarray(K0, dtype=float)
    return np.asarray(residual, dtype=float) / np.log(np.log(np.log(K0)))


@dataclass
class GumbelReport:
    x: np.ndarray
    criterion: np.ndarray
    von_mises: np.ndarray
    monotone: bool
    final_small: bool
    von_mises_converges: bool

    @property
    def passed(self) -> bool:
        return self.monotone and self.final_small and self.von_mises_converges


def gumbel_attraction_check(d: SinrDistribution, tol: float = 1e-9) -> GumbelReport:
    """Growth-function derivative and von Mises ratio on x = 10^0 .. 10^8.

    Passes when |g'| does not increase from x = 100 on, ends below ``tol``,
    and |(F-1) f'/f^2 - 1| does the same (within 1e-6 at the last point).
    """
    x = 10.0 ** np.arange(0, 9)
    crit = np.asarray(gumbel_criterion(d, x))
    vm = np.asarray(von_mises_ratio(d, x))
    mag = np.abs(crit[2:])
    vdev = np.abs(vm[2:] - 1.0)
    return GumbelReport(
        x=x,
        criterion=crit,
        von_mises=vm,
        monotone=bool(np.all(np.diff(mag) <= 0)),
        final_small=bool(mag[-1] < tol),
        von_mises_converges=bool(np.all(np.diff(vdev) <= 0) and vdev[-1] < 1e-6),
    )
