"""Statistical checks tying the simulator to the analytic distributions.

KS tests use the 1% asymptotic critical value with Stephens' finite-sample
correction, c(n) = 1.628 / (sqrt(n) + 0.12 + 0.11/sqrt(n)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .analytic import SinrDistribution, cdf_sinr
from .channel import ChannelStreams, draw_block, sinr_block
from .rate import CLOSED_FORM_MAX_USERS, individual_sum_rate_closed, individual_sum_rate_quadrature
from .scenario import Scenario, UserChannelProfile
from .scheduler import chunk_size, simulate

_KS_COEFF = {0.01: 1.628, 0.05: 1.358, 0.10: 1.224}


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Critical D at level ``alpha``; tabulated coefficients for 1/5/10 %, else sqrt(-ln(alpha/2)/2)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    coeff = _KS_COEFF.get(alpha, math.sqrt(-0.5 * math.log(alpha / 2)))
    r = math.sqrt(n)
    return coeff / (r + 0.12 + 0.11 / r)


@dataclass
class Check:
    name: str
    statistic: float
    threshold: float
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: {self.statistic:.6g} vs {self.threshold:.6g}"


def ks_test(sample, cdf, name: str = "ks", alpha: float = 0.01) -> Check:
    """One-sample KS statistic of ``sample`` against the callable ``cdf``."""
    sample = np.asarray(sample, dtype=float).ravel()
    d = stats.kstest(sample, cdf).statistic
    crit = ks_critical_value(sample.size, alpha)
    return Check(name, float(d), crit, bool(d < crit))


def binomial_check(count: int, n: int, p: float, name: str = "binomial", sigmas: float = 3.0) -> Check:
    """|count - n p| within ``sigmas`` binomial standard deviations, in units of sigma."""
    sd = math.sqrt(n * p * (1.0 - p))
    z = abs(count - n * p) / sd if sd > 0 else (0.0 if count == n * p else math.inf)
    return Check(name, z, sigmas, bool(z <= sigmas))


def sinr_samples(scenario, trials: int, seed: int = 0, beam: int = 0) -> np.ndarray:
    """SINR of every user on one beam over ``trials`` draws, shape (trials, K0)."""
    streams = ChannelStreams(scenario, seed)
    step = chunk_size(scenario)
    out = np.empty((trials, scenario.num_users))
    for t0 in range(0, trials, step):
        n = min(step, trials - t0)
        out[t0 : t0 + n] = sinr_block(streams, draw_block(streams, t0, n))[:, :, beam]
    return out


def corrupt(scenario, factor: float) -> Scenario:
    """Same cell with every serving SNR scaled by ``factor`` (analytic/simulation mismatch)."""
    users = tuple(
        UserChannelProfile(u.user_id, u.rho_serving * factor, u.rho_interferers) for u in scenario.users
    )
    return Scenario(scenario.num_antennas, users)


def run_validation(
    scenario,
    trials: int,
    seed: int = 0,
    *,
    corrupt_rho: float | None = None,
    workers=None,
    rate_tol: float = 1e-6,
) -> list[Check]:
    """The full property suite; the analytic side uses the corrupted cell when asked."""
    model = corrupt(scenario, corrupt_rho) if corrupt_rho else scenario
    dists = [SinrDistribution.for_user(model, k) for k in range(model.num_users)]
    K, M = scenario.num_users, scenario.num_antennas
    checks = []

    z = sinr_samples(scenario, trials, seed)
    for k, d in enumerate(dists):
        checks.append(ks_test(z[:, k], lambda x, d=d: cdf_sinr(d, x), f"sinr_cdf user {k}"))
        v = cdf_sinr(d, z[:, k])
        checks.append(ks_test(v, stats.uniform.cdf, f"virtual_uniform user {k}"))

    rep = simulate(scenario, trials, seed + 1, workers=workers, keep_outcomes=True)
    for k in range(K):
        for m in range(M):
            checks.append(
                binomial_check(
                    int(rep.selection_counts[k, m]), trials, 1.0 / K, f"fairness user {k} beam {m}"
                )
            )
    if K > 1:
        checks.append(
            ks_test(rep.virtual_sinr, lambda u: np.clip(u, 0.0, 1.0) ** K, "winner_virtual max-of-uniforms")
        )
        for k, d in enumerate(dists):
            won = rep.true_sinr[rep.selected_user == k]
            if won.size:
                checks.append(
                    ks_test(won, lambda x, d=d: cdf_sinr(d, x) ** K, f"winner_cdf user {k}")
                )

    if K <= CLOSED_FORM_MAX_USERS:
        for k in range(K):
            a = individual_sum_rate_closed(model, k)
            b = individual_sum_rate_quadrature(model, k)
            rel = abs(a - b) / abs(b)
            checks.append(Check(f"closed_vs_quadrature user {k}", rel, rate_tol, rel <= rate_tol))
    return checks
