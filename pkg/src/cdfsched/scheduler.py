"""CDF-based scheduling and the Monte Carlo rate and fairness engine.

Each user maps its SINR through its own CDF; the beam goes to the largest
mapped value.  Since F is increasing and F = 1 - exp(log T), the winner is
found as the smallest log-tail, which keeps the comparison exact even
when F itself has rounded to 1.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import SinrDistribution, cdf_sinr, log_tail
from .channel import ChannelStreams, draw_block, sinr_block

_LN2 = math.log(2.0)
WORKERS_ENV = "CDFSCHED_WORKERS"
_CHUNK_ELEMENTS = 1 << 19


def cdf_transform(d: SinrDistribution, z):
    """Virtual SINR F_k(z), uniform on [0, 1] when z follows user k's law."""
    return cdf_sinr(d, z)


@dataclass
class ScheduleOutcome:
    selected_user: np.ndarray  # (M,)
    virtual_sinr: np.ndarray  # (M,)
    true_sinr: np.ndarray  # (M,)
    trial_rate: float


def schedule(draw, distributions) -> ScheduleOutcome:
    """Per-beam argmax of the virtual SINR; ties go to the lowest user index."""
    sinr = np.asarray(getattr(draw, "sinr", draw), dtype=float)
    if sinr.ndim != 2 or sinr.shape[0] != len(distributions):
        raise ValueError("SINR matrix must be K0 x M with one distribution per user")
    lt = np.array([log_tail(d, row) for d, row in zip(distributions, sinr)])
    winners = np.argmin(lt, axis=0)
    beams = np.arange(sinr.shape[1])
    z = sinr[winners, beams]
    return ScheduleOutcome(
        selected_user=winners,
        virtual_sinr=-np.expm1(lt[winners, beams]),
        true_sinr=z,
        trial_rate=float(np.sum(np.log1p(z)) / _LN2),
    )


class _BlockTail:
    """Vectorized log-tail of every user's own distribution over an (n, K, M) block."""

    def __init__(self, scenario):
        self.M = scenario.num_antennas
        self.rho0 = np.array([u.rho_serving for u in scenario.users])[None, :, None]
        # interferers grouped by rank, so each pass touches one ratio per user
        self.ranks = []
        depth = max(u.num_interferers for u in scenario.users)
        for r in range(depth):
            idx = np.array([k for k, u in enumerate(scenario.users) if u.num_interferers > r])
            a = np.array([scenario.users[k].rho_serving / scenario.users[k].rho_interferers[r] for k in idx])
            self.ranks.append((idx, a[None, :, None]))

    def __call__(self, z: np.ndarray) -> np.ndarray:
        out = -z / self.rho0
        if self.M > 1:
            out -= (self.M - 1) * np.log1p(z)
        for idx, a in self.ranks:
            out[:, idx, :] -= self.M * np.log1p(z[:, idx, :] / a)
        return out


@dataclass
class _Moments:
    """Count, mean and sum of squared deviations; merged with Chan's update."""

    n: int
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def of(cls, x: np.ndarray) -> "_Moments":
        mean = x.mean(axis=0)
        return cls(x.shape[0], mean, ((x - mean) ** 2).sum(axis=0))

    @classmethod
    def from_sums(cls, n: int, s1: np.ndarray, s2: np.ndarray) -> "_Moments":
        """From the sum and sum of squares of n observations (all-zero rows implied)."""
        mean = s1 / n
        return cls(n, mean, np.maximum(s2 - s1 * mean, 0.0))

    def merge(self, other: "_Moments") -> "_Moments":
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.n / n)
        m2 = self.m2 + other.m2 + delta * delta * (self.n * other.n / n)
        return _Moments(n, mean, m2)

    def stderr(self) -> np.ndarray:
        if self.n < 2:
            return np.full(np.shape(self.mean), np.nan)
        return np.sqrt(self.m2 / (self.n - 1) / self.n)


@dataclass
class _ChunkResult:
    total: _Moments  # scalar trial rate
    per_user: _Moments  # (K,) per-trial user rate
    per_user_beam: _Moments  # (K, M)
    counts: np.ndarray
    collisions: int
    winners: np.ndarray | None = None
    true_sinr: np.ndarray | None = None
    virtual_sinr: np.ndarray | None = None


@dataclass
class SimulationReport:
    trials: int
    seed: int
    mean_sum_rate: float
    sum_rate_stderr: float
    per_user_rate: np.ndarray
    per_user_rate_stderr: np.ndarray
    per_user_beam_rate: np.ndarray
    per_user_beam_rate_stderr: np.ndarray
    selection_counts: np.ndarray
    per_user_individual_sum_rate: np.ndarray
    per_user_individual_sum_rate_stderr: np.ndarray
    multi_beam_collision_rate: float
    # per-trial winners and SINRs, (trials, M); only kept on request
    selected_user: np.ndarray | None = field(default=None, repr=False)
    true_sinr: np.ndarray | None = field(default=None, repr=False)
    virtual_sinr: np.ndarray | None = field(default=None, repr=False)


def chunk_size(scenario) -> int:
    """Trials per work unit; a function of the scenario only, never of the worker count."""
    per_trial = scenario.num_users * scenario.num_antennas * 4 + scenario.num_antennas**2
    return max(1, _CHUNK_ELEMENTS // per_trial)


def _run_chunk(streams, tails, t0, n, keep):
    K, M = streams.K, streams.M
    z = sinr_block(streams, draw_block(streams, t0, n))
    lt = tails(z)
    win = np.argmin(lt, axis=1)  # (n, M)
    zw = np.take_along_axis(z, win[:, None, :], axis=1)[:, 0, :]
    r = np.log1p(zw) / _LN2
    # per-user quantities are sparse (one winner per beam), so they are
    # accumulated by user index instead of over a dense (n, K, M) array
    counts = np.empty((K, M), dtype=np.int64)
    s1 = np.empty((K, M))
    s2 = np.empty((K, M))
    for m in range(M):
        counts[:, m] = np.bincount(win[:, m], minlength=K)
        s1[:, m] = np.bincount(win[:, m], weights=r[:, m], minlength=K)
        s2[:, m] = np.bincount(win[:, m], weights=r[:, m] ** 2, minlength=K)
    if M > 1:
        # a user holding several beams in one trial: group by (trial, user)
        keys, inv = np.unique((np.arange(n)[:, None] * K + win).ravel(), return_inverse=True)
        per_trial_user = np.bincount(inv, weights=r.ravel())
        users = keys % K
        u1 = np.bincount(users, weights=per_trial_user, minlength=K)
        u2 = np.bincount(users, weights=per_trial_user**2, minlength=K)
        srt = np.sort(win, axis=1)
        collisions = int(np.count_nonzero(np.any(srt[:, 1:] == srt[:, :-1], axis=1)))
    else:
        u1, u2 = s1[:, 0], s2[:, 0]
        collisions = 0
    out = _ChunkResult(
        total=_Moments.of(r.sum(axis=1)),
        per_user=_Moments.from_sums(n, u1, u2),
        per_user_beam=_Moments.from_sums(n, s1, s2),
        counts=counts,
        collisions=collisions,
    )
    if keep:
        out.winners = win
        out.true_sinr = zw
        out.virtual_sinr = -np.expm1(np.take_along_axis(lt, win[:, None, :], axis=1)[:, 0, :])
    return out


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return n


def simulate(
    scenario,
    trials: int,
    seed: int = 0,
    *,
    workers: int | None = None,
    keep_outcomes: bool = False,
) -> SimulationReport:
    """Run ``trials`` independent draw-schedule rounds.

    Work is split into fixed chunks of trials; chunk results are merged in
    trial order, so the report is bit-identical for any worker count.
    """
    if int(trials) < 1:
        raise ValueError("trials must be >= 1")
    trials = int(trials)
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    streams = ChannelStreams(scenario, seed)
    tails = _BlockTail(scenario)
    step = chunk_size(scenario)
    starts = list(range(0, trials, step))

    def job(t0):
        return _run_chunk(streams, tails, t0, min(step, trials - t0), keep_outcomes)

    acc = None
    kept = []
    counts = 0
    collisions = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for res in pool.map(job, starts):
            if acc is None:
                acc = [res.total, res.per_user, res.per_user_beam]
            else:
                acc = [a.merge(b) for a, b in zip(acc, (res.total, res.per_user, res.per_user_beam))]
            counts = counts + res.counts
            collisions += res.collisions
            if keep_outcomes:
                kept.append((res.winners, res.true_sinr, res.virtual_sinr))
    total, per_user, per_user_beam = acc
    K = scenario.num_users
    report = SimulationReport(
        trials=trials,
        seed=int(seed),
        mean_sum_rate=float(total.mean),
        sum_rate_stderr=float(total.stderr()),
        per_user_rate=per_user.mean,
        per_user_rate_stderr=per_user.stderr(),
        per_user_beam_rate=per_user_beam.mean,
        per_user_beam_rate_stderr=per_user_beam.stderr(),
        selection_counts=counts.astype(np.int64),
        per_user_individual_sum_rate=K * per_user.mean,
        per_user_individual_sum_rate_stderr=K * per_user.stderr(),
        multi_beam_collision_rate=collisions / trials,
    )
    if keep_outcomes:
        report.selected_user = np.concatenate([k[0] for k in kept])
        report.true_sinr = np.concatenate([k[1] for k in kept])
        report.virtual_sinr = np.concatenate([k[2] for k in kept])
    return report
