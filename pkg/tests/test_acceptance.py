"""Acceptance criteria 1-11, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; each test prints its line
directly to the terminal.
"""

import itertools
import math
import time
from pathlib import Path

import numpy as np
from scipy import stats

from _oracles import e1_quad, i1_quad, i2_quad
from cdfsched.analytic import SinrDistribution, cdf_sinr, solve_level, asymptotic_level
from cdfsched.cli import main
from cdfsched.rate import closed_form_rate, individual_sum_rate_quadrature, quadrature_rate
from cdfsched.scaling import (
    concentration_window,
    fit_lll_constant,
    gumbel_attraction_check,
    scaling_ratio_sweep,
)
from cdfsched.scenario import Scenario, load_scenario
from cdfsched.scheduler import simulate
from cdfsched.special import exp_int_E1, integral_I1, integral_I2
from cdfsched.validation import binomial_check, ks_critical_value, sinr_samples

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _grid_profiles():
    """M x J x K0 x 3 random profiles, rho uniform on [0.1, 10], seeded."""
    rng = np.random.default_rng(0)
    out = []
    for M, J, K0 in itertools.product((1, 2, 4), (0, 1, 2, 3), (1, 2, 8, 32)):
        for _ in range(3):
            rho = rng.uniform(0.1, 10.0, size=J + 1)
            out.append((SinrDistribution(M, rho[0], tuple(rho[1:])), K0))
    return out


def test_a01_closed_form_vs_quadrature(report):
    t0 = time.perf_counter()
    worst = 0.0
    for d, K0 in _grid_profiles():
        a = closed_form_rate(d, K0)
        b = quadrature_rate(d, K0)
        worst = max(worst, abs(a - b) / abs(b))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-6 and elapsed < 30.0
    report("A1", ok, f"closed vs quadrature, 432 cases: max rel {worst:.2e} (<= 1e-6), {elapsed:.1f}s (< 30s)")


KS_CONFIGS = [
    (1, [(0.5, [2.0]), (4.0, [])]),
    (2, [(1.0, [0.5]), (2.0, [0.5, 3.0]), (0.3, [])]),
    (3, [(7.0, [7.0, 0.02]), (0.8, [1.5])]),
    (4, [(0.3, [1.0, 0.1, 5.0]), (9.0, [0.2])]),
    (2, [(10.0, [0.1, 0.1, 0.1]), (0.1, [10.0])]),
]


def test_a02_sinr_distribution_ks(report):
    t0 = time.perf_counter()
    n = 1_000_000
    worst = 0.0
    for i, (M, prof) in enumerate(KS_CONFIGS):
        s = Scenario.from_rhos(M, prof)
        z = sinr_samples(s, n, seed=100 + i)
        for k in range(s.num_users):
            d = SinrDistribution.for_user(s, k)
            D = stats.kstest(z[:, k], lambda x: cdf_sinr(d, x)).statistic
            worst = max(worst, D / ks_critical_value(n))
    elapsed = time.perf_counter() - t0
    ok = worst < 1.0 and elapsed < 60.0
    report("A2", ok, f"SINR CDF KS, 5 configs x 1e6 draws: max D/D_crit {worst:.3f} (< 1), {elapsed:.1f}s (< 60s)")


def test_a03_fairness(report):
    trials = 100_000
    worst = 0.0
    for K0 in (2, 4, 16):
        rho0 = np.geomspace(0.1, 10.0, K0)  # 100:1 spread across users
        prof = [(r, [r / 3.0]) for r in rho0[::-1]]
        s = Scenario.from_rhos(2, prof)
        rep = simulate(s, trials, seed=K0)
        for k, m in itertools.product(range(K0), range(2)):
            c = binomial_check(int(rep.selection_counts[k, m]), trials, 1.0 / K0)
            worst = max(worst, c.statistic)
    report("A3", worst <= 3.0, f"per-beam selection frequency, K0 in {{2,4,16}}: max |z| {worst:.2f} (<= 3 sigma)")


def test_a04_winner_distribution(report):
    K0 = 8
    rho0 = np.geomspace(0.2, 8.0, K0)
    s = Scenario.from_rhos(2, [(r, [0.5 + 0.1 * k]) for k, r in enumerate(rho0)])
    rep = simulate(s, 100_000, seed=44, keep_outcomes=True)
    worst = 0.0
    for k in range(K0):
        d = SinrDistribution.for_user(s, k)
        won = rep.true_sinr[rep.selected_user == k]
        D = stats.kstest(won, lambda x: cdf_sinr(d, x) ** K0).statistic
        worst = max(worst, D / ks_critical_value(won.size))
    report("A4", worst < 1.0, f"winner SINR vs F^K0 (K0=8, 1e5 trials): max D/D_crit {worst:.3f} (< 1)")


def test_a05_monte_carlo_vs_analytic(report):
    s = load_scenario(CONFIGS / "acceptance.json")
    rep = simulate(s, 1_000_000, seed=5)
    z = []
    for k in range(s.num_users):
        ref = individual_sum_rate_quadrature(s, k)
        z.append(abs(rep.per_user_individual_sum_rate[k] - ref) / rep.per_user_individual_sum_rate_stderr[k])
    worst = max(z)
    report("A5", worst <= 3.0, f"K0 x empirical rate vs quadrature, 4 users, 1e6 trials: max {worst:.2f} SE (<= 3)")


LEVEL_CONFIGS = [
    SinrDistribution(2, 1.0, (0.5,)),
    SinrDistribution(2, 2.0, (0.5, 3.0)),
    SinrDistribution(4, 0.3, (1.0, 0.1, 5.0)),
    SinrDistribution(1, 3.0, (0.2,)),
]


def test_a06_level_crossing_bounds(report):
    grid = [10**j for j in range(3, 10)]
    bracket_ok = True
    worst_res = 0.0
    drift = []
    for d in LEVEL_CONFIGS:
        ws = []
        for K0 in grid:
            lev = solve_level(d, K0)
            bracket_ok &= lev.w_lb <= lev.w <= lev.w_ub
            worst_res = max(worst_res, lev.residual(d))
            ws.append(lev.w - asymptotic_level(d, K0).w_two_term)
        c = fit_lll_constant(grid, np.abs(ws))
        # stable constant over the top decade, relative to the level scale rho0
        drift.append(abs(c[-1] - c[-2]) / max(abs(c[-1]), abs(c[-2]), d.rho_serving))
    ok = bracket_ok and worst_res <= 1e-12 and max(drift) <= 0.15
    report(
        "A6",
        ok,
        f"w_lb <= w <= w_ub: {bracket_ok}; residual {worst_res:.1e} (<= 1e-12); "
        f"lnlnln-constant drift over top decade {max(drift):.3f} (<= 0.15)",
    )


def test_a07_concentration(report):
    trials = 100_000
    cases = [(SinrDistribution(1, 1.0), K0) for K0 in (100, 1000, 10_000)]
    cases += [(SinrDistribution(2, 1.0, (0.5,)), K0) for K0 in (100, 1000)]
    cs = []
    for i, (d, K0) in enumerate(cases):
        s = Scenario.from_rhos(d.M, [(d.rho_serving, list(d.rho_interferers))] * K0)
        rep = simulate(s, trials, seed=70 + i, keep_outcomes=True)
        lo, hi = concentration_window(d, K0)
        z = rep.true_sinr
        freq = float(np.mean((z >= lo) & (z <= hi)))
        cs.append((1.0 - freq) * math.log(K0))
    c = max(cs)
    report("A7", c <= 10.0, f"in-window frequency >= 1 - c/ln K0 at K0 in {{1e2,1e3,1e4}}: fitted c {c:.2f} (<= 10)")


SCALING_CONFIGS = [
    Scenario.from_rhos(2, [(1.0, [0.5])]),
    Scenario.from_rhos(2, [(2.0, [0.5, 3.0])]),
    Scenario.from_rhos(4, [(0.3, [1.0, 0.1, 5.0])]),
]


def test_a08_scaling_law(report):
    grid = [10**j for j in range(3, 10)]
    trend = True
    dominated = True
    parts = []
    for s in SCALING_CONFIGS:
        sw = scaling_ratio_sweep(s, 0, grid)
        r = sw.column("scaling_ratio")
        trend &= abs(r[-1] - 1) < abs(r[0] - 1)
        dominated &= bool(np.all(sw.column("eq27_bound") >= sw.column("rate_bits")))
        parts.append(f"{r[0]:.3f}->{r[-1]:.3f}")
    report(
        "A8",
        trend and dominated,
        f"scaling ratio 1e3->1e9 {', '.join(parts)} (closer to 1: {trend}); bound dominates: {dominated}",
    )


def test_a09_gumbel_criterion(report):
    seen = set()
    ok = True
    last = 0.0
    for d, _ in _grid_profiles():
        if d in seen:
            continue
        seen.add(d)
        g = gumbel_attraction_check(d)
        ok &= g.monotone and g.final_small
        last = max(last, abs(g.criterion[-1]))
    report("A9", ok, f"|g'(x)| non-increasing on 1e2..1e8 for {len(seen)} configs, max at 1e8 {last:.1e} (< 1e-9)")


def test_a10_special_functions(report):
    rng = np.random.default_rng(10)
    worst = {"E1": 0.0, "I1": 0.0, "I2": 0.0}
    for _ in range(200):
        a = rng.uniform(0.01, 20.0)
        b = rng.uniform(0.05, 50.0)
        g = int(rng.integers(1, 41))
        for x in (a, b):
            worst["E1"] = max(worst["E1"], abs(exp_int_E1(x) / e1_quad(x) - 1))
        worst["I1"] = max(worst["I1"], abs(integral_I1(a, b, g) / i1_quad(a, b, g) - 1))
        worst["I2"] = max(worst["I2"], abs(integral_I2(a, b, g) / i2_quad(a, b, g) - 1))
    ok = max(worst.values()) <= 1e-9
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report("A10", ok, f"special functions vs quadrature, 200 points: max rel {detail} (<= 1e-9)")


def test_a11_determinism(report, tmp_path, monkeypatch):
    cfg = str(CONFIGS / "acceptance.json")
    bodies = {}
    blobs = {}
    for w in (1, 4, 16):
        monkeypatch.setenv("CDFSCHED_WORKERS", str(w))
        out = tmp_path / f"w{w}.csv"
        assert main(["simulate", cfg, "--trials", "200000", "--seed", "11", "-o", str(out)]) == 0
        bodies[w] = "".join(ln for ln in out.read_text().splitlines(True) if not ln.startswith("#"))
        rep = simulate(load_scenario(cfg), 50_000, seed=11, workers=w, keep_outcomes=True)
        blobs[w] = b"".join(
            np.asarray(getattr(rep, f)).tobytes()
            for f in ("per_user_rate", "per_user_rate_stderr", "selection_counts", "selected_user", "true_sinr")
        ) + repr((rep.mean_sum_rate, rep.sum_rate_stderr, rep.multi_beam_collision_rate)).encode()
    ok = len(set(bodies.values())) == 1 and len(set(blobs.values())) == 1
    report("A11", ok, "simulate output byte-identical for 1, 4 and 16 workers" if ok else "outputs differ")
