"""Command-line front end: ``cdfsched {rate,simulate,scaling,validate} CONFIG``.

Tables go out as CSV preceded by ``#`` manifest lines (command, config path
and SHA-256, seed, trials, grid, version, duration).  Exit codes: 0 success,
1 a check or cross-validation failed, 2 bad usage or invalid input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import math
import sys
import time

import numpy as np

from . import __version__
from .rate import (
    ClosedFormRangeError,
    individual_sum_rate_closed,
    individual_sum_rate_quadrature,
)
from .scaling import ScalingSweep, scaling_ratio_sweep
from .scenario import ScenarioError, load_scenario
from .scheduler import simulate
from .validation import run_validation

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
BOTH_TOL = 1e-5
MIN_VALIDATE_TRIALS = 10_000


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    return str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _manifest(args, config_hash, started, **extra) -> str:
    items = {
        "command": args.command,
        "config": args.config,
        "config_sha256": config_hash,
        "seed": getattr(args, "seed", ""),
        "trials": getattr(args, "trials", ""),
        "grid": extra.pop("grid", ""),
        "version": __version__,
        "duration_s": f"{time.perf_counter() - started:.3f}",
    }
    items.update(extra)
    return "".join(f"# {k}: {v}\n" for k, v in items.items())


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def parse_k0_grid(spec: str) -> list[int]:
    """``start:stop:count`` for a log-spaced grid, or a comma-separated list."""
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            lo, hi, n = math.log10(float(a)), math.log10(float(b)), int(n)
            if n < 1:
                raise ValueError
            pts = np.logspace(lo, hi, n) if n > 1 else np.array([10**lo])
            grid = [int(round(p)) for p in pts]
        else:
            grid = [int(float(x)) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --k0-grid {spec!r}; use START:STOP:COUNT or a comma list") from None
    if not grid or grid[0] < 16 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise UsageError("--k0-grid must be strictly increasing and start at 16 or above")
    return grid


# --- commands ------------------------------------------------------------


def cmd_rate(args, scenario, chash, started) -> int:
    K = scenario.num_users
    if args.all:
        users = range(K)
    else:
        if not 0 <= args.user < K:
            raise UsageError(f"--user must be in 0..{K - 1}")
        users = [args.user]
    status = EXIT_OK
    rows = []
    for k in users:
        closed = quad = disc = None
        if args.method in ("closed", "both"):
            closed = individual_sum_rate_closed(scenario, k)
        if args.method in ("quadrature", "both"):
            quad = individual_sum_rate_quadrature(scenario, k)
        if args.method == "both":
            disc = abs(closed - quad) / abs(quad)
            if disc > BOTH_TOL:
                status = EXIT_FAIL
                print(f"user {k}: closed/quadrature discrepancy {disc:.3g} > {BOTH_TOL:g}", file=sys.stderr)
        rows.append((k, closed, quad, disc))
    cols = {"closed": [0, 1], "quadrature": [0, 2], "both": [0, 1, 2, 3]}[args.method]
    names = ["user", "rate_closed_bits", "rate_quadrature_bits", "rel_discrepancy"]
    body = _csv([names[c] for c in cols], [[r[c] for c in cols] for r in rows])
    _emit(args, _manifest(args, chash, started, method=args.method) + body)
    return status


def cmd_simulate(args, scenario, chash, started) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    rep = simulate(scenario, args.trials, args.seed)
    header = [
        "user",
        "beam",
        "selection_count",
        "mean_rate",
        "stderr",
        "individual_sum_rate_empirical",
        "multi_beam_collision_rate",
    ]
    rows = []
    K, M = rep.selection_counts.shape
    for k in range(K):
        for m in range(M):
            rows.append(
                (k, m, int(rep.selection_counts[k, m]), rep.per_user_beam_rate[k, m],
                 rep.per_user_beam_rate_stderr[k, m], None, None)
            )
        rows.append(
            (k, "all", int(rep.selection_counts[k].sum()), rep.per_user_rate[k],
             rep.per_user_rate_stderr[k], rep.per_user_individual_sum_rate[k], None)
        )
    rows.append(
        ("sum", "all", rep.trials * M, rep.mean_sum_rate, rep.sum_rate_stderr, None,
         rep.multi_beam_collision_rate)
    )
    _emit(args, _manifest(args, chash, started) + _csv(header, rows))
    return EXIT_OK


def cmd_scaling(args, scenario, chash, started) -> int:
    if not 0 <= args.user < scenario.num_users:
        raise UsageError(f"--user must be in 0..{scenario.num_users - 1}")
    grid = parse_k0_grid(args.k0_grid)
    if args.with_mc is not None and args.with_mc < 1:
        raise UsageError("--with-mc must be >= 1")
    sweep = scaling_ratio_sweep(scenario, args.user, grid, mc_trials=args.with_mc, seed=args.seed)
    for r in sweep.rows:
        print(f"K0={r.K0} w={r.w:.6g} ratio={r.scaling_ratio:.6g}", file=sys.stderr)
    cols = ScalingSweep.columns(with_mc=args.with_mc is not None)
    body = _csv(cols, [[getattr(r, c) for c in cols] for r in sweep.rows])
    trials = "" if args.with_mc is None else args.with_mc
    _emit(args, _manifest(args, chash, started, grid=args.k0_grid, mc_trials=trials) + body)
    return EXIT_OK


def cmd_validate(args, scenario, chash, started) -> int:
    if args.trials < MIN_VALIDATE_TRIALS:
        raise UsageError(f"--trials must be >= {MIN_VALIDATE_TRIALS}")
    checks = run_validation(scenario, args.trials, args.seed, corrupt_rho=args.corrupt_rho)
    for c in checks:
        print(c.line(), file=sys.stderr)
    rows = [(c.name, c.statistic, c.threshold, "pass" if c.passed else "fail") for c in checks]
    body = _csv(["check", "statistic", "threshold", "result"], rows)
    _emit(args, _manifest(args, chash, started) + body)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


# --- argument parsing ----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cdfsched", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("config", help="scenario JSON file")
        sp.add_argument("-o", "--output", help="write the CSV here instead of stdout")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("rate", help="individual sum rate per user")
    common(sp, seed=False)
    who = sp.add_mutually_exclusive_group(required=True)
    who.add_argument("--user", type=int)
    who.add_argument("--all", action="store_true")
    sp.add_argument("--method", choices=("closed", "quadrature", "both"), default="quadrature")

    sp = sub.add_parser("simulate", help="Monte Carlo of the scheduler")
    common(sp)
    sp.add_argument("--trials", type=int, required=True)

    sp = sub.add_parser("scaling", help="large-K0 sweep for one user")
    common(sp)
    sp.add_argument("--user", type=int, required=True)
    sp.add_argument("--k0-grid", default="1e3:1e9:7", help="START:STOP:COUNT (log-spaced) or a list")
    sp.add_argument("--with-mc", type=int, metavar="TRIALS", help="also simulate the in-window frequency")

    sp = sub.add_parser("validate", help="statistical property suite")
    common(sp)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument(
        "--corrupt-rho",
        type=float,
        metavar="FACTOR",
        help="scale the analytic side's serving SNRs (negative control)",
    )
    return p


_COMMANDS = {"rate": cmd_rate, "simulate": cmd_simulate, "scaling": cmd_scaling, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    started = time.perf_counter()
    try:
        with open(args.config, "rb") as fh:
            chash = hashlib.sha256(fh.read()).hexdigest()
        scenario = load_scenario(args.config)
        return _COMMANDS[args.command](args, scenario, chash, started)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(f"error: invalid configuration {args.config}:", file=sys.stderr)
        for e in exc.errors:
            print(f"  - {e}", file=sys.stderr)
        return EXIT_USAGE
    except ClosedFormRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
