"""Command-line entry point: ``bidask <command> [flags]``.

Commands: simulate, spread-pdf, calibrate, density, risk. Every command
computes its results fully in memory before writing anything. Randomized
commands require ``--seed``. A JSON ``--config`` file may supply any flag
(keys use the flag name with underscores); explicit flags win.

Exit codes: 0 success, 2 usage error, 3 data error, 4 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from scipy import stats

from . import calibration, dynamics, market, risk, spread
from .errors import BidAskError, InvalidInputError, NonConvergenceError, ParseError
from .model import ModelParams

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NONCONV = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _spread_flags(p, defaults=(0.0, None, 0.0, None)):
    p.add_argument("--xi0", type=float, default=defaults[0],
                   help="mean intrinsic spread component (spread units, default %(default)s)")
    p.add_argument("--xi1", type=float, default=defaults[1],
                   help="std of intrinsic component (spread units)")
    p.add_argument("--kappa0", type=float, default=defaults[2],
                   help="mean interaction component (spread units, default %(default)s)")
    p.add_argument("--kappa1", type=float, default=defaults[3],
                   help="std of interaction component (spread units)")


def _common(p, seed=False):
    p.add_argument("--config", type=Path, help="JSON file with flag values (flags override)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default %(default)s)")
    if seed:
        p.add_argument("--seed", type=int, help="RNG seed (integer, required)")


def _input_flags(p):
    p.add_argument("--input", type=Path, help="book, OHLC, observables or trajectory CSV")
    p.add_argument("--mode", default="best", help="best | effective | ohlc (default %(default)s)")
    p.add_argument("--levels", type=int, default=None,
                   help="book levels for effective mode (count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bidask", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate amplitudes, mid and spread")
    _common(p, seed=True)
    p.add_argument("--sigma", type=float, default=0.0,
                   help="mid volatility per sqrt(time unit) (price units, default %(default)s)")
    _spread_flags(p, defaults=(0.0, 0.0, 0.0, 0.0))
    p.add_argument("--phase-scale", type=float, default=20.0,
                   help="price_level*dt/rho, dimensionless (default %(default)s)")
    p.add_argument("--dt", type=float, default=1.0, help="time step (time units, default %(default)s)")
    p.add_argument("--steps", type=int, default=100_000, help="number of steps (default %(default)s)")
    p.add_argument("--mid0", type=float, default=1.0,
                   help="initial mid and price level for the phase scale (price units, "
                        "default %(default)s)")
    p.add_argument("--burn-in", type=int, default=None,
                   help="steps dropped before the histogram (default: 10 Rabi periods)")
    p.add_argument("--bins", type=int, default=10, help="population histogram bins (default %(default)s)")
    p.add_argument("--output", type=Path, help="trajectory CSV path (required)")
    p.add_argument("--summary", type=Path, help="summary JSON path (default: OUTPUT with .json)")

    p = sub.add_parser("spread-pdf", help="tabulate the spread density")
    _common(p)
    _spread_flags(p)
    p.add_argument("--points", type=int, default=512, help="grid points (count, default %(default)s)")
    p.add_argument("--output", type=Path, help="CSV path (required)")

    p = sub.add_parser("calibrate", help="fit spread parameters by maximum likelihood")
    _common(p, seed=True)
    _input_flags(p)
    p.add_argument("--restarts", type=int, default=4, help="optimizer restarts (default %(default)s)")
    p.add_argument("--max-iters", type=int, default=4000, help="iterations per restart")
    p.add_argument("--free-xi0", action="store_true", help="also fit xi0 (default: fixed at 0)")
    p.add_argument("--bins", type=int, default=20, help="bins in the printed comparison table")
    p.add_argument("--output", type=Path, help="FitResult JSON path (required)")

    p = sub.add_parser("density", help="order-density histogram against the arcsine law")
    _common(p)
    _input_flags(p)
    p.add_argument("--bins", type=int, default=10, help="histogram bins (default %(default)s)")
    p.add_argument("--burn-in", type=int, default=0, help="leading rows to drop (count)")
    p.add_argument("--output", type=Path, help="histogram CSV path (required)")
    p.add_argument("--summary", type=Path, help="optional summary JSON path")

    p = sub.add_parser("risk", help="mid and spread risk report")
    _common(p, seed=True)
    _input_flags(p)
    _spread_flags(p)
    p.add_argument("--fit", type=Path, help="FitResult JSON (alternative to --xi0..--kappa1)")
    p.add_argument("--n-mc", type=int, default=100_000, help="Monte Carlo draws (default %(default)s)")
    p.add_argument("--output", type=Path, help="RiskReport JSON path (required)")
    return parser


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = parser.parse_args(argv)
    return args


def _require(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required")


def _spread_params(args):
    _require(args, "xi1", "kappa1")
    return spread.SpreadDistParams(args.xi0, args.xi1, args.kappa0, args.kappa1)


def _observables(args):
    _require(args, "input")
    kind, data = market.load_any(args.input)
    mode, n = market.parse_mode(args.mode, args.levels)
    if kind == "observables":
        # Already reduced to spreads; the mode only applies to raw book/OHLC files.
        return data
    if kind == "trajectory":
        raise InvalidInputError("a trajectory file has no spread observations to calibrate")
    return market.extract_observables(data, mode, n)


def _finite_or_none(x):
    # JSON has no inf/nan
    return x if np.isfinite(x) else None


def _write(path, text):
    Path(path).write_text(text)


def cmd_simulate(args):
    _require(args, "seed", "output")
    rho = dynamics.rho_from_phase_scale(args.phase_scale, args.dt, args.mid0)
    params = ModelParams(args.sigma, args.xi0, args.xi1, args.kappa0, args.kappa1, rho=rho, dt=args.dt)
    if args.steps < 1:
        raise InvalidInputError("--steps must be >= 1")
    traj = dynamics.simulate_trajectory(dynamics.AmplitudeState(), params, args.steps, args.seed,
                                        mid0=args.mid0)
    burn = dynamics.default_burn_in(params) if args.burn_in is None else args.burn_in
    burn = min(burn, args.steps - 1)
    hist = dynamics.population_histogram(traj, burn, args.bins)
    summary = {
        "steps": args.steps, "seed": args.seed, "rho": rho, "burn_in": burn,
        "final_mid": float(traj.mids[-1]), "mean_spread": float(traj.spreads.mean()),
        "histogram_edges": hist.bin_edges.tolist(), "histogram_counts": hist.counts.tolist(),
        "tail_to_centre_ratio": _finite_or_none(hist.tail_to_centre_ratio()),
    }
    csv_text = traj.to_csv()
    _write(args.output, csv_text)
    _write(args.summary or Path(args.output).with_suffix(".json"),
           json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(json.dumps({k: summary[k] for k in ("final_mid", "mean_spread", "tail_to_centre_ratio")}))


def cmd_spread_pdf(args):
    _require(args, "output")
    curve = spread.pdf_curve(_spread_params(args), args.points)
    _write(args.output, curve.to_csv())
    print(f"wrote {len(curve.grid)} points, integral {curve.integral():.8f}")


def _comparison_table(samples, params, bins):
    counts, edges = np.histogram(samples, bins=bins)
    width = np.diff(edges)
    emp = counts / (counts.sum() * width)
    mid = 0.5 * (edges[:-1] + edges[1:])
    fitted = spread.spread_pdf_general(mid, params)
    lines = [f"{'spread':>14} {'empirical':>14} {'fitted':>14}"]
    lines += [f"{m:14.6g} {e:14.6g} {f:14.6g}" for m, e, f in zip(mid, emp, fitted)]
    return "\n".join(lines)


def cmd_calibrate(args):
    _require(args, "seed", "output")
    obs = _observables(args)
    opts = calibration.FitOptions(fix_xi0_zero=not args.free_xi0, n_restarts=args.restarts,
                                  max_iters=args.max_iters, seed=args.seed, threads=args.threads)
    fit = calibration.fit_spread_params(obs.spreads, opts)
    table = _comparison_table(obs.spreads, fit.params, args.bins)
    _write(args.output, fit.to_json())
    print(table)
    if fit.symmetric:
        print("note: offsets are near zero, xi1 and kappa1 are interchangeable; "
              "both orderings are in the JSON")


def _populations(args):
    _require(args, "input")
    kind, data = market.load_any(args.input)
    if kind == "ohlc" or (kind == "observables" and data.populations is None):
        raise InvalidInputError("OHLC data carries no order-density information")
    if kind == "trajectory":
        return data["pop_ask"]
    if kind == "observables":
        return data.populations
    mode, n = market.parse_mode(args.mode, args.levels)
    if mode == "ohlc":
        raise InvalidInputError("ohlc mode has no order-density information")
    return market.extract_observables(data, mode, n).populations


def cmd_density(args):
    _require(args, "output")
    pops = np.asarray(_populations(args), dtype=float)
    hist = dynamics.population_histogram(pops, args.burn_in, args.bins)
    kept = pops[args.burn_in:]
    edges = hist.bin_edges
    theory = np.diff(dynamics.arcsine_cdf(edges)) / np.diff(edges)
    ks = stats.kstest(kept, stats.beta(0.5, 0.5).cdf)
    crit = dynamics.ks_critical_value(len(kept))
    half = float(np.mean(kept == 0.5))
    summary = {
        "n": int(len(kept)), "ks_statistic": float(ks.statistic), "ks_critical_1pct": crit,
        "ks_pass": bool(ks.statistic < crit), "fraction_at_half": half,
        "round_lot_artifact": bool(half > 0.01),
        "tail_to_centre_ratio": _finite_or_none(hist.tail_to_centre_ratio()),
    }
    lines = ["bin_lo,bin_hi,count,density,arcsine_density"]
    dens = hist.density()
    for i in range(hist.n_bins):
        lines.append(f"{edges[i]:.17g},{edges[i + 1]:.17g},{hist.counts[i]},{dens[i]:.17g},"
                     f"{theory[i]:.17g}")
    _write(args.output, "\n".join(lines) + "\n")
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if args.summary:
        _write(args.summary, text)
    print(text, end="")


def cmd_risk(args):
    _require(args, "seed", "output")
    obs = _observables(args)
    if args.fit is not None:
        try:
            fit = calibration.FitResult.from_dict(json.loads(Path(args.fit).read_text()))
        except (OSError, ValueError, KeyError) as exc:
            raise ParseError(f"cannot read fit file: {exc}") from None
        params = fit.params
    else:
        _require(args, "xi1", "kappa1")
        params = spread.SpreadDistParams(args.xi0, args.xi1, args.kappa0, args.kappa1)
    report = risk.risk_report(obs, params, args.n_mc, args.seed)
    _write(args.output, report.to_json())
    print(report.to_text(), end="")


COMMANDS = {
    "simulate": cmd_simulate,
    "spread-pdf": cmd_spread_pdf,
    "calibrate": cmd_calibrate,
    "density": cmd_density,
    "risk": cmd_risk,
}


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"bidask: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"bidask {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        print(f"bidask {args.command}: did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except (BidAskError, OSError) as exc:
        print(f"bidask {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
