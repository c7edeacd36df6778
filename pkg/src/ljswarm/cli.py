"""Command-line front end.

Subcommands: run (integrate a scenario and write artifacts), rate (fit the
exponential approach to equilibrium), bound (print the closed-form distance
bound), plot (render SVGs from run artifacts), scenarios (list the catalog),
batch (run several scenarios into one output tree).

Exit codes: 0 success, 1 usage error, 2 integration or fit failure,
3 invariant violation (energy increase or distance-bound breach).
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, io, plots, scenarios
from .integrate import (METHODS, STATUS_STEP_FAILURE, IntegratorSettings, integrate)
from .model import CollisionError, Configuration
from .potential import collision_bound, zero_force_distance
from .scenarios import PackingError, Scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUN_FAILURE = 2
EXIT_VIOLATION = 3

DEFAULT_EMIT = "trajectory,energy,distances"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ljswarm",
                     description="simulate and verify damped formations driven "
                                 "by a 12-6 pair potential")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scenario_args(p, with_settings=True):
        p.add_argument("--scenario", help="catalog scenario name")
        p.add_argument("--config", help="path to a custom scenario YAML file")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for seeded scenarios (default 1)")
        if with_settings:
            p.add_argument("--tol", type=float, default=None,
                           help="relative tolerance override")
            p.add_argument("--abs-tol", type=float, default=None,
                           help="absolute tolerance override")
            p.add_argument("--method", choices=METHODS, default=None,
                           help="step controller override")
            p.add_argument("--t-end", type=float, default=None,
                           help="integration horizon override")
            p.add_argument("--snapshot-interval", type=float, default=None,
                           help="snapshot cadence override")

    p_run = sub.add_parser("run", help="integrate a scenario and write artifacts")
    add_scenario_args(p_run)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--emit", default=DEFAULT_EMIT,
                       help="comma list from trajectory,energy,distances,plots")

    p_rate = sub.add_parser("rate", help="fit the exponential approach to equilibrium "
                                         "(two-agent scenarios)")
    add_scenario_args(p_rate)
    p_rate.add_argument("--out", required=True, help="output directory")
    p_rate.add_argument("--window", type=float, nargs=2, metavar=("T0", "T1"),
                        default=None, help="restrict the fit to [T0, T1]")

    p_bound = sub.add_parser("bound", help="print the closed-form distance bound")
    add_scenario_args(p_bound, with_settings=False)
    p_bound.add_argument("--e0", type=float, default=None,
                         help="override the initial total energy")

    p_plot = sub.add_parser("plot", help="render SVG plots from run artifacts")
    p_plot.add_argument("--run", required=True, help="directory written by 'run'")
    p_plot.add_argument("--out", default=None,
                        help="output directory (default: the run directory)")

    sub.add_parser("scenarios", help="list catalog scenarios")

    p_batch = sub.add_parser("batch", help="run several scenarios")
    p_batch.add_argument("--scenarios", required=True,
                         help="comma-separated catalog names")
    p_batch.add_argument("--out", required=True, help="output directory root")
    p_batch.add_argument("--seed", type=int, default=None)
    p_batch.add_argument("--tol", type=float, default=None)
    p_batch.add_argument("--abs-tol", type=float, default=None)
    p_batch.add_argument("--method", choices=METHODS, default=None)
    p_batch.add_argument("--t-end", type=float, default=None)
    p_batch.add_argument("--snapshot-interval", type=float, default=None)
    return parser


def _resolve_scenario(args) -> Scenario:
    if getattr(args, "config", None):
        return io.load_scenario_config(args.config)
    name = getattr(args, "scenario", None)
    if not name:
        raise UsageError("one of --scenario or --config is required")
    try:
        return scenarios.build(name, seed=args.seed)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc


def _apply_overrides(settings: IntegratorSettings, args) -> IntegratorSettings:
    updates = {}
    if getattr(args, "tol", None) is not None:
        updates["rel_tol"] = args.tol
    if getattr(args, "abs_tol", None) is not None:
        updates["abs_tol"] = args.abs_tol
    if getattr(args, "method", None) is not None:
        updates["method"] = args.method
    if getattr(args, "t_end", None) is not None:
        updates["t_end"] = args.t_end
    if getattr(args, "snapshot_interval", None) is not None:
        updates["snapshot_interval"] = args.snapshot_interval
    return dataclasses.replace(settings, **updates) if updates else settings


def _final_distance_stats(config: Configuration) -> dict:
    pos = config.positions
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    iu = np.triu_indices(pos.shape[0], 1)
    pairs = dist[iu]
    stats = {
        "min": float(pairs.min()),
        "max": float(pairs.max()),
        "mean": float(pairs.mean()),
    }
    if pairs.size <= 12:
        stats["pairs"] = {f"r_{i}_{j}": float(dist[i, j]) for i, j in zip(*iu)}
    return stats


def cmd_run(args) -> int:
    scenario = _resolve_scenario(args)
    settings = _apply_overrides(scenario.settings, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit = {token.strip() for token in args.emit.split(",") if token.strip()}

    traj = integrate(scenario.initial, scenario.params, settings)

    violations = analysis.check_energy_decay(traj, scenario.params)
    bound = analysis.check_collision_bound(traj, scenario.params)
    endpoint = analysis.classify_equilibrium(traj.final, scenario.params)
    provenance = {
        "artifact_version": __version__,
        "seed": args.seed,
        "settings": io.settings_payload(settings),
    }
    provenance["config_hash"] = io.config_hash(
        {"scenario": scenario.name, **provenance})
    summary = {
        "scenario": scenario.name,
        "n_agents": scenario.params.n_agents,
        "dimension": scenario.params.dimension,
        "status": traj.status,
        "message": traj.message,
        "t_final": float(traj.times[-1]),
        "E0": float(traj.total_energy[0]),
        "E_final": float(traj.total_energy[-1]),
        "min_distance_observed": bound.min_observed,
        "collision_bound": bound.bound,
        "sigma_min": bound.sigma_min,
        "bound_satisfied": not bound.violated,
        "max_position_excursion": float(
            max(np.abs(s.positions).max() for s in traj.snapshots)),
        "final_distances": _final_distance_stats(traj.final),
        "equilibrium": {
            "is_equilibrium": endpoint.is_equilibrium,
            "gradient_norm": endpoint.gradient_norm,
            "velocity_norm": endpoint.velocity_norm,
            "classification": endpoint.classification,
            "nonzero_spectrum_min": endpoint.nonzero_spectrum_min,
        },
        "violations": [dataclasses.asdict(v) for v in violations],
        "provenance": provenance,
    }
    if scenario.expected:
        summary["expected"] = {
            key: {"value": value, "provenance": note}
            for key, (value, note) in scenario.expected.items()}

    if "trajectory" in emit:
        io.write_trajectory(out / io.TRAJECTORY_FILENAME, traj)
    if "energy" in emit:
        io.write_energy_series(out / io.ENERGY_SERIES_FILENAME, traj)
    if "distances" in emit:
        io.write_distance_series(out / io.DISTANCE_SERIES_FILENAME, traj)
    if "plots" in emit:
        plots.plot_trajectories(out / "trajectories.svg", traj)
        plots.plot_energy(out / "energy.svg", traj)
        plots.plot_distances(out / "distances.svg", traj, scenario.params.sigma_min)
    io.write_summary(out / io.SUMMARY_FILENAME, summary)

    print(f"{scenario.name}: status={traj.status} t_final={traj.times[-1]:.4g} "
          f"E0={summary['E0']:.6g} E_final={summary['E_final']:.6g} "
          f"min_distance={bound.min_observed:.6g} (bound {bound.bound:.6g}) "
          f"violations={len(violations)}")
    if traj.status == STATUS_STEP_FAILURE:
        print(f"integration failed: {traj.message}", file=sys.stderr)
        return EXIT_RUN_FAILURE
    if violations or bound.violated:
        print("invariant violations recorded in summary.json", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _two_agent_target(scenario: Scenario) -> Configuration:
    sigma = scenario.params.sigma(0, 1)
    half = zero_force_distance(sigma) / 2.0
    return Configuration(positions=[[-half, 0.0], [half, 0.0]],
                         velocities=np.zeros((2, 2)))


def cmd_rate(args) -> int:
    scenario = _resolve_scenario(args)
    if scenario.params.n_agents != 2:
        raise UsageError("rate fitting needs a two-agent scenario")
    # tight default tolerances keep the residual clean far below the
    # equilibrium detection threshold
    settings = dataclasses.replace(scenario.settings, rel_tol=1e-10, abs_tol=1e-12)
    settings = _apply_overrides(settings, args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    traj = integrate(scenario.initial, scenario.params, settings)
    if traj.status == STATUS_STEP_FAILURE:
        print(f"integration failed: {traj.message}", file=sys.stderr)
        return EXIT_RUN_FAILURE
    target = _two_agent_target(scenario)
    window = tuple(args.window) if args.window else None
    try:
        fit = analysis.fit_decay_rate(traj, target, scenario.params, window=window)
    except analysis.FitDegenerateError as exc:
        print(f"rate fit failed: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILURE

    times, residuals = analysis.residual_series(traj, target, scenario.params)
    io.write_residual_series(out / io.RESIDUAL_SERIES_FILENAME, times, residuals)
    record = {
        "scenario": scenario.name,
        "alpha_observed": fit.alpha_observed,
        "alpha_predicted": fit.alpha_predicted,
        "r_squared": fit.r_squared,
        "fit_window": list(fit.fit_window),
        "n_points": fit.n_points,
        "provenance": {
            "artifact_version": __version__,
            "settings": io.settings_payload(settings),
            "window_argument": list(window) if window else None,
        },
    }
    io.write_summary(out / io.RATE_FILENAME, record)
    plots.plot_residual(out / "residual.svg", times, residuals, fit)
    print(f"{scenario.name}: alpha_observed={fit.alpha_observed:.6f} "
          f"alpha_predicted={fit.alpha_predicted:.6f} R^2={fit.r_squared:.6f} "
          f"window=[{fit.fit_window[0]:.3f}, {fit.fit_window[1]:.3f}]")
    return EXIT_OK


def cmd_bound(args) -> int:
    scenario = _resolve_scenario(args)
    params = scenario.params
    if args.e0 is not None:
        e0 = args.e0
    else:
        e0 = analysis.energy(scenario.initial, params).total
    n = params.n_agents
    pairs = math.comb(n, 2)
    bound = collision_bound(e0, params)
    print(f"scenario: {scenario.name}")
    print(f"sigma_min: {params.sigma_min:.6g}")
    print(f"E0: {e0:.6g}")
    print(f"pairs C(N,2): {pairs}")
    print(f"bound: {bound:.6g}")
    return EXIT_OK


def cmd_plot(args) -> int:
    run_dir = Path(args.run)
    traj_path = run_dir / io.TRAJECTORY_FILENAME
    if not traj_path.exists():
        raise UsageError(f"no trajectory file at {traj_path}")
    summary_path = run_dir / io.SUMMARY_FILENAME
    if not summary_path.exists():
        raise UsageError(f"no summary file at {summary_path}")
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)
    traj = io.read_trajectory(traj_path)
    summary = io.read_summary(summary_path)
    sigma_min = summary.get("sigma_min", 0.5)

    io.write_energy_series(out / io.ENERGY_SERIES_FILENAME, traj)
    io.write_distance_series(out / io.DISTANCE_SERIES_FILENAME, traj)
    plots.plot_trajectories(out / "trajectories.svg", traj)
    plots.plot_energy(out / "energy.svg", traj)
    plots.plot_distances(out / "distances.svg", traj, sigma_min)
    if traj.initial.n_agents == 2:
        # residual toward the zero-force pair separation
        half = zero_force_distance(sigma_min) / 2.0
        d = traj.initial.dimension
        target_pos = np.zeros((2, d))
        target_pos[0, 0], target_pos[1, 0] = -half, half
        target = Configuration(positions=target_pos, velocities=np.zeros((2, d)))
        params = scenarios.default_params(2, d)
        times, residuals = analysis.residual_series(traj, target, params)
        io.write_residual_series(out / io.RESIDUAL_SERIES_FILENAME, times, residuals)
        plots.plot_residual(out / "residual.svg", times, residuals)
    print(f"plots written to {out}")
    return EXIT_OK


def cmd_scenarios(_args) -> int:
    for name, (_, description) in scenarios.CATALOG.items():
        print(f"{name}: {description}")
    return EXIT_OK


def cmd_batch(args) -> int:
    names = [token.strip() for token in args.scenarios.split(",") if token.strip()]
    if not names:
        raise UsageError("--scenarios must list at least one name")
    out = Path(args.out)
    worst = EXIT_OK
    for name in names:
        sub_args = argparse.Namespace(
            scenario=name, config=None, seed=args.seed, tol=args.tol,
            abs_tol=args.abs_tol, method=args.method, t_end=args.t_end,
            snapshot_interval=args.snapshot_interval,
            out=str(out / name), emit=DEFAULT_EMIT)
        code = cmd_run(sub_args)
        worst = max(worst, code)
    return worst


_COMMANDS = {
    "run": cmd_run,
    "rate": cmd_rate,
    "bound": cmd_bound,
    "plot": cmd_plot,
    "scenarios": cmd_scenarios,
    "batch": cmd_batch,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CollisionError, PackingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILURE


if __name__ == "__main__":
    sys.exit(main())
