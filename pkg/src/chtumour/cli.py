"""Command-line entry point.

    chtumour <subcommand> --config run.json [--out DIR] [--seed N] [--snapshots N]

Subcommands: ``simulate`` (parabolic), ``nondim``, ``quasistatic``,
``ctsdep``, ``converge`` and ``validate``.  Exit status is 0 on success,
1 for configuration errors and 2 for failures during a run.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .diagnostics import (
    apriori_monitors,
    continuous_dependence_experiment,
    dt_order_study,
    energy_identity_residual,
    kappa_study,
    mass_residuals,
    quasi_energy_residual,
    self_convergence,
)
from .diagnostics.experiments import run as run_experiment
from .errors import ConfigError, SimulationError
from .model import coupling_threshold

SIM_MODES = {"simulate": "parabolic", "nondim": "nondim", "quasistatic": "quasistatic"}
SUBCOMMANDS = (*SIM_MODES, "ctsdep", "converge", "validate")
FLOAT_FORMAT = ".16e"  # 17 significant digits


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chtumour", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    helps = {
        "simulate": "integrate the parabolic model",
        "nondim": "integrate the nondimensional model and sweep kappa",
        "quasistatic": "integrate with the nutrient slaved to phi",
        "ctsdep": "continuous-dependence ratio sweep",
        "converge": "Galerkin self-convergence and time-order studies",
        "validate": "check a configuration without running it",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--snapshots", type=int, default=10, help="number of field snapshots after the initial one")
    return parser


# output ---------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), FLOAT_FORMAT)


def write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_json(path: Path, doc) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def write_series(path: Path, traj) -> Path:
    """One row per accepted state: step, time, step size, every record
    field and the per-step energy defect (zero on the first row)."""
    residual = energy_identity_residual(traj)
    columns = type(traj.records[0]).columns()
    header = ["step", "dt", *columns, "energy_rate", "energy_defect", "energy_defect_rate"]
    rows = []
    for i, rec in enumerate(traj.records):
        dt = traj.times[i] - traj.times[i - 1] if i else 0.0
        raw = residual["raw"][i - 1] if i else 0.0
        rate = residual["rate"][i - 1] if i else 0.0
        rows.append([i, dt, *(getattr(rec, c) for c in columns), rec.energy_rate, raw, rate])
    return write_csv(path, header, rows)


def snapshot_indices(n_states: int, count: int) -> list[int]:
    """Initial state, ``count`` evenly spaced states after it, always the final one."""
    if count < 0:
        raise ConfigError("--snapshots must be nonnegative")
    if count == 0:
        return sorted({0, n_states - 1})
    return sorted({int(round(v)) for v in np.linspace(0, n_states - 1, count + 1)})


def write_fields(out: Path, traj, basis, count: int) -> list[dict]:
    x = basis.quad_nodes
    written = []
    for n, i in enumerate(snapshot_indices(len(traj), count)):
        phi = basis.eval_field(traj.alphas[i])
        mu = basis.eval_field(traj.betas[i])
        sigma = basis.eval_field(traj.gammas[i])
        name = f"fields_{n:04d}.csv"
        write_csv(out / name, ["x", "phi", "mu", "sigma"], zip(x, phi, mu, sigma))
        written.append({"file": name, "step": i, "t": traj.times[i]})
    return written


# subcommands ----------------------------------------------------------------

def _resolve_mode(command: str, cfg: RunConfig) -> str:
    if command in SIM_MODES:
        mode = SIM_MODES[command]
        if cfg.mode is not None and cfg.mode != mode:
            raise ConfigError(f"config mode {cfg.mode!r} conflicts with subcommand {command!r}")
    else:
        mode = cfg.resolved_mode("parabolic")
    if mode == "quasistatic" and cfg.sigma0 is not None:
        raise ConfigError("quasistatic mode takes no sigma0: the nutrient is determined by phi")
    return mode


def _simulate(args, cfg: RunConfig, mode: str) -> tuple[dict, str]:
    problem, traj = run_experiment(cfg, mode, seed=args.seed)
    out = args.out
    write_series(out / "series.csv", traj)
    snapshots = write_fields(out, traj, problem.basis, args.snapshots)
    energy = energy_identity_residual(traj)
    report = {
        "command": args.command,
        "mode": mode,
        "seed": args.seed,
        "config": cfg.to_dict(),
        "steps": len(traj) - 1,
        "rejected": traj.rejected,
        "final_time": traj.times[-1],
        "energy_initial": traj.records[0].total_energy,
        "energy_final": traj.records[-1].total_energy,
        "max_energy_defect": energy["max_raw"],
        "max_energy_defect_rate": energy["max_rate"],
        "max_mu_mean_residual": float(np.max(np.abs(traj.column("mu_mean_residual")))),
        "max_row1_stiffness": float(np.max(np.abs(traj.column("row1_stiffness")))),
        "mass": mass_residuals(traj),
        "monitors": apriori_monitors(traj),
        "snapshots": snapshots,
        "basis": problem.basis.summary(),
    }
    if mode == "quasistatic":
        lhs, rhs = traj.column("h1_bound_lhs"), traj.column("h1_bound_rhs")
        report["max_balance_residual"] = float(np.max(np.abs(traj.column("balance_residual"))))
        report["min_h1_bound_slack"] = float(np.min(rhs - lhs))
        report["max_nutrient_cond"] = float(np.max(traj.column("nutrient_cond")))
        report["max_quasi_energy_defect_rate"] = quasi_energy_residual(traj)["max_rate"]
    if mode == "nondim" and cfg.kappa_list:
        report["kappa_sweep"] = kappa_study(cfg, cfg.kappa_list, seed=args.seed)

    if cfg.figures:
        from . import plotting

        plotting.energy_figure(traj, out / "energy.png")
        plotting.mass_figure(traj, out / "mass.png")
        x = problem.basis.quad_nodes
        profiles = [(traj.times[s["step"]], *(problem.basis.eval_field(c[s["step"]])
                     for c in (traj.alphas, traj.betas, traj.gammas))) for s in snapshots]
        plotting.profile_figure(x, profiles, out / "profiles.png")
        if "kappa_sweep" in report:
            plotting.kappa_figure(report["kappa_sweep"], out / "kappa.png")

    summary = (f"{args.command}: mode={mode} k={problem.basis.k} steps={report['steps']} "
               f"rejected={traj.rejected} T={traj.times[-1]:.6g} "
               f"E={report['energy_initial']:.6g}->{report['energy_final']:.6g} "
               f"defect_rate={energy['max_rate']:.3e}")
    return report, summary


def _ctsdep(args, cfg: RunConfig, mode: str) -> tuple[dict, str]:
    workers = min(len(cfg.eps_list), os.cpu_count() or 1)
    result = continuous_dependence_experiment(cfg, cfg.eps_list, mode, seed=args.seed, workers=workers)
    rows = result["rows"]
    write_csv(args.out / "ctsdep.csv", ["eps", "numerator", "denominator", "Q"],
              ([r["eps"], r["numerator"], r["denominator"], r["Q"]] for r in rows))
    if cfg.figures:
        from . import plotting

        plotting.dependence_figure(result, args.out / "dependence.png")
    report = {"command": "ctsdep", "mode": mode, "seed": args.seed, "config": cfg.to_dict(), **result}
    summary = f"ctsdep: mode={mode} Q_max={result['Q_max']:.6g} spread={result['Q_spread']:.4g} finite={result['finite']}"
    return report, summary


def _converge(args, cfg: RunConfig, mode: str) -> tuple[dict, str]:
    sc = self_convergence(cfg, cfg.k_list, mode, seed=args.seed, workers=min(4, os.cpu_count() or 1))
    write_csv(args.out / "convergence.csv", ["k", "error"], ([r["k"], r["error"]] for r in sc["rows"]))
    report = {"command": "converge", "mode": mode, "seed": args.seed, "config": cfg.to_dict(),
              "self_convergence": sc, "dt_order": {}}
    rows = []
    for scheme in ("imex", "trapezoidal"):
        if not cfg.dt_levels:
            break
        study = dt_order_study(cfg, cfg.dt_levels, scheme, mode, seed=args.seed)
        report["dt_order"][scheme] = study
        ratios = [float("nan"), *study["ratios"]]
        rows += [[scheme, r["dt"], r["max_rate"], r["max_raw"], r["steps"], q] for r, q in zip(study["rows"], ratios)]
    if rows:
        with open(args.out / "dt_order.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["scheme", "dt", "max_defect_rate", "max_defect", "steps", "ratio"])
            writer.writerows([row[0], *(_fmt(v) for v in row[1:])] for row in rows)
    if cfg.figures:
        from . import plotting

        plotting.convergence_figure(report, args.out / "convergence.png")
    orders = {s: [round(o, 3) for o in st["observed_order"]] for s, st in report["dt_order"].items()}
    errors = ", ".join(format(r["error"], ".3e") for r in sc["rows"])
    summary = (f"converge: mode={mode} errors=[{errors}] "
               f"decreasing={sc['strictly_decreasing']} observed_order={orders}")
    return report, summary


def _validate(args, cfg: RunConfig, mode: str) -> tuple[dict, str]:
    vc = cfg.validated(mode)
    basis = cfg.problem(mode).basis
    threshold = coupling_threshold(vc.params, vc.potential)
    report = {"command": "validate", "mode": mode, "config": cfg.to_dict(),
              "coupling_threshold": threshold, "basis": basis.summary()}
    summary = f"validate: mode={mode} ok (A={vc.params.A:g}, coupling threshold {threshold:.6g}, k={basis.k})"
    return report, summary


def run(argv=None) -> int:
    """Run one subcommand; returns the process exit status."""
    try:
        args = build_parser().parse_args(argv)
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        cfg = load_config(args.config)
        mode = _resolve_mode(args.command, cfg)
        if args.command == "validate":
            report, summary = _validate(args, cfg, mode)
        else:
            args.out.mkdir(parents=True, exist_ok=True)
            if args.command in SIM_MODES:
                report, summary = _simulate(args, cfg, mode)
            elif args.command == "ctsdep":
                report, summary = _ctsdep(args, cfg, mode)
            else:
                report, summary = _converge(args, cfg, mode)
            write_json(args.out / "report.json", report)
    except ConfigError as exc:
        print(f"chtumour: configuration error: {exc}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"chtumour: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(summary)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
