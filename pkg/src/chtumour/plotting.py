"""Report figures.  Everything renders off-screen to files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
WIDTH = 5.0

RC = {
    "figure.figsize": [WIDTH, WIDTH * GOLDEN],
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "mathtext.fontset": "stix",
}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    # no timestamp in the metadata, so reruns give identical files
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def _log_if_positive(ax, axis, values):
    # exact zeros are legitimate (e.g. decoupled fields), keep them visible
    if np.all(np.asarray(values) > 0):
        getattr(ax, f"set_{axis}scale")("log")


def energy_figure(traj, path) -> Path:
    """Energy and its balance terms against time."""
    t = np.asarray(traj.times)
    with plt.rc_context(RC):
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(WIDTH, 1.4 * WIDTH * GOLDEN))
        top.plot(t, traj.column("total_energy"), color="k", label="energy")
        top.plot(t, traj.column("gl_energy"), color="C0", ls="--", label="interface part")
        top.set_ylabel("energy")
        top.legend(frameon=False)
        for name, color in (("dissipation", "C1"), ("boundary_flux", "C2"), ("source_work", "C3")):
            bottom.plot(t, traj.column(name), color=color, label=name.replace("_", " "))
        bottom.set_xlabel("$t$")
        bottom.set_ylabel("rate")
        bottom.legend(frameon=False)
        return _save(fig, Path(path))


def mass_figure(traj, path) -> Path:
    t = np.asarray(traj.times)
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.plot(t, traj.column("mass_phi"), label=r"$\int\varphi$")
        ax.plot(t, traj.column("mass_sigma"), label=r"$\int\sigma$")
        ax.set_xlabel("$t$")
        ax.legend(frameon=False)
        return _save(fig, Path(path))


def profile_figure(x, snapshots, path) -> Path:
    """``snapshots`` is a list of ``(t, phi, mu, sigma)`` on the nodes ``x``."""
    cmap = plt.get_cmap("viridis")
    n = max(len(snapshots) - 1, 1)
    with plt.rc_context(RC):
        fig, axes = plt.subplots(3, 1, sharex=True, figsize=(WIDTH, 1.8 * WIDTH * GOLDEN))
        for i, (t, phi, mu, sigma) in enumerate(snapshots):
            color = cmap(i / n)
            for ax, values in zip(axes, (phi, mu, sigma)):
                ax.plot(x, values, color=color, label=f"t={t:.3g}" if i in (0, len(snapshots) - 1) else None)
        for ax, label in zip(axes, (r"$\varphi$", r"$\mu$", r"$\sigma$")):
            ax.set_ylabel(label)
        axes[0].legend(frameon=False)
        axes[-1].set_xlabel("$x$")
        return _save(fig, Path(path))


def convergence_figure(report, path) -> Path:
    """Self-convergence errors against k and energy-defect rates against dt."""
    studies = report.get("dt_order", {})
    with plt.rc_context(RC):
        fig, (left, right) = plt.subplots(1, 2, figsize=(WIDTH * 1.4, WIDTH * GOLDEN))
        rows = report["self_convergence"]["rows"]
        errors = [r["error"] for r in rows]
        left.plot([r["k"] for r in rows], errors, "o-", color="k")
        _log_if_positive(left, "y", errors)
        left.set_xlabel("$k$")
        left.set_ylabel(r"$\|\varphi_k-\varphi_{2k}\|$")
        for (scheme, study), marker in zip(sorted(studies.items()), "os^"):
            dts = [r["dt"] for r in study["rows"]]
            rates = [r["max_rate"] for r in study["rows"]]
            right.plot(dts, rates, marker + "-", label=scheme)
            right.set_xscale("log")
            _log_if_positive(right, "y", rates)
        right.set_xlabel(r"$\Delta t$")
        right.set_ylabel("max energy defect rate")
        if studies:
            right.legend(frameon=False)
        return _save(fig, Path(path))


def dependence_figure(report, path) -> Path:
    rows = [r for r in report["rows"] if r["eps"] > 0]
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.semilogx([r["eps"] for r in rows], [r["Q"] for r in rows], "o-", color="k")
        ax.set_xlabel(r"$\varepsilon$")
        ax.set_ylabel(r"$Q(\varepsilon)$")
        ax.set_ylim(bottom=0.0)
        return _save(fig, Path(path))


def kappa_figure(report, path) -> Path:
    rows = report["rows"]
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        dist = [r["sup_phi_distance"] for r in rows]
        ax.plot([r["kappa"] for r in rows], dist, "o-", color="k")
        ax.set_xscale("log")
        _log_if_positive(ax, "y", dist)
        ax.set_xlabel(r"$\kappa$")
        ax.set_ylabel("distance to quasi-static run")
        return _save(fig, Path(path))
