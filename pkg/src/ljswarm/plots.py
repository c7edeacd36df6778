"""Vector-graphics emission for run artifacts.

Each plot is written as a self-contained SVG next to the plain-text series it
was drawn from, so external tooling can reproduce every figure.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .integrate import Trajectory
from .potential import zero_force_distance


def plot_trajectories(path, traj: Trajectory) -> Path:
    """Agent paths in the plane with start and end markers."""
    path = Path(path)
    pos = np.array([snap.positions for snap in traj.snapshots])
    fig, ax = plt.subplots(figsize=(5, 5))
    for i in range(pos.shape[1]):
        ax.plot(pos[:, i, 0], pos[:, i, 1], lw=1.0, label=f"agent {i}")
        ax.plot(pos[0, i, 0], pos[0, i, 1], marker="o", ms=5, color="k")
        ax.plot(pos[-1, i, 0], pos[-1, i, 1], marker="*", ms=9, color="tab:red")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_title("agent trajectories (o start, * end)")
    if pos.shape[1] <= 8:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_energy(path, traj: Trajectory) -> Path:
    """Total, kinetic, and potential energy versus time."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(traj.times, traj.total_energy, label="total", lw=1.5)
    ax.plot(traj.times, traj.kinetic_energy, label="kinetic", lw=1.0)
    ax.plot(traj.times, traj.potential_energy, label="potential", lw=1.0)
    ax.set_xlabel("time")
    ax.set_ylabel("energy")
    ax.set_title("energy evolution")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_distances(path, traj: Trajectory, sigma_min: float) -> Path:
    """All pairwise distances versus time with collision and zero-force lines."""
    path = Path(path)
    n = traj.initial.n_agents
    iu = np.triu_indices(n, 1)
    fig, ax = plt.subplots(figsize=(6, 4))
    if iu[0].size <= 36:
        series = np.empty((len(traj), iu[0].size))
        for k, snap in enumerate(traj.snapshots):
            diff = snap.positions[:, None, :] - snap.positions[None, :, :]
            dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            series[k] = dist[iu]
        for p, (i, j) in enumerate(zip(*iu)):
            ax.plot(traj.times, series[:, p], lw=0.8,
                    label=f"r_{i}{j}" if iu[0].size <= 10 else None)
    else:
        ax.plot(traj.times, traj.min_distance, lw=1.2, label="min distance")
    ax.axhline(sigma_min, color="k", ls="--", lw=1.0, label="sigma")
    ax.axhline(zero_force_distance(sigma_min), color="tab:red", ls=":", lw=1.0,
               label="zero-force distance")
    ax.set_xlabel("time")
    ax.set_ylabel("pair distance")
    ax.set_title("pairwise distances")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_residual(path, times, residuals, fit=None) -> Path:
    """Log residual versus time, optionally with the fitted exponential line."""
    path = Path(path)
    times = np.asarray(times)
    residuals = np.asarray(residuals)
    fig, ax = plt.subplots(figsize=(6, 4))
    positive = residuals > 0
    ax.semilogy(times[positive], residuals[positive], lw=0.8, label="residual")
    if fit is not None:
        lo, hi = fit.fit_window
        tt = np.linspace(lo, hi, 50)
        mask = (times >= lo) & (times <= hi) & positive
        if mask.any():
            anchor_t = times[mask][0]
            anchor_r = residuals[mask][0]
            ax.semilogy(tt, anchor_r * np.exp(-fit.alpha_observed * (tt - anchor_t)),
                        "k--", lw=1.2,
                        label=f"fit: rate {fit.alpha_observed:.4f}")
    ax.set_xlabel("time")
    ax.set_ylabel("distance to equilibrium")
    ax.set_title("approach to equilibrium")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
