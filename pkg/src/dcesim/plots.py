"""Figure rendering for run artifacts.

Every renderer writes a PNG next to the CSV it illustrates and closes the
figure afterwards, so batch runs do not accumulate open figures.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def render_run_figure(series, label: str, path: str) -> None:
    """Two panels: concurrence on top, Bell populations below."""
    fig, (ax_c, ax_b) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    ax_c.plot(series.times, series.concurrence, color="tab:blue")
    ax_c.set_ylabel("concurrence")
    ax_c.set_ylim(bottom=0.0)
    ax_c.set_title(label)
    ax_b.plot(series.times, series.phi_plus, label=r"$\phi_+$", color="tab:blue")
    ax_b.plot(series.times, series.phi_minus, label=r"$\phi_-$", color="tab:cyan")
    ax_b.plot(series.times, series.psi_plus, label=r"$\psi_+$", color="tab:green")
    ax_b.plot(series.times, series.psi_minus, label=r"$\psi_-$", color="tab:olive")
    ax_b.set_xlabel("t (ns)")
    ax_b.set_ylabel("Bell populations")
    ax_b.legend(loc="best", ncol=2, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def render_trajectory_figure(t, traj1, traj2, label: str, path: str) -> None:
    """Positions u(t) on top, coupling modulations cos(pi u) below."""
    fig, (ax_u, ax_m) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    ax_u.plot(t, traj1.position(t), label="qubit 1", color="tab:blue")
    ax_u.plot(t, traj2.position(t), label="qubit 2", color="tab:red")
    ax_u.set_ylabel("u = x / L")
    ax_u.set_ylim(-0.05, 1.05)
    ax_u.set_title(label)
    ax_u.legend(loc="best", fontsize=8)
    ax_m.plot(t, traj1.modulation(t), color="tab:blue")
    ax_m.plot(t, traj2.modulation(t), color="tab:red")
    ax_m.set_xlabel("t (ns)")
    ax_m.set_ylabel("coupling modulation")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def render_sweep_figure(csv_path: str, axis_names: list, path: str) -> None:
    """C_max against one axis (line) or two (map); failed cells are gaps."""
    rows = np.genfromtxt(csv_path, delimiter=",", names=True,
                         usecols=range(len(axis_names) + 2))
    rows = np.atleast_1d(rows)
    names = rows.dtype.names
    c_max = rows["c_max"]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if len(axis_names) == 1:
        ax.plot(rows[names[0]], c_max, marker="o", color="tab:blue")
        ax.set_xlabel(axis_names[0])
        ax.set_ylabel("C_max")
    else:
        xs = np.unique(rows[names[0]])
        ys = np.unique(rows[names[1]])
        grid = np.full((len(ys), len(xs)), np.nan)
        ix = np.searchsorted(xs, rows[names[0]])
        iy = np.searchsorted(ys, rows[names[1]])
        grid[iy, ix] = c_max
        mesh = ax.pcolormesh(xs, ys, grid, shading="nearest")
        fig.colorbar(mesh, ax=ax, label="C_max")
        ax.set_xlabel(axis_names[0])
        ax.set_ylabel(axis_names[1])
    ax.set_title("sweep summary")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
