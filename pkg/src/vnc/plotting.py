"""Figures for simulated trajectories.

Writes, into one directory: the planar projection as CSV, rendered PNG
figures of the projection and of the constraint values, and a standalone
plotting script that regenerates the figures from the trajectory CSV.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .simulation import Trajectory

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
}

PLOT_SCRIPT = '''"""Regenerate trajectory figures from a CSV written by `vnc simulate`."""
import csv
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_name!r}
with open(path, newline="") as fh:
    rows = list(csv.reader(fh))
head, data = rows[0], [[float(x) for x in r] for r in rows[1:]]
col = {{name: [r[i] for r in data] for i, name in enumerate(head)}}

fig, ax = plt.subplots()
ax.plot(col[{xname!r}], col[{yname!r}])
ax.set_xlabel({xname!r})
ax.set_ylabel({yname!r})
ax.set_aspect("equal", adjustable="datalim")
fig.tight_layout()
fig.savefig("xy_projection.png")

names = [h for h in head if h.startswith("muhat_")]
fig, axes = plt.subplots(len(names), 1, sharex=True, squeeze=False)
for ax, name in zip(axes[:, 0], names):
    ax.plot(col["t"], col[name])
    ax.set_ylabel(name)
axes[-1, 0].set_xlabel("t")
fig.tight_layout()
fig.savefig("constraints.png")
'''


def planar_coordinates(coord_names) -> tuple[int, int]:
    """Indices of the coordinates used for the planar projection (x, y when present)."""
    names = list(coord_names)
    if "x" in names and "y" in names:
        return names.index("x"), names.index("y")
    return 0, min(1, len(names) - 1)


def write_projection_csv(traj: Trajectory, path: Path) -> Path:
    i, j = planar_coordinates(traj.coord_names)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", traj.coord_names[i], traj.coord_names[j]])
        for t, a, b in zip(traj.times, traj.q[:, i], traj.q[:, j]):
            writer.writerow([repr(float(t)), repr(float(a)), repr(float(b))])
    return path


def render_figures(traj: Trajectory, outdir, csv_name: str = "trajectory.csv") -> dict[str, Path]:
    """Write projection CSV, PNG figures and the plot script; return their paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    i, j = planar_coordinates(traj.coord_names)
    xname, yname = traj.coord_names[i], traj.coord_names[j]
    title = traj.metadata.get("system", "")
    paths = {"projection_csv": write_projection_csv(traj, outdir / "xy_projection.csv")}

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(traj.q[:, i], traj.q[:, j], lw=1.0)
        ax.plot(traj.q[0, i], traj.q[0, j], "o", ms=4, label="start")
        ax.set_xlabel(xname)
        ax.set_ylabel(yname)
        ax.set_aspect("equal", adjustable="datalim")
        ax.legend(loc="best")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        paths["projection_png"] = outdir / "xy_projection.png"
        fig.savefig(paths["projection_png"])
        plt.close(fig)

        m = traj.mu_hats.shape[1]
        fig, axes = plt.subplots(m, 2, squeeze=False, sharex=True,
                                 figsize=(STYLE["figure.figsize"][0] * 1.6, 2.2 * m + 0.6))
        for b in range(m):
            values = traj.mu_hats[:, b]
            axes[b, 0].plot(traj.times, values, lw=1.0)
            axes[b, 0].set_ylabel(f"muhat_{b + 1}")
            nonzero = np.abs(values) > 0
            axes[b, 1].semilogy(traj.times[nonzero], np.abs(values[nonzero]), lw=1.0,
                                label="|muhat|")
            axes[b, 1].semilogy(traj.times, abs(values[0]) * np.exp(-traj.metadata.get("gain", 1.0)
                                                                     * traj.times),
                                "--", lw=0.8, label="|muhat(0)| exp(-k t)")
            axes[b, 1].legend(loc="upper right")
        axes[-1, 0].set_xlabel("t")
        axes[-1, 1].set_xlabel("t")
        fig.tight_layout()
        paths["constraints_png"] = outdir / "constraints.png"
        fig.savefig(paths["constraints_png"])
        plt.close(fig)

    script = outdir / "plot_trajectory.py"
    script.write_text(PLOT_SCRIPT.format(csv_name=csv_name, xname=xname, yname=yname))
    paths["script"] = script
    return paths
