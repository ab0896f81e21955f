"""Trajectory CSV format.

Header ``t,<coords>,d<coords>,u_1..u_m,muhat_1..muhat_m,energy``; one row per
sample, comma separated, LF line endings, floats in shortest round-trip
form so that reading back reproduces every value exactly.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import TextIO, Union

import numpy as np

from .errors import ConfigError
from .simulation import Trajectory


def header(coord_names, m: int) -> list[str]:
    return (["t"] + list(coord_names) + ["d" + c for c in coord_names]
            + [f"u_{a + 1}" for a in range(m)] + [f"muhat_{b + 1}" for b in range(m)] + ["energy"])


def write_csv(traj: Trajectory, dest: Union[str, Path, TextIO]) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            write_csv(traj, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(header(traj.coord_names, traj.mu_hats.shape[1]))
    table = np.column_stack([traj.times, traj.q, traj.v, traj.controls, traj.mu_hats, traj.energies])
    for row in table:
        writer.writerow([repr(float(x)) for x in row])


def to_csv_string(traj: Trajectory) -> str:
    buf = io.StringIO()
    write_csv(traj, buf)
    return buf.getvalue()


def read_csv(source: Union[str, Path, TextIO]) -> Trajectory:
    """Parse a trajectory CSV; raises ConfigError (with line numbers) on malformed input."""
    if isinstance(source, (str, Path)):
        try:
            with open(source, newline="") as fh:
                return read_csv(fh)
        except OSError as err:
            raise ConfigError(f"cannot read {source}: {err}") from None
    rows = list(csv.reader(source))
    if not rows:
        raise ConfigError("empty CSV file")
    head = [h.strip() for h in rows[0]]
    coords, m = _parse_header(head)
    if len(rows) < 2:
        raise ConfigError("CSV file has a header but no data rows", line=1)
    data = np.empty((len(rows) - 1, len(head)))
    for i, row in enumerate(rows[1:]):
        if len(row) != len(head):
            raise ConfigError(f"expected {len(head)} fields, got {len(row)}", line=i + 2)
        try:
            data[i] = [float(x) for x in row]
        except ValueError as err:
            raise ConfigError(f"non-numeric field: {err}", line=i + 2) from None
    n = len(coords)
    times = data[:, 0]
    if np.any(np.diff(times) <= 0):
        raise ConfigError("times must be strictly increasing")
    cols = np.split(data[:, 1:-1], np.cumsum([n, n, m])[:3], axis=1)
    dt = float(times[1] - times[0]) if len(times) > 1 else 0.0
    return Trajectory(times, cols[0], cols[1], cols[2], cols[3], data[:, -1], tuple(coords),
                      {"dt": dt, "source": "csv"})


def _parse_header(head: list[str]) -> tuple[list[str], int]:
    if len(head) < 2 or head[0] != "t" or head[-1] != "energy":
        raise ConfigError("header must start with 't' and end with 'energy'", line=1)
    m = sum(h.startswith("muhat_") for h in head)
    middle = head[1:-1 - 2 * m]
    if len(middle) % 2:
        raise ConfigError("header has an odd number of coordinate columns", line=1)
    n = len(middle) // 2
    coords = middle[:n]
    expected = header(coords, m)
    if head != expected:
        raise ConfigError(f"unexpected header; expected {','.join(expected)}", line=1)
    return coords, m
