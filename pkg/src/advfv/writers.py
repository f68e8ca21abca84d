"""Delimited diagnostics output and legacy-VTK snapshot output.

All floating-point values are written with 17 significant digits so that
a reader recovers them bit-exactly; determinism of the byte stream for a
fixed (config, seed) is part of the output contract and is tested.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "CSV_COLUMNS",
    "csv_header",
    "format_diagnostics_row",
    "write_csv_diagnostics",
    "CsvDiagnosticsWriter",
    "write_vtk_snapshot",
    "snapshot_filename",
    "TRAJECTORY_COLUMNS",
    "write_csv_trajectory",
]

_SPECIES = ("u1", "u2", "u3", "u4", "u5")

CSV_COLUMNS = (
    ["step", "t"]
    + [f"{s}_{stat}" for s in _SPECIES for stat in ("min", "mean", "max")]
    + ["newton_iters", "newton_residual", "gradient_energy", "spatial_variance_u1", "rectangle_ok"]
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def csv_header() -> str:
    return ",".join(CSV_COLUMNS)


def format_diagnostics_row(d) -> str:
    cells = [str(d.step), _fmt(d.t)]
    for i in range(5):
        cells += [_fmt(d.species_min[i]), _fmt(d.species_mean[i]), _fmt(d.species_max[i])]
    cells += [
        str(d.newton_iters),
        _fmt(d.newton_residual),
        _fmt(d.gradient_energy),
        _fmt(d.spatial_variance_u1),
        "1" if d.rectangle_ok else "0",
    ]
    return ",".join(cells)


def write_csv_diagnostics(series, path) -> None:
    """Write a diagnostics series to CSV; an empty series yields header only."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_header() + "\n")
        for d in series:
            fh.write(format_diagnostics_row(d) + "\n")


class CsvDiagnosticsWriter:
    """Streaming CSV writer: one row per callback, flushed immediately,
    so an aborted run still leaves every completed step on disk."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8", newline="\n")
        self._fh.write(csv_header() + "\n")
        self._fh.flush()

    def __call__(self, d) -> None:
        self._fh.write(format_diagnostics_row(d) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


TRAJECTORY_COLUMNS = ["step", "t"] + list(_SPECIES) + ["in_rectangle"]


def write_csv_trajectory(traj, path) -> None:
    """CSV for a pointwise trajectory: one row per time level."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
        for k in range(traj.times.shape[0]):
            cells = [str(k), _fmt(traj.times[k])]
            cells += [_fmt(v) for v in traj.states[k]]
            cells.append("1" if traj.in_rectangle[k] else "0")
            fh.write(",".join(cells) + "\n")


def snapshot_filename(index: int) -> str:
    return f"snapshot_{index:04d}.vtk"


def write_vtk_snapshot(mesh, state, path) -> None:
    """Write one snapshot as a legacy ASCII VTK unstructured grid.

    Cells carry the five species as CELL_DATA scalar fields u1..u5.
    Points get a zero z coordinate; values use 17 significant digits.
    """
    u = state.u
    n_cells = mesh.n_cells
    lines = [
        "# vtk DataFile Version 3.0",
        f"five-species snapshot t={_fmt(state.t)}",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.points.shape[0]} double",
    ]
    for x, y in mesh.points:
        lines.append(f"{_fmt(x)} {_fmt(y)} 0")
    total = sum(len(c) + 1 for c in mesh.cells)
    lines.append(f"CELLS {n_cells} {total}")
    for c in mesh.cells:
        lines.append(" ".join([str(len(c))] + [str(int(v)) for v in c]))
    lines.append(f"CELL_TYPES {n_cells}")
    for c in mesh.cells:
        lines.append("5" if len(c) == 3 else "9")  # VTK_TRIANGLE / VTK_QUAD
    lines.append(f"CELL_DATA {n_cells}")
    for i, name in enumerate(_SPECIES):
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        for v in u[i]:
            lines.append(_fmt(v))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
