"""Report figures rendered next to the delimited output.

Field maps are drawn as flat-shaded cell polygons (the solution is
piecewise constant, interpolating it would be dishonest) and the
diagnostics series as simple line plots.  Everything uses the Agg
backend so runs work headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import PolyCollection

__all__ = ["render_fields_figure", "render_series_figure", "render_trajectory_figure"]

_SPECIES_LABELS = (
    "u1 (toxic oligomers)",
    "u2 (plaques)",
    "u3 (precursor protein)",
    "u4 (microglia)",
    "u5 (cytokines)",
)


def _cell_polys(mesh):
    return [mesh.points[np.asarray(c, dtype=int)] for c in mesh.cells]


def render_fields_figure(mesh, state, path, title: str | None = None) -> None:
    """One panel per species, cell-wise flat shading."""
    polys = _cell_polys(mesh)
    fig, axes = plt.subplots(2, 3, figsize=(13.5, 8.0))
    axes = axes.ravel()
    for i in range(5):
        ax = axes[i]
        pc = PolyCollection(polys, array=state.u[i], cmap="viridis", edgecolors="none")
        ax.add_collection(pc)
        ax.autoscale_view()
        ax.set_aspect("equal")
        ax.set_title(_SPECIES_LABELS[i], fontsize=10)
        fig.colorbar(pc, ax=ax, shrink=0.85)
    axes[5].axis("off")
    fig.suptitle(title if title is not None else f"fields at t = {state.t:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_series_figure(diagnostics, path) -> None:
    """Summary of the diagnostics series: means, envelopes, energy, variance."""
    t = np.array([d.t for d in diagnostics])
    means = np.array([d.species_mean for d in diagnostics])
    mins = np.array([d.species_min for d in diagnostics])
    maxs = np.array([d.species_max for d in diagnostics])
    energy = np.array([d.gradient_energy for d in diagnostics])
    variance = np.array([d.spatial_variance_u1 for d in diagnostics])

    fig, axes = plt.subplots(2, 2, figsize=(11.0, 7.5))
    ax = axes[0, 0]
    for i in range(5):
        ax.plot(t, means[:, i], label=f"u{i + 1}")
    ax.set_xlabel("t (months)")
    ax.set_ylabel("area-weighted mean")
    ax.legend(fontsize=8)
    ax.set_title("species means")

    ax = axes[0, 1]
    for i, color in ((0, "tab:blue"), (3, "tab:orange")):
        ax.fill_between(t, mins[:, i], maxs[:, i], alpha=0.25, color=color)
        ax.plot(t, means[:, i], color=color, label=f"u{i + 1}")
    ax.set_xlabel("t (months)")
    ax.set_ylabel("min/mean/max")
    ax.legend(fontsize=8)
    ax.set_title("oligomer and microglia envelopes")

    ax = axes[1, 0]
    ax.plot(t, energy)
    ax.set_xlabel("t (months)")
    ax.set_ylabel("gradient energy")
    ax.set_title("discrete gradient energy")

    ax = axes[1, 1]
    ax.plot(t, variance)
    ax.set_xlabel("t (months)")
    ax.set_ylabel("variance of u1")
    ax.set_title("spatial variance (pattern onset)")

    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_trajectory_figure(traj, path, title: str | None = None) -> None:
    """Pointwise trajectory: all five components over time, violations marked."""
    fig, ax = plt.subplots(figsize=(8.5, 5.5))
    for i in range(5):
        ax.plot(traj.times, traj.states[:, i], label=f"u{i + 1}")
    if traj.first_violation is not None:
        ax.axvline(traj.times[traj.first_violation], color="red", linestyle="--", linewidth=1.0,
                   label="first bounds violation")
    ax.set_xlabel("t (months)")
    ax.set_ylabel("concentration")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
