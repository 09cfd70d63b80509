"""PNG figures for convergence curves, variance scaling and landscapes.

Uses the object-oriented Agg backend directly, so nothing here touches
pyplot's global state and figures can be drawn from worker processes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

# fixed metadata keeps the PNG bytes reproducible
_PNG_METADATA = {"Software": None}


def _save(fig: Figure, path: str | Path) -> Path:
    FigureCanvasAgg(fig)
    path = Path(path)
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    return path


def plot_convergence(
    series: Mapping[str, Sequence[float]],
    path: str | Path,
    reference: float | None = None,
    title: str = "",
) -> Path:
    """Energy against iteration, one line per label, optional exact-energy line."""
    fig = Figure(figsize=(6.4, 4.2))
    ax = fig.add_subplot()
    for label, energies in series.items():
        ax.plot(np.arange(1, len(energies) + 1), energies, label=label, linewidth=1.2)
    if reference is not None:
        ax.axhline(reference, color="black", linestyle="--", linewidth=0.9, label="exact")
    ax.set_xlabel("iteration")
    ax.set_ylabel("energy (Ha)")
    if title:
        ax.set_title(title)
    if series:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_variance_scaling(stats: Mapping[str, Sequence], path: str | Path, title: str = "") -> Path:
    """Variance of the gradient norm against depth on a log axis.

    ``stats`` maps a label to a sequence of objects with ``depth`` and
    ``variance_of_norms`` attributes.
    """
    fig = Figure(figsize=(6.4, 4.2))
    ax = fig.add_subplot()
    for label, rows in stats.items():
        depths = [r.depth for r in rows]
        variances = [max(r.variance_of_norms, np.finfo(float).tiny) for r in rows]
        ax.plot(depths, variances, marker="o", label=label)
    ax.set_yscale("log")
    ax.set_xlabel("layers")
    ax.set_ylabel("Var(|grad E|)")
    if title:
        ax.set_title(title)
    if stats:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_landscape(grid, path: str | Path, title: str = "") -> Path:
    """Heatmap of a :class:`~vqe_plateaus.analysis.LandscapeGrid`."""
    fig = Figure(figsize=(5.2, 4.4))
    ax = fig.add_subplot()
    r = grid.half_range
    # energies[i, j] has x along i, so transpose for imshow's row = y convention
    image = ax.imshow(
        grid.energies.T, origin="lower", extent=(-r, r, -r, r) if r > 0 else None, aspect="auto",
        cmap="viridis",
    )
    fig.colorbar(image, ax=ax, label="energy (Ha)")
    ax.set_xlabel("direction 1 (rad)")
    ax.set_ylabel("direction 2 (rad)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
