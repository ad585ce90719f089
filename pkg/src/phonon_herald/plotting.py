"""Self-contained SVG figures rendered with matplotlib's SVG backend.

Output is made reproducible by fixing the element-id salt and dropping the
creation-date metadata.
"""

from __future__ import annotations

import io
from typing import Sequence

import numpy as np

_SALT = "phonon-herald"


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = _SALT
    matplotlib.rcParams["svg.fonttype"] = "path"
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    return plt, fig, ax


def _svg(plt, fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return buf.getvalue()


def line_plot(x: Sequence[float], ys: dict[str, Sequence[float]], xlabel: str, ylabel: str, title: str = "") -> bytes:
    plt, fig, ax = _figure()
    for label, y in ys.items():
        ax.plot(x, y, marker="o", ms=3, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(ys) > 1:
        ax.legend()
    ax.ticklabel_format(axis="y", useOffset=False)
    ax.grid(alpha=0.3)
    return _svg(plt, fig)


def bar_plot(n: Sequence[int], p: Sequence[float], title: str = "") -> bytes:
    plt, fig, ax = _figure()
    ax.bar(n, p, color="tab:blue")
    ax.set_xlabel("n")
    ax.set_ylabel("P(n)")
    ax.set_xticks(list(n))
    if title:
        ax.set_title(title)
    return _svg(plt, fig)


def heat_map(axis: np.ndarray, values: np.ndarray, title: str = "") -> bytes:
    plt, fig, ax = _figure()
    lim = float(np.abs(values).max()) or 1.0
    # values[i, j] is at (axis[i], axis[j]); imshow wants rows along the vertical
    im = ax.imshow(
        values.T,
        origin="lower",
        extent=(axis[0], axis[-1], axis[0], axis[-1]),
        cmap="RdBu_r",
        vmin=-lim,
        vmax=lim,
    )
    fig.colorbar(im, ax=ax, label="W")
    ax.set_xlabel(r"$\delta_r$")
    ax.set_ylabel(r"$\delta_i$")
    if title:
        ax.set_title(title)
    return _svg(plt, fig)


def fidelity_map(records: Sequence[tuple[float, float, float]], threshold: float = 0.999) -> bytes:
    """Fidelity over (time, temperature) from ``(T_mK, t_us, F)`` records, ``threshold`` contour drawn."""
    plt, fig, ax = _figure()
    temps = sorted({r[0] for r in records})
    times = sorted({r[1] for r in records})
    grid = np.full((len(temps), len(times)), np.nan)
    for T, t, F in records:
        grid[temps.index(T), times.index(t)] = np.nan if F is None else F
    if len(temps) >= 2 and len(times) >= 2:
        mesh = ax.pcolormesh(times, temps, grid, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="F")
        if np.nanmin(grid) < threshold < np.nanmax(grid):
            cs = ax.contour(times, temps, grid, levels=[threshold], colors="w")
            ax.clabel(cs, fmt={threshold: f"F={threshold}"})
        ax.set_xlabel("t (us)")
        ax.set_ylabel("T (mK)")
    else:
        if len(times) == 1:
            ax.plot(temps, grid[:, 0], marker="o")
            ax.set_xlabel("T (mK)")
        else:
            ax.plot(times, grid[0], marker="o")
            ax.set_xlabel("t (us)")
        ax.axhline(threshold, color="gray", ls="--", label=f"F={threshold}")
        ax.set_ylabel("F")
        ax.legend()
    return _svg(plt, fig)
