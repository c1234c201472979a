"""Archive heatmaps rendered on the run's grid geometry.

``raw`` and ``best-of-cell`` color each cell by the mean respectively
best stored fitness of a snapshot; ``corrected`` renders a
corrected-container CSV as exported by the harness.  Colors are
normalized fitness: (f - vmin) / (vmax - vmin), with the data range as
the default bounds.  Empty cells stay blank.
"""
from __future__ import annotations

import math

import matplotlib as mpl
import numpy as np
from matplotlib.collections import PatchCollection
from matplotlib.patches import Wedge

from .io import SchemaError, load_corrected, load_grid_config, load_snapshot
from .render import new_figure, save_png, style_context

MODES = ("raw", "corrected", "best-of-cell")


def cell_values(df, mode: str, n_cells: int, source: str = "input") -> np.ndarray:
    """Per-cell fitness for one render mode, NaN where a cell is empty."""
    if mode == "corrected":
        per_cell = df.set_index("cell_index")["fitness"]
    elif mode == "best-of-cell":
        per_cell = df.groupby("cell_index")["fitness"].max()
    elif mode == "raw":
        per_cell = df.groupby("cell_index")["fitness"].mean()
    else:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    values = np.full(n_cells, np.nan)
    if len(per_cell):
        idx = per_cell.index.to_numpy()
        if idx.min() < 0 or idx.max() >= n_cells:
            raise SchemaError(
                f"{source}: cell_index {idx.max()} does not fit the "
                f"configured geometry ({n_cells} cells)")
        values[idx] = per_cell.to_numpy()
    return values


def normalize(values: np.ndarray, vmin=None, vmax=None) -> np.ndarray:
    """Map fitness to [0, 1]; NaN passes through, degenerate range -> 0.5."""
    finite = values[~np.isnan(values)]
    if finite.size == 0:
        return values
    lo = float(finite.min()) if vmin is None else float(vmin)
    hi = float(finite.max()) if vmax is None else float(vmax)
    if hi <= lo:
        return np.where(np.isnan(values), np.nan, 0.5)
    return np.clip((values - lo) / (hi - lo), 0.0, 1.0)


def _polar_patches(grid: dict, norm_values: np.ndarray):
    cx, cy = grid["center"]
    radius = float(grid["radius"])
    rings = int(grid["rings"])
    patches, shades = [], []
    for ring in range(rings):
        r_out = radius * (ring + 1) / rings
        sectors = 2 * (2 * ring + 1)
        step = 360.0 / sectors
        for s in range(sectors):
            v = norm_values[2 * ring * ring + s]
            if math.isnan(v):
                continue
            patches.append(Wedge((cx, cy), r_out, s * step, (s + 1) * step,
                                 width=radius / rings))
            shades.append(v)
    return patches, shades


def plot_container_heatmap(input_path, config_path, mode: str, out,
                           vmin=None, vmax=None):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    grid = load_grid_config(config_path)
    df = load_corrected(input_path) if mode == "corrected" else load_snapshot(input_path)
    if grid["kind"] == "cartesian":
        n0, n1 = (int(n) for n in grid["shape"])
        n_cells = n0 * n1
    else:
        n_cells = 2 * int(grid["rings"]) ** 2
    shade = normalize(cell_values(df, mode, n_cells, source=str(input_path)),
                      vmin, vmax)

    with style_context():
        fig, ax = new_figure(6.0, 5.0)
        cmap = mpl.colormaps["viridis"]
        if grid["kind"] == "cartesian":
            lower, upper = grid["lower"], grid["upper"]
            # flat index is row-major in bd0, so transpose puts bd0 on x
            image = np.ma.masked_invalid(shade.reshape(n0, n1).T)
            drawn = ax.imshow(image, origin="lower", cmap=cmap, vmin=0.0,
                              vmax=1.0, aspect="auto",
                              extent=(lower[0], upper[0], lower[1], upper[1]))
        else:
            patches, shades = _polar_patches(grid, shade)
            drawn = PatchCollection(patches, cmap=cmap)
            drawn.set_array(np.asarray(shades))
            drawn.set_clim(0.0, 1.0)
            ax.add_collection(drawn)
            cx, cy = grid["center"]
            radius = float(grid["radius"])
            margin = 1.02 * radius
            ax.set_xlim(cx - margin, cx + margin)
            ax.set_ylim(cy - margin, cy + margin)
            ax.set_aspect("equal")
        ax.set_xlabel("bd0")
        ax.set_ylabel("bd1")
        ax.set_title(f"{mode} container")
        fig.colorbar(drawn, ax=ax, label="normalized fitness")
        fig.tight_layout()
        return save_png(fig, out)
