"""Binary PPM heatmaps with a sidecar axes file.

Colormap ("hot", linear in value between the grid min and max): black ->
red -> yellow -> white, with the three channels ramping in turn over
thirds of the range. A constant grid renders entirely black. Row 0 of
the grid is drawn at the top of the image.
"""
from __future__ import annotations

import numpy as np

__all__ = ["hot_colormap", "render_heatmap"]


def hot_colormap(t):
    """Map t in [0, 1] to uint8 RGB."""
    t = np.clip(np.asarray(t, dtype=float), 0, 1)
    r = np.clip(3 * t, 0, 1)
    g = np.clip(3 * t - 1, 0, 1)
    b = np.clip(3 * t - 2, 0, 1)
    return np.round(np.stack([r, g, b], axis=-1) * 255).astype(np.uint8)


def render_heatmap(grid, path, scale=1, axes=None):
    """Write ``grid`` as a P6 image, each cell a ``scale`` x ``scale`` block.

    ``axes`` is an optional ``(row_label, row_values, col_label, col_values)``
    written to ``<path>.axes.txt`` together with the value range.
    """
    z = np.asarray(grid, dtype=float)
    if z.ndim != 2 or z.size == 0:
        raise ValueError("heatmap needs a non-empty 2-D grid")
    if not np.all(np.isfinite(z)):
        raise ValueError("heatmap grid contains non-finite values")
    if int(scale) < 1:
        raise ValueError("scale must be >= 1")
    lo, hi = float(z.min()), float(z.max())
    t = (z - lo) / (hi - lo) if hi > lo else np.zeros_like(z)
    rgb = hot_colormap(t)
    rgb = np.repeat(np.repeat(rgb, int(scale), axis=0), int(scale), axis=1)
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())
    lines = ["colormap: hot (black-red-yellow-white), linear", f"min: {lo:.17g}", f"max: {hi:.17g}", f"cells: {z.shape[0]} x {z.shape[1]}, scale {int(scale)}"]
    if axes is not None:
        rl, rv, cl, cv = axes
        lines.append(f"rows (top to bottom): {rl}: " + " ".join("%.10g" % v for v in rv))
        lines.append(f"cols (left to right): {cl}: " + " ".join("%.10g" % v for v in cv))
    with open(str(path) + ".axes.txt", "w") as fh:
        fh.write("\n".join(lines) + "\n")
