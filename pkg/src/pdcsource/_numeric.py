"""Small numerical helpers shared by several modules."""
from __future__ import annotations

import numpy as np


class GridTooNarrowError(ValueError):
    """A half-maximum crossing falls outside the sampled window."""


def fwhm(x, y) -> float:
    """Full width at half maximum of a single-peaked sampled curve.

    Walks outward from the global maximum and linearly interpolates the
    first half-maximum crossing on each side.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    i = int(np.argmax(y))
    half = 0.5 * y[i]
    if half <= 0:
        raise ValueError("curve has no positive maximum")
    left = i
    while left > 0 and y[left - 1] > half:
        left -= 1
    right = i
    while right < len(y) - 1 and y[right + 1] > half:
        right += 1
    if left == 0 or right == len(y) - 1:
        raise GridTooNarrowError("half-maximum crossing lies beyond the grid edge (grid too narrow)")
    xl = np.interp(half, [y[left - 1], y[left]], [x[left - 1], x[left]])
    xr = np.interp(half, [y[right + 1], y[right]], [x[right + 1], x[right]])
    return float(abs(xr - xl))


def centroid(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.sum(x * y) / np.sum(y))


def is_uniform(axis, rtol=1e-9) -> bool:
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or len(axis) < 2:
        return False
    d = np.diff(axis)
    return bool(np.all(d > 0) and np.allclose(d, d.mean(), rtol=rtol, atol=0))
