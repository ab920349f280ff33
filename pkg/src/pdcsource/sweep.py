"""Two-parameter maps of purity and Schmidt number.

Each cell is an independent :class:`PDCSource` fit with only the swept
parameters changed. Cells are written into the output by index, so the
result does not depend on the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .schmidt import purity
from .source import FIDELITY, PDCSource

__all__ = ["AXIS_PARAMS", "SweepAxis", "SweepSpec", "SweepResult", "run_sweep"]

#: sweepable quantity -> PDCSource parameter
AXIS_PARAMS = {
    "pump_angle_fwhm": "pump_angle_fwhm_deg",
    "collection_fwhm": "collection_fwhm_deg",
    "crystal_length": "length_mm",
    "theta_pm": "theta_pm_deg",
    "pump_wavelength": "pump_center_nm",
    "chirp_nm_per_fwhm": "chirp_nm_per_fwhm",
    "chirp_sign": "chirp_sign",
}

_ANGLE_AXES = ("pump_angle_fwhm", "collection_fwhm")


@dataclass(frozen=True)
class SweepAxis:
    """One swept parameter: ``steps`` evenly spaced values in [min, max], or explicit ``values``."""

    name: str
    min: float = 0.0
    max: float = 0.0
    steps: int = 2
    values: tuple | None = None

    def __post_init__(self):
        if self.name not in AXIS_PARAMS:
            raise ValueError(f"unknown sweep parameter {self.name!r}; allowed: {', '.join(AXIS_PARAMS)}")
        if self.values is not None:
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
            if not self.values:
                raise ValueError(f"{self.name}: empty value list")
        else:
            if not (isinstance(self.steps, (int, np.integer)) and self.steps >= 1):
                raise ValueError(f"{self.name}: steps must be a positive integer")
            # a single step only makes sense as a degenerate range
            if self.steps == 1 and self.min != self.max:
                raise ValueError(f"{self.name}: steps must be >= 2 unless min == max")
            if self.max < self.min:
                raise ValueError(f"{self.name}: max < min")
        grid = self.grid()
        if not np.all(np.isfinite(grid)):
            raise ValueError(f"{self.name}: non-finite values")
        if self.name in _ANGLE_AXES and not np.all((grid > 0) & (grid < 5)):
            raise ValueError(f"{self.name}: angular widths must lie in (0, 5) degrees")
        if self.name == "crystal_length" and not np.all(grid > 0):
            raise ValueError("crystal_length must be positive")
        if self.name == "pump_wavelength" and not np.all(grid > 0):
            raise ValueError("pump_wavelength must be positive")
        if self.name == "theta_pm" and not np.all((grid > 0) & (grid < 90)):
            raise ValueError("theta_pm must lie in (0, 90) degrees")
        if self.name == "chirp_sign" and not np.all(np.isin(grid, (-1.0, 1.0))):
            raise ValueError("chirp_sign values must be -1 or +1")

    @property
    def param(self) -> str:
        return AXIS_PARAMS[self.name]

    def grid(self) -> np.ndarray:
        if self.values is not None:
            return np.array(self.values, dtype=float)
        if self.steps == 1:
            return np.array([float(self.min)])
        return np.linspace(float(self.min), float(self.max), int(self.steps))


@dataclass(frozen=True)
class SweepSpec:
    rows: SweepAxis
    cols: SweepAxis
    base: PDCSource = field(default_factory=PDCSource)
    fidelity: str = "reduced"

    def __post_init__(self):
        if self.rows.name == self.cols.name:
            raise ValueError("the two sweep axes must differ")
        if self.fidelity not in FIDELITY and self.fidelity != "base":
            raise ValueError(f"fidelity must be one of {sorted(FIDELITY) + ['base']}")


@dataclass
class SweepResult:
    """Purity and K over the grid; rows follow ``rows`` axis values, columns ``cols``."""

    row_name: str
    row_values: np.ndarray
    col_name: str
    col_values: np.ndarray
    purity: np.ndarray
    K: np.ndarray
    errors: dict
    meta: dict


def _cell_value(value, name):
    if name == "chirp_sign":
        return int(value)
    return float(value)


def _base_for(spec: SweepSpec) -> PDCSource:
    base = clone(spec.base)
    if spec.fidelity != "base":
        base.set_params(**FIDELITY[spec.fidelity])
    # The crystal is cut once: an "auto" angle is fixed by the base pump,
    # not re-solved for each swept wavelength.
    if base.theta_pm_deg == "auto":
        base.set_params(theta_pm_deg=math.degrees(base.theta_pm()))
    # threads go to cells, not to the inner angular sum
    base.set_params(n_jobs=1)
    return base


def run_sweep(spec: SweepSpec, n_jobs: int = 1) -> SweepResult:
    """Evaluate every cell; failing cells become NaN with the message kept in ``errors``."""
    base = _base_for(spec)
    rv, cv = spec.rows.grid(), spec.cols.grid()
    P = np.full((len(rv), len(cv)), np.nan)
    K = np.full_like(P, np.nan)
    errors = {}

    def cell(ij):
        i, j = ij
        est = clone(base).set_params(
            **{
                spec.rows.param: _cell_value(rv[i], spec.rows.name),
                spec.cols.param: _cell_value(cv[j], spec.cols.name),
            }
        )
        try:
            est.fit()
        except (ValueError, ArithmeticError) as exc:
            return ij, None, f"{type(exc).__name__}: {exc}"
        return ij, (purity(est.jsa_), est.schmidt_number_), None

    cells = [(i, j) for i in range(len(rv)) for j in range(len(cv))]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(cell, cells))
    else:
        outcomes = [cell(ij) for ij in cells]
    for (i, j), vals, err in outcomes:
        if vals is None:
            errors[(i, j)] = err
        else:
            P[i, j], K[i, j] = vals
    meta = {
        "fidelity": spec.fidelity,
        "grid_n": base.grid_n,
        "n_angles": base.n_angles,
        "base_params": {k: v for k, v in base.get_params().items() if k != "n_jobs"},
    }
    return SweepResult(spec.rows.name, rv, spec.cols.name, cv, P, K, errors, meta)
