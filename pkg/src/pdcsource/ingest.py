"""Measured joint spectral intensities from a two-monochromator scan.

Two text layouts are read:

``csv_grid``
    First row holds the o-ray wavelengths (nm) after a leading label cell;
    each following row is an e-ray wavelength followed by its counts.

``three_column``
    Header ``lambda_e,lambda_o,counts`` then one lattice point per line,
    in any order. Every (lambda_e, lambda_o) combination must be present.

Counts are treated as intensity samples; no detector-response or
Poisson correction is applied.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .jsa import JointAmplitude, marginal_widths, ridge
from .schmidt import k_no_phase

__all__ = [
    "MeasuredJSI",
    "MeasuredReport",
    "ReferenceRow",
    "REFERENCE",
    "load_measured",
    "save_measured",
    "analyze_measured",
]

FORMATS = ("csv_grid", "three_column")


class MeasuredFormatError(ValueError):
    """A measured-data file is malformed; the message names the line."""


@dataclass
class MeasuredJSI:
    lambda_e: np.ndarray
    lambda_o: np.ndarray
    counts: np.ndarray
    integration_time: np.ndarray | None = None

    def __post_init__(self):
        self.lambda_e = np.asarray(self.lambda_e, dtype=float)
        self.lambda_o = np.asarray(self.lambda_o, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.counts.shape != (len(self.lambda_e), len(self.lambda_o)):
            raise ValueError(
                f"counts shape {self.counts.shape} does not match axes ({len(self.lambda_e)}, {len(self.lambda_o)})"
            )
        for name in ("lambda_e", "lambda_o"):
            if not _monotone(getattr(self, name)):
                raise ValueError(f"{name} axis is not strictly monotone")
        if not np.all(np.isfinite(self.counts)):
            raise ValueError("counts contain non-finite values")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        if self.integration_time is not None:
            t = np.asarray(self.integration_time, dtype=float)
            if t.shape != self.counts.shape or np.any(t <= 0):
                raise ValueError("integration_time must be positive with the shape of counts")
            self.integration_time = t

    @property
    def intensity(self) -> np.ndarray:
        """Count rate when integration times are known, raw counts otherwise."""
        if self.integration_time is None:
            return self.counts
        return self.counts / self.integration_time

    @classmethod
    def from_amplitude(cls, F: JointAmplitude) -> "MeasuredJSI":
        """|F|^2 of a model amplitude on its wavelength axes (nm)."""
        le, lo = F.grid.wavelengths_nm()
        return cls(le, lo, F.intensity)


def _monotone(axis):
    if axis.ndim != 1 or len(axis) == 0:
        return False
    if len(axis) == 1:
        return True
    d = np.diff(axis)
    return bool(np.all(d > 0) or np.all(d < 0))


def _float(token, lineno, what):
    try:
        return float(token)
    except ValueError:
        raise MeasuredFormatError(f"line {lineno}: cannot parse {what} {token!r}") from None


def _rows(path):
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
                continue
            yield lineno, [c.strip() for c in row]


def _check_axis(values, lines, name):
    for k in range(1, len(values)):
        if len(values) > 2 and (values[k] - values[k - 1]) * (values[1] - values[0]) <= 0:
            raise MeasuredFormatError(f"line {lines[k]}: {name} axis is not strictly monotone at {values[k]!r}")
        if values[k] == values[k - 1]:
            raise MeasuredFormatError(f"line {lines[k]}: repeated {name} value {values[k]!r}")


def _load_csv_grid(path) -> MeasuredJSI:
    rows = iter(_rows(path))
    try:
        head_line, head = next(rows)
    except StopIteration:
        raise MeasuredFormatError("file is empty") from None
    lam_o = [_float(t, head_line, "lambda_o") for t in head[1:]]
    if not lam_o:
        raise MeasuredFormatError(f"line {head_line}: header has no lambda_o values")
    _check_axis(lam_o, [head_line] * len(lam_o), "lambda_o")
    lam_e, counts, lines = [], [], []
    for lineno, row in rows:
        if len(row) != len(lam_o) + 1:
            raise MeasuredFormatError(f"line {lineno}: ragged row, expected {len(lam_o) + 1} fields, got {len(row)}")
        lam_e.append(_float(row[0], lineno, "lambda_e"))
        vals = [_float(t, lineno, "count") for t in row[1:]]
        for k, v in enumerate(vals):
            if not v >= 0:
                raise MeasuredFormatError(f"line {lineno}: negative or invalid count {v!r} in column {k + 2}")
        counts.append(vals)
        lines.append(lineno)
    if not lam_e:
        raise MeasuredFormatError("no data rows after the lambda_o header")
    _check_axis(lam_e, lines, "lambda_e")
    return MeasuredJSI(np.array(lam_e), np.array(lam_o), np.array(counts))


def _load_three_column(path) -> MeasuredJSI:
    rows = iter(_rows(path))
    try:
        head_line, head = next(rows)
    except StopIteration:
        raise MeasuredFormatError("file is empty") from None
    if [h.lower() for h in head] != ["lambda_e", "lambda_o", "counts"]:
        raise MeasuredFormatError(f"line {head_line}: expected header 'lambda_e,lambda_o,counts', got {','.join(head)!r}")
    cells = {}
    for lineno, row in rows:
        if len(row) != 3:
            raise MeasuredFormatError(f"line {lineno}: expected 3 fields, got {len(row)}")
        le = _float(row[0], lineno, "lambda_e")
        lo = _float(row[1], lineno, "lambda_o")
        n = _float(row[2], lineno, "count")
        if not n >= 0:
            raise MeasuredFormatError(f"line {lineno}: negative or invalid count {n!r}")
        if (le, lo) in cells:
            raise MeasuredFormatError(f"line {lineno}: duplicate cell ({le!r}, {lo!r}) first seen on line {cells[(le, lo)][1]}")
        cells[(le, lo)] = (n, lineno)
    if not cells:
        raise MeasuredFormatError("no data lines after the header")
    lam_e = sorted({k[0] for k in cells})
    lam_o = sorted({k[1] for k in cells})
    counts = np.empty((len(lam_e), len(lam_o)))
    for i, le in enumerate(lam_e):
        for j, lo in enumerate(lam_o):
            hit = cells.get((le, lo))
            if hit is None:
                raise MeasuredFormatError(f"missing lattice cell lambda_e={le!r}, lambda_o={lo!r}")
            counts[i, j] = hit[0]
    return MeasuredJSI(np.array(lam_e), np.array(lam_o), counts)


def load_measured(path, format: str = "csv_grid") -> MeasuredJSI:
    if format == "csv_grid":
        return _load_csv_grid(path)
    if format == "three_column":
        return _load_three_column(path)
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def save_measured(d: MeasuredJSI, path, format: str = "csv_grid") -> None:
    """Write with 17 significant digits so that loading returns identical floats."""
    fmt = "{:.17g}".format
    with open(path, "w", newline="") as fh:
        if format == "csv_grid":
            fh.write(",".join(["lambda_e\\lambda_o"] + [fmt(v) for v in d.lambda_o]) + "\n")
            for le, row in zip(d.lambda_e, d.counts):
                fh.write(",".join([fmt(le)] + [fmt(v) for v in row]) + "\n")
        elif format == "three_column":
            fh.write("lambda_e,lambda_o,counts\n")
            for i, le in enumerate(d.lambda_e):
                for j, lo in enumerate(d.lambda_o):
                    fh.write(f"{fmt(le)},{fmt(lo)},{fmt(d.counts[i, j])}\n")
        else:
            raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


@dataclass(frozen=True)
class ReferenceRow:
    """Published measurement for the positive-chirp source, for side-by-side printing."""

    K: float = 1.02
    P: float = 0.979
    fwhm_e_nm: float = 3.5
    fwhm_o_nm: float = 16.4


REFERENCE = ReferenceRow()


@dataclass(frozen=True)
class MeasuredReport:
    K_no_phase: float
    P_no_phase: float
    fwhm_e_nm: float
    fwhm_o_nm: float
    ridge_o_nm: np.ndarray
    ridge_e_nm: np.ndarray
    reference: ReferenceRow = REFERENCE

    def text(self) -> str:
        ref = self.reference
        ok = ~np.isnan(self.ridge_e_nm)
        span = float(np.ptp(self.ridge_e_nm[ok])) if ok.any() else math.nan
        return "\n".join(
            [
                f"{'':18s}{'this data':>12s}{'reference':>12s}",
                f"{'K (flat phase)':18s}{self.K_no_phase:12.4f}{ref.K:12.3f}",
                f"{'P (flat phase)':18s}{self.P_no_phase:12.4f}{ref.P:12.3f}",
                f"{'e-ray FWHM / nm':18s}{self.fwhm_e_nm:12.3f}{ref.fwhm_e_nm:12.1f}",
                f"{'o-ray FWHM / nm':18s}{self.fwhm_o_nm:12.3f}{ref.fwhm_o_nm:12.1f}",
                f"ridge: {int(ok.sum())} slices, e-ray centre span {span:.3f} nm",
            ]
        )


def analyze_measured(d: MeasuredJSI, ridge_mode="gaussian_fit") -> MeasuredReport:
    """Flat-phase Schmidt analysis, marginal widths and ridge of a measured grid."""
    inten = d.intensity
    if not np.any(inten > 0):
        raise ValueError("measured grid has no counts")
    res = k_no_phase(inten)
    _, _, we, wo = marginal_widths(inten, d.lambda_e, d.lambda_o, axis_kind="nm")
    r = ridge(inten, mode=ridge_mode, e_axis=d.lambda_e, o_axis=d.lambda_o)
    return MeasuredReport(res.K, res.purity, we, wo, r.o_axis, r.e_center)
