"""Plain-text grid files.

Layout::

    # pdcsource grid
    # version: 0.1.0
    # kind: jsa
    # dtype: complex
    # shape: 100 100
    # rows: omega_e [rad/s]
    # cols: omega_o [rad/s]
    # config: {...canonical JSON...}
    # meta: {...JSON...}
    rows <v0> <v1> ...
    cols <v0> <v1> ...
    <row 0 values>
    ...

Numbers are written with ``%.17g`` so a load returns the same doubles.
Complex entries are ``re,im`` pairs. Nothing time- or host-dependent goes
into the file, so identical inputs give identical bytes.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .jsa import FrequencyGrid, JointAmplitude

__all__ = ["GridData", "GridFormatError", "save_grid", "load_grid", "read_header", "from_jsa", "to_jsa"]

MAGIC = "# pdcsource grid"
_HEADER_KEYS = ("version", "kind", "dtype", "shape", "rows", "cols", "config", "meta")


class GridFormatError(ValueError):
    pass


@dataclass
class GridData:
    kind: str
    row_name: str
    row_unit: str
    row_axis: np.ndarray
    col_name: str
    col_unit: str
    col_axis: np.ndarray
    values: np.ndarray
    config: str = "{}"
    meta: dict = field(default_factory=dict)
    version: str = __version__

    def __post_init__(self):
        self.row_axis = np.asarray(self.row_axis, dtype=float)
        self.col_axis = np.asarray(self.col_axis, dtype=float)
        self.values = np.asarray(self.values)
        if self.values.shape != (len(self.row_axis), len(self.col_axis)):
            raise ValueError(f"values shape {self.values.shape} does not match axes")

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)


def _fmt(x) -> str:
    return "%.17g" % x


def _fmt_c(z) -> str:
    return f"{_fmt(z.real)},{_fmt(z.imag)}"


def save_grid(g: GridData, path) -> None:
    cplx = g.is_complex
    lines = [
        MAGIC,
        f"# version: {g.version}",
        f"# kind: {g.kind}",
        f"# dtype: {'complex' if cplx else 'real'}",
        f"# shape: {g.values.shape[0]} {g.values.shape[1]}",
        f"# rows: {g.row_name} [{g.row_unit}]",
        f"# cols: {g.col_name} [{g.col_unit}]",
        f"# config: {g.config}",
        f"# meta: {json.dumps(g.meta, sort_keys=True, separators=(',', ':'), default=str)}",
        "rows " + " ".join(_fmt(v) for v in g.row_axis),
        "cols " + " ".join(_fmt(v) for v in g.col_axis),
    ]
    fmt = _fmt_c if cplx else _fmt
    for row in g.values:
        lines.append(" ".join(fmt(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header(lines, path):
    if not lines or lines[0].rstrip("\n") != MAGIC:
        raise GridFormatError(f"{path}: line 1: not a pdcsource grid file")
    head = {}
    n = 1
    while n < len(lines) and lines[n].startswith("# "):
        key, sep, value = lines[n][2:].rstrip("\n").partition(": ")
        if not sep:
            raise GridFormatError(f"{path}: line {n + 1}: malformed header line")
        head[key] = value
        n += 1
    missing = [k for k in _HEADER_KEYS if k not in head]
    if missing:
        raise GridFormatError(f"{path}: header lacks {', '.join(missing)}")
    return head, n


def read_header(path) -> dict:
    with open(path) as fh:
        lines = []
        for line in fh:
            lines.append(line)
            if not line.startswith("#"):
                break
    head, _ = _parse_header(lines, path)
    return head


def _axis_label(text, path):
    name, _, unit = text.partition(" [")
    if not unit.endswith("]"):
        raise GridFormatError(f"{path}: axis label {text!r} lacks a [unit]")
    return name, unit[:-1]


def _floats(tokens, lineno, path):
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise GridFormatError(f"{path}: line {lineno}: {exc}") from None


def load_grid(path) -> GridData:
    with open(path) as fh:
        lines = fh.readlines()
    head, n = _parse_header(lines, path)
    if head["version"] != __version__:
        warnings.warn(f"{path}: written by version {head['version']}, reading with {__version__}", stacklevel=2)
    try:
        nr, nc = (int(t) for t in head["shape"].split())
    except ValueError:
        raise GridFormatError(f"{path}: bad shape {head['shape']!r}") from None
    cplx = {"complex": True, "real": False}.get(head["dtype"])
    if cplx is None:
        raise GridFormatError(f"{path}: unknown dtype {head['dtype']!r}")
    axes = []
    for tag, count in (("rows", nr), ("cols", nc)):
        if n >= len(lines) or not lines[n].startswith(tag + " "):
            raise GridFormatError(f"{path}: line {n + 1}: expected '{tag}' axis line")
        vals = _floats(lines[n].split()[1:], n + 1, path)
        if len(vals) != count:
            raise GridFormatError(f"{path}: line {n + 1}: {tag} axis has {len(vals)} values, expected {count}")
        axes.append(np.array(vals))
        n += 1
    body = lines[n:]
    if len(body) != nr:
        raise GridFormatError(f"{path}: expected {nr} value rows, found {len(body)}")
    values = np.empty((nr, nc), dtype=complex if cplx else float)
    for i, line in enumerate(body):
        lineno = n + i + 1
        tokens = line.split()
        if len(tokens) != nc:
            raise GridFormatError(f"{path}: line {lineno}: {len(tokens)} values, expected {nc}")
        if cplx:
            parts = [t.split(",") for t in tokens]
            if any(len(p) != 2 for p in parts):
                raise GridFormatError(f"{path}: line {lineno}: complex values must be 're,im'")
            re = _floats([p[0] for p in parts], lineno, path)
            im = _floats([p[1] for p in parts], lineno, path)
            # set parts directly; re + 1j*im would turn -0.0 into 0.0
            values.real[i] = re
            values.imag[i] = im
        else:
            values[i] = _floats(tokens, lineno, path)
    rn, ru = _axis_label(head["rows"], path)
    cn, cu = _axis_label(head["cols"], path)
    try:
        meta = json.loads(head["meta"])
        json.loads(head["config"])
    except json.JSONDecodeError as exc:
        raise GridFormatError(f"{path}: bad JSON in header: {exc}") from None
    return GridData(head["kind"], rn, ru, axes[0], cn, cu, axes[1], values, head["config"], meta, head["version"])


def from_jsa(F: JointAmplitude, config: str = "{}", meta: dict | None = None) -> GridData:
    return GridData(
        "jsa", "omega_e", "rad/s", F.grid.omega_e, "omega_o", "rad/s", F.grid.omega_o, F.values, config, dict(meta or {})
    )


def to_jsa(g: GridData) -> JointAmplitude:
    if g.kind != "jsa" or g.row_unit != "rad/s" or g.col_unit != "rad/s":
        raise ValueError(f"grid of kind {g.kind!r} with units [{g.row_unit}], [{g.col_unit}] is not a JSA")
    F = JointAmplitude(FrequencyGrid(g.row_axis, g.col_axis), g.values)
    norm2 = float(np.sum(np.abs(F.values) ** 2))
    F.normalized = abs(norm2 - 1) <= 1e-12
    return F
