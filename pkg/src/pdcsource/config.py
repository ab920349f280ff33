"""Source configuration: TOML sections, validation and precedence.

Effective configuration is built as defaults < file < command-line flags.
The default file can be set with the ``PDCSOURCE_CONFIG`` environment
variable. A grid file written by this package is also accepted as a
config source: its embedded header is read back.

Sections and keys (units in the key names)::

    [crystal]    name, length_mm, theta_pm_deg ("auto" or degrees), orientation_sign
    [pump]       center_nm, fwhm_nm, angular_fwhm_deg | (beam_fwhm_um, focal_mm),
                 chirp_nm_per_fwhm, chirp_sign ("positive"/"negative"/+1/-1), chirp_scale
    [collection] fwhm_deg
    [grid]       n, span_nm, center_nm ("auto" = twice the pump wavelength)
    [quadrature] n_angles, span_widths
    [model]      mode ("paired"/"full"/"planewave"), shape ("sinc"/"gaussian")
"""
from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass

from ._compat import tomllib
from .source import PDCSource

__all__ = ["ConfigError", "DEFAULTS", "ENV_VAR", "SourceConfig", "parse_config", "beam_to_angle_deg"]

ENV_VAR = "PDCSOURCE_CONFIG"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


DEFAULTS = {
    "crystal": {"name": "KDP", "length_mm": 5.0, "theta_pm_deg": "auto", "orientation_sign": 1},
    "pump": {
        "center_nm": 415.0,
        "fwhm_nm": 4.0,
        "angular_fwhm_deg": 0.16,
        "chirp_nm_per_fwhm": 7.5,
        "chirp_sign": 1,
        "chirp_scale": "fundamental",
    },
    "collection": {"fwhm_deg": 0.30},
    "grid": {"n": 100, "span_nm": 40.0, "center_nm": "auto"},
    "quadrature": {"n_angles": 11, "span_widths": 2.5},
    "model": {"mode": "paired", "shape": "sinc"},
}

# keys accepted on input but folded into others during validation
_EXTRA_KEYS = {"pump": {"beam_fwhm_um", "focal_mm"}}


def beam_to_angle_deg(beam_fwhm_um, focal_mm) -> float:
    """Angular FWHM of a collimated beam of diameter D focused by a lens f: D / f."""
    return math.degrees((beam_fwhm_um * 1e-6) / (focal_mm * 1e-3))


def _num(section, key, value, lo=None, hi=None, lo_open=True, integer=False):
    where = f"{section}.{key}"
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where}: must be finite")
    if lo is not None and (value <= lo if lo_open else value < lo):
        raise ConfigError(f"{where}: must be {'>' if lo_open else '>='} {lo}, got {value!r}")
    if hi is not None and value >= hi:
        raise ConfigError(f"{where}: must be < {hi}, got {value!r}")
    return int(value) if integer else float(value)


def _sign(section, key, value):
    aliases = {"positive": 1, "+": 1, "negative": -1, "-": -1}
    if isinstance(value, str):
        v = aliases.get(value.strip().lower())
        if v is None:
            try:
                v = int(value)
            except ValueError:
                v = None
    elif isinstance(value, (int, float)) and not isinstance(value, bool):
        v = value
    else:
        v = None
    if v not in (1, -1):
        raise ConfigError(f"{section}.{key}: expected positive/negative or +1/-1, got {value!r}")
    return int(v)


def _choice(section, key, value, options):
    if value not in options:
        raise ConfigError(f"{section}.{key}: expected one of {list(options)}, got {value!r}")
    return value


@dataclass(frozen=True)
class SourceConfig:
    """Validated configuration; ``data`` holds the canonical nested mapping."""

    data: dict

    @classmethod
    def defaults(cls) -> "SourceConfig":
        return cls.from_mapping({})

    @classmethod
    def from_mapping(cls, raw) -> "SourceConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a table of sections")
        for section in raw:
            if section not in DEFAULTS:
                raise ConfigError(f"unknown section [{section}]; allowed: {', '.join(DEFAULTS)}")
        cfg = copy.deepcopy(DEFAULTS)
        for section, values in raw.items():
            if not isinstance(values, dict):
                raise ConfigError(f"[{section}] must be a table")
            allowed = set(DEFAULTS[section]) | _EXTRA_KEYS.get(section, set())
            for key in values:
                if key not in allowed:
                    raise ConfigError(f"unknown key {section}.{key}; allowed: {', '.join(sorted(allowed))}")
            cfg[section].update(values)
        return cls(_validate(cfg, raw.get("pump", {})))

    def to_toml(self) -> str:
        out = []
        for section, values in self.data.items():
            out.append(f"[{section}]")
            for k, v in values.items():
                out.append(f"{k} = {json.dumps(v)}")
            out.append("")
        return "\n".join(out)

    def to_json(self) -> str:
        """Canonical one-line form used in file headers."""
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def with_overrides(self, overrides: dict) -> "SourceConfig":
        merged = copy.deepcopy(self.data)
        for section, values in overrides.items():
            merged.setdefault(section, {}).update(values)
        # an explicit angular width wins over a beam/focal pair and vice versa
        pump_over = overrides.get("pump", {})
        if "beam_fwhm_um" in pump_over or "focal_mm" in pump_over:
            merged["pump"].pop("angular_fwhm_deg", None)
        return SourceConfig.from_mapping(merged)

    def estimator_params(self) -> dict:
        d = self.data
        c, p, g = d["crystal"], d["pump"], d["grid"]
        return {
            "crystal": c["name"],
            "length_mm": c["length_mm"],
            "theta_pm_deg": c["theta_pm_deg"],
            "orientation": c["orientation_sign"],
            "pump_center_nm": p["center_nm"],
            "pump_fwhm_nm": p["fwhm_nm"],
            "pump_angle_fwhm_deg": p["angular_fwhm_deg"],
            "chirp_nm_per_fwhm": p["chirp_nm_per_fwhm"],
            "chirp_sign": p["chirp_sign"],
            "chirp_scale": p["chirp_scale"],
            "collection_fwhm_deg": d["collection"]["fwhm_deg"],
            "grid_n": g["n"],
            "grid_span_nm": g["span_nm"],
            "grid_center_nm": None if g["center_nm"] == "auto" else g["center_nm"],
            "n_angles": d["quadrature"]["n_angles"],
            "span_widths": d["quadrature"]["span_widths"],
            "mode": d["model"]["mode"],
            "shape": d["model"]["shape"],
        }

    def to_estimator(self, n_jobs=1) -> PDCSource:
        return PDCSource(**self.estimator_params(), n_jobs=n_jobs)


def _validate(cfg, raw_pump) -> dict:
    c, p = cfg["crystal"], cfg["pump"]
    if not isinstance(c["name"], str) or not c["name"]:
        raise ConfigError(f"crystal.name: expected a crystal name or Sellmeier file, got {c['name']!r}")
    c["length_mm"] = _num("crystal", "length_mm", c["length_mm"], lo=0)
    if c["theta_pm_deg"] != "auto":
        c["theta_pm_deg"] = _num("crystal", "theta_pm_deg", c["theta_pm_deg"], lo=0, hi=90)
    c["orientation_sign"] = _sign("crystal", "orientation_sign", c["orientation_sign"])

    beam, focal = p.pop("beam_fwhm_um", None), p.pop("focal_mm", None)
    if (beam is None) != (focal is None):
        raise ConfigError("pump: beam_fwhm_um and focal_mm must be given together")
    if beam is not None:
        if "angular_fwhm_deg" in raw_pump:
            raise ConfigError("pump: give either angular_fwhm_deg or beam_fwhm_um/focal_mm, not both")
        beam = _num("pump", "beam_fwhm_um", beam, lo=0)
        focal = _num("pump", "focal_mm", focal, lo=0)
        p["angular_fwhm_deg"] = beam_to_angle_deg(beam, focal)
    p["center_nm"] = _num("pump", "center_nm", p["center_nm"], lo=0)
    p["fwhm_nm"] = _num("pump", "fwhm_nm", p["fwhm_nm"], lo=0)
    p["angular_fwhm_deg"] = _num("pump", "angular_fwhm_deg", p["angular_fwhm_deg"], lo=0, hi=5)
    p["chirp_nm_per_fwhm"] = _num("pump", "chirp_nm_per_fwhm", p["chirp_nm_per_fwhm"], lo=0, lo_open=False)
    p["chirp_sign"] = _sign("pump", "chirp_sign", p["chirp_sign"])
    p["chirp_scale"] = _choice("pump", "chirp_scale", p["chirp_scale"], ("fundamental", "pump"))

    col = cfg["collection"]
    col["fwhm_deg"] = _num("collection", "fwhm_deg", col["fwhm_deg"], lo=0, hi=5)

    g = cfg["grid"]
    g["n"] = _num("grid", "n", g["n"], lo=2, lo_open=False, integer=True)
    g["span_nm"] = _num("grid", "span_nm", g["span_nm"], lo=0)
    if g["center_nm"] != "auto":
        g["center_nm"] = _num("grid", "center_nm", g["center_nm"], lo=0)

    q = cfg["quadrature"]
    q["n_angles"] = _num("quadrature", "n_angles", q["n_angles"], lo=1, lo_open=False, integer=True)
    if q["n_angles"] % 2 == 0:
        raise ConfigError(f"quadrature.n_angles: must be odd, got {q['n_angles']}")
    q["span_widths"] = _num("quadrature", "span_widths", q["span_widths"], lo=0)

    m = cfg["model"]
    _choice("model", "mode", m["mode"], ("paired", "full", "planewave"))
    _choice("model", "shape", m["shape"], ("sinc", "gaussian"))
    return cfg


def _read_file(path) -> dict:
    with open(path, "rb") as fh:
        head = fh.read(64)
    if head.startswith(b"# pdcsource"):
        from .gridio import read_header

        return json.loads(read_header(path)["config"])
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None


def parse_config(path=None, overrides: dict | None = None, use_env=True) -> SourceConfig:
    """Defaults, then ``path`` (or ``$PDCSOURCE_CONFIG``), then ``overrides``."""
    if path is None and use_env:
        path = os.environ.get(ENV_VAR) or None
    cfg = SourceConfig.from_mapping(_read_file(path)) if path else SourceConfig.defaults()
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg
