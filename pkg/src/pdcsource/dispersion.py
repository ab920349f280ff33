"""Uniaxial-crystal dispersion: indices, wavevectors, group velocities.

All quantities are SI (rad/s, m, s, rad). Sellmeier polynomials take the
vacuum wavelength in micrometres, as is customary for published data sets.

The generic Sellmeier form used for every built-in set is::

    n^2 = A + B / (l^2 - C) + D l^2 / (l^2 - E) - F l^2

with coefficients ``(A, B, C, D, E, F)``; trailing zeros may be omitted.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.constants import c
from scipy.optimize import brentq

__all__ = [
    "DispersionRangeError",
    "NotPhasematchableError",
    "RayKind",
    "SellmeierSet",
    "CrystalSpec",
    "KDP",
    "BBO",
    "BUILTIN_SELLMEIER",
    "get_sellmeier",
    "load_sellmeier",
    "wavelength_to_omega",
    "omega_to_wavelength",
    "refractive_index",
    "wavevector_magnitude",
    "group_velocity",
    "inverse_group_velocity",
    "collinear_mismatch",
    "solve_collinear_pm_angle",
    "solve_collinear_wavelength",
    "FactorabilityReport",
    "factorability_check",
    "transit_time_difference",
    "GAMMA_SINC",
    "DERIVATIVE_STEP",
]

#: width-matching constant between a sinc and its Gaussian approximation
GAMMA_SINC = 0.193
#: finite-difference step for dk/domega (rad/s)
DERIVATIVE_STEP = 1e10


class DispersionRangeError(ValueError):
    """Wavelength outside the validity range of a Sellmeier set."""


class NotPhasematchableError(ValueError):
    """No collinear phasematching solution exists in (0, pi/2)."""


class RayKind(enum.Enum):
    ORDINARY = "o"
    EXTRAORDINARY = "e"


def _as_coeffs(values: Sequence[float]) -> tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if not 1 <= len(vals) <= 6:
        raise ValueError(f"expected 1 to 6 Sellmeier coefficients, got {len(vals)}")
    return vals + (0.0,) * (6 - len(vals))


@dataclass(frozen=True)
class SellmeierSet:
    """Principal-index Sellmeier data for a uniaxial crystal.

    ``range_nm`` bounds every evaluation; nothing is extrapolated.
    """

    name: str
    no_coeffs: tuple[float, ...]
    ne_coeffs: tuple[float, ...]
    range_nm: tuple[float, float]
    version: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "no_coeffs", _as_coeffs(self.no_coeffs))
        object.__setattr__(self, "ne_coeffs", _as_coeffs(self.ne_coeffs))
        lo, hi = (float(v) for v in self.range_nm)
        if not 0 < lo < hi:
            raise ValueError(f"invalid range_nm {self.range_nm!r}")
        object.__setattr__(self, "range_nm", (lo, hi))
        # reject sets that are unphysical anywhere inside their own range
        probe = np.linspace(lo, hi, 257) * 1e-3
        for label, coeffs in (("n_o", self.no_coeffs), ("n_e", self.ne_coeffs)):
            n2 = _sellmeier_n2(coeffs, probe)
            if not np.all(np.isfinite(n2)) or np.any(n2 <= 1.0):
                raise ValueError(f"{self.name}: {label} is not real and > 1 over {self.range_nm} nm")

    def _check(self, wavelength_um):
        lam_nm = np.asarray(wavelength_um) * 1e3
        lo, hi = self.range_nm
        # tolerate rounding at the boundary
        bad = (lam_nm < lo * (1 - 1e-12)) | (lam_nm > hi * (1 + 1e-12)) | ~np.isfinite(lam_nm)
        if np.any(bad):
            worst = np.asarray(lam_nm)[bad].flat[0]
            raise DispersionRangeError(
                f"{self.name}: wavelength {worst:.6g} nm outside valid range {lo:g}-{hi:g} nm"
            )

    def n_o(self, wavelength_um):
        self._check(wavelength_um)
        return np.sqrt(_sellmeier_n2(self.no_coeffs, wavelength_um))

    def n_e_principal(self, wavelength_um):
        self._check(wavelength_um)
        return np.sqrt(_sellmeier_n2(self.ne_coeffs, wavelength_um))


def _sellmeier_n2(coeffs, lam_um):
    a, b, cc, d, e, f = coeffs
    l2 = np.asarray(lam_um, dtype=float) ** 2
    return a + b / (l2 - cc) + d * l2 / (l2 - e) - f * l2


# Zernike (1964) as tabulated in Dmitriev, Gurzadyan & Nikogosyan,
# "Handbook of Nonlinear Optical Crystals".
KDP = SellmeierSet(
    name="KDP",
    no_coeffs=(2.259276, 0.01008956, 0.012942625, 13.00522, 400.0),
    ne_coeffs=(2.132668, 0.008637494, 0.012281043, 3.2279924, 400.0),
    range_nm=(213.4, 1529.0),
    version="zernike-1964",
)

# Eimerl et al. (1987).
BBO = SellmeierSet(
    name="BBO",
    no_coeffs=(2.7405, 0.0184, 0.0179, 0.0, 0.0, 0.0155),
    ne_coeffs=(2.3730, 0.0128, 0.0156, 0.0, 0.0, 0.0044),
    range_nm=(220.0, 1060.0),
    version="eimerl-1987",
)

BUILTIN_SELLMEIER = {"KDP": KDP, "BBO": BBO}


def get_sellmeier(name: str) -> SellmeierSet:
    try:
        return BUILTIN_SELLMEIER[name.upper()]
    except KeyError:
        raise KeyError(f"unknown crystal {name!r}; built-in sets: {sorted(BUILTIN_SELLMEIER)}") from None


def load_sellmeier(path) -> SellmeierSet:
    """Read a Sellmeier override file (TOML, or JSON if the suffix is ``.json``).

    Required keys: ``crystal``, ``no_coeffs``, ``ne_coeffs``, ``range_nm``.
    Optional: ``version``.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        data = json.loads(text)
    else:
        from ._compat import tomllib

        data = tomllib.loads(text)
    allowed = {"crystal", "no_coeffs", "ne_coeffs", "range_nm", "version"}
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"{path}: unknown key(s) {sorted(unknown)}")
    missing = {"crystal", "no_coeffs", "ne_coeffs", "range_nm"} - set(data)
    if missing:
        raise ValueError(f"{path}: missing required key(s) {sorted(missing)}")
    if len(data["range_nm"]) != 2:
        raise ValueError(f"{path}: range_nm must hold exactly two values")
    return SellmeierSet(
        name=str(data["crystal"]),
        no_coeffs=tuple(data["no_coeffs"]),
        ne_coeffs=tuple(data["ne_coeffs"]),
        range_nm=tuple(data["range_nm"]),
        version=str(data.get("version", path.name)),
    )


def wavelength_to_omega(wavelength_m):
    return 2 * np.pi * c / np.asarray(wavelength_m, dtype=float)


def omega_to_wavelength(omega):
    return 2 * np.pi * c / np.asarray(omega, dtype=float)


def refractive_index(s: SellmeierSet, ray: RayKind, omega, theta=None):
    """Refractive index seen by a ray at angular frequency ``omega``.

    For the extraordinary ray ``theta`` is the angle between the wavevector
    and the optic axis and the exact uniaxial index ellipsoid is used.
    """
    lam_um = omega_to_wavelength(omega) * 1e6
    if ray is RayKind.ORDINARY:
        if theta is not None:
            raise ValueError("ordinary index does not depend on theta")
        return s.n_o(lam_um)
    if theta is None:
        raise ValueError("extraordinary index requires the angle to the optic axis")
    no = s.n_o(lam_um)
    ne = s.n_e_principal(lam_um)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    return 1.0 / np.sqrt((cos_t / no) ** 2 + (sin_t / ne) ** 2)


def wavevector_magnitude(s: SellmeierSet, ray: RayKind, omega, theta=None):
    return refractive_index(s, ray, omega, theta) * np.asarray(omega, dtype=float) / c


def inverse_group_velocity(s: SellmeierSet, ray: RayKind, omega, theta=None, step=DERIVATIVE_STEP):
    """dk/domega at fixed theta by a 5-point central difference."""
    w = np.asarray(omega, dtype=float)
    k = lambda x: wavevector_magnitude(s, ray, x, theta)  # noqa: E731
    return (-k(w + 2 * step) + 8 * k(w + step) - 8 * k(w - step) + k(w - 2 * step)) / (12 * step)


def group_velocity(s: SellmeierSet, ray: RayKind, omega, theta=None, check=False):
    """Group velocity (dk/domega)^-1.

    With ``check=True`` the derivative is recomputed at half the step and a
    Richardson-style disagreement above 1e-9 relative raises ``ArithmeticError``.
    """
    dk = inverse_group_velocity(s, ray, omega, theta)
    if check:
        fine = inverse_group_velocity(s, ray, omega, theta, step=DERIVATIVE_STEP / 2)
        err = np.max(np.abs(fine - dk) / np.abs(fine))
        if err > 1e-9:
            raise ArithmeticError(f"group velocity derivative not converged (rel. change {err:.2e})")
    return 1.0 / dk


def collinear_mismatch(s: SellmeierSet, omega_p, omega_e, omega_o, theta):
    """Delta k for collinear type-II (e -> e + o) downconversion."""
    return (
        wavevector_magnitude(s, RayKind.EXTRAORDINARY, omega_p, theta)
        - wavevector_magnitude(s, RayKind.EXTRAORDINARY, omega_e, theta)
        - wavevector_magnitude(s, RayKind.ORDINARY, omega_o)
    )


def solve_collinear_pm_angle(s: SellmeierSet, lambda_pump, lambda_e, lambda_o) -> float:
    """Angle to the optic axis at which collinear e -> e + o is phasematched.

    Wavelengths in metres; returns radians.
    """
    if abs(1 / lambda_pump - 1 / lambda_e - 1 / lambda_o) * lambda_pump > 1e-9:
        raise ValueError("wavelengths violate energy conservation")
    wp, we, wo = (float(wavelength_to_omega(x)) for x in (lambda_pump, lambda_e, lambda_o))
    f = lambda t: float(collinear_mismatch(s, wp, we, wo, t))  # noqa: E731
    lo, hi = 1e-6, math.pi / 2
    if f(lo) * f(hi) > 0:
        raise NotPhasematchableError(
            f"{s.name}: {lambda_pump * 1e9:g} -> {lambda_e * 1e9:g} + {lambda_o * 1e9:g} nm is not phasematchable"
        )
    return brentq(f, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)


def solve_collinear_wavelength(s: SellmeierSet, lambda_pump, theta, window_nm=(600.0, 1200.0)) -> tuple[float, float]:
    """(lambda_e, lambda_o) in metres phasematched collinearly at crystal angle ``theta``.

    The search covers e-ray wavelengths in ``window_nm`` (clipped so both
    daughters stay inside the Sellmeier range).
    """
    wp = float(wavelength_to_omega(lambda_pump))
    lo_nm, hi_nm = s.range_nm
    lam_lo = max(window_nm[0], lo_nm) * 1e-9
    lam_hi = min(window_nm[1], hi_nm) * 1e-9
    # o-ray partner must also be in range
    partner = lambda le: 1 / (1 / lambda_pump - 1 / le)  # noqa: E731
    grid = np.linspace(lam_lo, lam_hi, 400)
    ok = [(le, partner(le)) for le in grid if lam_lo <= partner(le) <= lam_hi]
    if len(ok) < 2:
        raise NotPhasematchableError("no admissible wavelength window")

    def f(le):
        return float(collinear_mismatch(s, wp, wavelength_to_omega(le), wavelength_to_omega(partner(le)), theta))

    vals = [f(le) for le, _ in ok]
    for (a, _), (b, _), fa, fb in zip(ok[:-1], ok[1:], vals[:-1], vals[1:]):
        if fa == 0:
            return a, partner(a)
        if fa * fb < 0:
            le = brentq(f, a, b, xtol=1e-18)
            return le, partner(le)
    raise NotPhasematchableError(f"no collinear solution at theta = {math.degrees(theta):.3f} deg")


@dataclass(frozen=True)
class CrystalSpec:
    """Crystal identity, length (m), cut angle (rad) and orientation sign.

    Flipping ``orientation`` corresponds to rotating the crystal by 180
    degrees about the pump axis, i.e. reversing the side of the optic axis.
    """

    sellmeier: SellmeierSet = field(default=KDP)
    length: float = 5e-3
    theta_pm: float = math.radians(67.8)
    orientation: int = 1

    def __post_init__(self):
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ValueError(f"crystal length must be > 0, got {self.length!r} (crystal too short)")
        if not 0 < self.theta_pm < math.pi / 2:
            raise ValueError(f"theta_pm must lie in (0, pi/2), got {self.theta_pm!r}")
        if self.orientation not in (1, -1):
            raise ValueError(f"orientation must be +1 or -1, got {self.orientation!r}")


def transit_time_difference(length, v_pump, v_daughter) -> float:
    """L (1/v_pump - 1/v_daughter), seconds."""
    return length * (1.0 / v_pump - 1.0 / v_daughter)


@dataclass(frozen=True)
class FactorabilityReport:
    term1: float
    term2: float
    residual: float
    delta_tau_e: float
    inverse_bandwidth: float
    v_pump: float
    v_e: float
    v_o: float

    @property
    def gv_matched(self) -> bool:
        return abs(self.term1) < 0.1 * abs(self.term2)

    @property
    def long_crystal(self) -> bool:
        """True when sigma^-1 << delta_tau_e (by a factor of ten)."""
        return self.inverse_bandwidth < 0.1 * abs(self.delta_tau_e)


def factorability_check(crystal: CrystalSpec, pump) -> FactorabilityReport:
    """Evaluate both terms of the group-velocity factorability condition.

    ``pump`` needs ``omega_0`` (degenerate daughter frequency) and
    ``sigma`` (amplitude bandwidth, rad/s).
    """
    s, L, th = crystal.sellmeier, crystal.length, crystal.theta_pm
    w0 = pump.omega_0
    v_p = float(group_velocity(s, RayKind.EXTRAORDINARY, 2 * w0, th))
    v_e = float(group_velocity(s, RayKind.EXTRAORDINARY, w0, th))
    v_o = float(group_velocity(s, RayKind.ORDINARY, w0))
    dv_e = 1 / v_p - 1 / v_e
    dv_o = 1 / v_p - 1 / v_o
    sigma = pump.sigma
    term1 = GAMMA_SINC * sigma * L * dv_o
    term2 = 4.0 / (sigma * L * dv_e)
    return FactorabilityReport(
        term1=term1,
        term2=term2,
        residual=term1 + term2,
        delta_tau_e=L * dv_e,
        inverse_bandwidth=1.0 / sigma,
        v_pump=v_p,
        v_e=v_e,
        v_o=v_o,
    )
