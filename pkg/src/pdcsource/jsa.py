"""Joint spectral amplitude of a focused, spatially chirped, fibre-collected pair.

Angles ``delta_*`` are measured in the principal plane from the z axis (the
collinear phasematching direction); each ray sees the optic axis at
``theta_pm - orientation * delta``.

Width convention used throughout: every Gaussian ``exp(-(x / s)**2)`` in
amplitude has an intensity FWHM of ``s * sqrt(2 ln 2)``; see
:func:`fwhm_to_sigma`.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.constants import c
from scipy.optimize import least_squares

from ._numeric import GridTooNarrowError, centroid, fwhm, is_uniform
from .dispersion import (
    GAMMA_SINC,
    CrystalSpec,
    RayKind,
    omega_to_wavelength,
    wavelength_to_omega,
    wavevector_magnitude,
)

__all__ = [
    "NO_SOLUTION",
    "GridTooNarrowError",
    "fwhm_to_sigma",
    "sigma_to_fwhm",
    "bandwidth_nm_to_omega",
    "chirp_rate",
    "PumpSpec",
    "CollectionSpec",
    "FrequencyGrid",
    "JointAmplitude",
    "quadrature_angles",
    "pump_envelope",
    "collection_weight",
    "solve_transverse",
    "delta_kz",
    "phasematching",
    "jsa_planewave",
    "jsa_integrated",
    "Marginals",
    "marginals",
    "marginal_widths",
    "Ridge",
    "ridge",
]

#: marker returned for wavevector combinations that cannot phasematch transversely
NO_SOLUTION = float("nan")

_FWHM_FACTOR = math.sqrt(2 * math.log(2))

# relative amplitude below which an integrated JSA is treated as empty
NEGLIGIBLE = 1e-8


def fwhm_to_sigma(fwhm_value):
    """Amplitude 1/e half-width from an intensity FWHM.

    ``|exp(-(x/s)^2)|^2 = exp(-2 x^2 / s^2)`` drops to 1/2 at
    ``x = s sqrt(ln2 / 2)``, so FWHM = ``s sqrt(2 ln 2)``.
    """
    return fwhm_value / _FWHM_FACTOR


def sigma_to_fwhm(sigma):
    return sigma * _FWHM_FACTOR


def bandwidth_nm_to_omega(center_m, width_m):
    """Convert a small wavelength interval at ``center_m`` to rad/s."""
    return 2 * np.pi * c * width_m / center_m**2


def chirp_rate(chirp_nm, pump_center_m, angular_fwhm, sign=1, scale="fundamental"):
    """Spatial-chirp rate q (rad/s per rad) from a wavelength shift across the beam FWHM.

    ``chirp_nm`` is the wavelength change across the FWHM beam diameter,
    which a lens of focal length f maps onto ``angular_fwhm`` = D / f. With
    ``scale="fundamental"`` it is quoted on the fundamental (pre-doubling)
    wavelength scale, so the pump itself shifts by half as much; with
    ``scale="pump"`` it is the pump-wavelength shift directly.

    Positive ``sign`` means pump wavelength increasing with delta_p, which
    makes q negative. The pump centre frequency is ``2 (omega_0 + q delta_p)``.
    """
    if scale not in ("fundamental", "pump"):
        raise ValueError(f"chirp scale must be 'fundamental' or 'pump', got {scale!r}")
    if sign not in (1, -1):
        raise ValueError(f"chirp sign must be +1 or -1, got {sign!r}")
    if not angular_fwhm > 0:
        raise ValueError("angular FWHM must be positive")
    dlam_pump = chirp_nm * 1e-9 * (0.5 if scale == "fundamental" else 1.0)
    domega_pump = bandwidth_nm_to_omega(pump_center_m, dlam_pump)
    return -sign * domega_pump / (2 * angular_fwhm)


@dataclass(frozen=True)
class PumpSpec:
    """Pump envelope parameters.

    omega_0: degenerate daughter frequency (half the pump centre), rad/s.
    sigma: amplitude bandwidth of the pump in omega_e + omega_o, rad/s.
    sigma_L: amplitude angular width, rad.
    q: spatial-chirp rate, rad/s per rad.
    """

    omega_0: float
    sigma: float
    sigma_L: float
    q: float = 0.0

    def __post_init__(self):
        if not (self.omega_0 > 0 and self.sigma > 0 and self.sigma_L > 0):
            raise ValueError("omega_0, sigma and sigma_L must be positive")
        if not math.isfinite(self.q):
            raise ValueError("chirp rate q must be finite")

    @classmethod
    def from_lab(
        cls,
        center_nm=415.0,
        fwhm_nm=4.0,
        angular_fwhm_deg=0.16,
        chirp_nm_per_fwhm=0.0,
        chirp_sign=1,
        chirp_scale="fundamental",
    ) -> "PumpSpec":
        """Build from laboratory quantities (intensity FWHMs, nm, degrees)."""
        lam = center_nm * 1e-9
        omega_p = float(wavelength_to_omega(lam))
        ang = math.radians(angular_fwhm_deg)
        return cls(
            omega_0=omega_p / 2,
            sigma=fwhm_to_sigma(bandwidth_nm_to_omega(lam, fwhm_nm * 1e-9)),
            sigma_L=fwhm_to_sigma(ang),
            q=chirp_rate(chirp_nm_per_fwhm, lam, ang, chirp_sign, chirp_scale) if chirp_nm_per_fwhm else 0.0,
        )


@dataclass(frozen=True)
class CollectionSpec:
    """Gaussian angular acceptance of the fibre-coupled pair mode."""

    sigma_F: float
    n_angles: int = 11

    def __post_init__(self):
        if not self.sigma_F > 0:
            raise ValueError("sigma_F must be positive")
        n = self.n_angles
        # n_angles = 1 collapses the quadrature onto delta = 0
        if not (isinstance(n, (int, np.integer)) and n >= 1 and n % 2 == 1):
            raise ValueError(f"n_angles must be a positive odd integer, got {n!r}")

    @classmethod
    def from_lab(cls, fwhm_deg=0.30, n_angles=11) -> "CollectionSpec":
        return cls(sigma_F=fwhm_to_sigma(math.radians(fwhm_deg)), n_angles=n_angles)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform angular-frequency axes (rad/s) for the e- and o-ray."""

    omega_e: np.ndarray
    omega_o: np.ndarray

    def __post_init__(self):
        for name in ("omega_e", "omega_o"):
            axis = np.asarray(getattr(self, name), dtype=float)
            if not is_uniform(axis):
                raise ValueError(f"{name} must be strictly increasing and uniformly spaced")
            axis.setflags(write=False)
            object.__setattr__(self, name, axis)

    @classmethod
    def from_wavelengths(cls, center_nm=830.0, span_nm=40.0, n=100) -> "FrequencyGrid":
        """Frequency-uniform grid covering ``center_nm +/- span_nm / 2`` on both axes."""
        if n < 2 or span_nm <= 0:
            raise ValueError("grid needs n >= 2 and a positive span")
        lo = (center_nm + span_nm / 2) * 1e-9
        hi = (center_nm - span_nm / 2) * 1e-9
        axis = np.linspace(float(wavelength_to_omega(lo)), float(wavelength_to_omega(hi)), n)
        return cls(axis, axis.copy())

    @property
    def shape(self):
        return (len(self.omega_e), len(self.omega_o))

    @property
    def d_omega_e(self) -> float:
        return float(self.omega_e[1] - self.omega_e[0])

    @property
    def d_omega_o(self) -> float:
        return float(self.omega_o[1] - self.omega_o[0])

    def wavelengths_nm(self):
        return omega_to_wavelength(self.omega_e) * 1e9, omega_to_wavelength(self.omega_o) * 1e9

    def mesh(self):
        return np.meshgrid(self.omega_e, self.omega_o, indexing="ij")


@dataclass
class JointAmplitude:
    """Sampled f(omega_e, omega_o); rows index omega_e, columns omega_o."""

    grid: FrequencyGrid
    values: np.ndarray
    normalized: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("joint amplitude contains non-finite entries")

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def normalize(self) -> "JointAmplitude":
        norm = np.sqrt(np.sum(self.intensity))
        if norm == 0:
            raise ValueError("cannot normalize an all-zero amplitude")
        return JointAmplitude(self.grid, self.values / norm, True, dict(self.meta))


def quadrature_angles(sigma, n, span_widths=2.5) -> np.ndarray:
    """``n`` equally spaced angles over +/- ``span_widths`` amplitude widths."""
    if n == 1:
        return np.zeros(1)
    return np.linspace(-span_widths * sigma, span_widths * sigma, n)


def pump_envelope(p: PumpSpec, omega_e, omega_o, delta_p):
    """Pump spectral-angular amplitude; real and in (0, 1]."""
    detuning = np.asarray(omega_e) + np.asarray(omega_o) - 2 * (p.omega_0 + p.q * delta_p)
    return np.exp(-((detuning / p.sigma) ** 2)) * np.exp(-((delta_p / p.sigma_L) ** 2))


def collection_weight(coll: CollectionSpec, delta):
    """Single-photon fibre filter g_F(delta); its square is the pair acceptance."""
    s = coll.sigma_F
    return (2 / (np.pi * s**2)) ** 0.25 * np.exp(-((np.asarray(delta) / s) ** 2))


def _pump_k(crystal, omega_p, delta_p):
    th = crystal.theta_pm - crystal.orientation * delta_p
    return wavevector_magnitude(crystal.sellmeier, RayKind.EXTRAORDINARY, omega_p, th)


def _e_k(crystal, omega_e, delta_e):
    th = crystal.theta_pm - crystal.orientation * delta_e
    return wavevector_magnitude(crystal.sellmeier, RayKind.EXTRAORDINARY, omega_e, th)


def _transverse(crystal, omega_e, omega_o, delta_p, delta_e):
    omega_e = np.asarray(omega_e, dtype=float)
    omega_o = np.asarray(omega_o, dtype=float)
    k_p = _pump_k(crystal, omega_e + omega_o, delta_p)
    k_e = _e_k(crystal, omega_e, delta_e)
    k_o = wavevector_magnitude(crystal.sellmeier, RayKind.ORDINARY, omega_o)
    arg = (k_p * np.sin(delta_p) - k_e * np.sin(delta_e)) / k_o
    return k_p, k_e, k_o, arg


def solve_transverse(delta_p, delta_e, omega_e, omega_o, crystal: CrystalSpec):
    """o-ray angle giving Delta k_x = 0, or NaN where no such angle exists."""
    *_, arg = _transverse(crystal, omega_e, omega_o, delta_p, delta_e)
    with np.errstate(invalid="ignore"):
        out = np.where(np.abs(arg) <= 1, np.arcsin(np.clip(arg, -1, 1)), NO_SOLUTION)
    return out if out.ndim else float(out)


def delta_kz(omega_e, omega_o, delta_p, delta_e, crystal: CrystalSpec):
    """Longitudinal mismatch (rad/m) after imposing transverse phasematching.

    NaN marks frequency/angle combinations with no transverse solution.
    """
    k_p, k_e, k_o, arg = _transverse(crystal, omega_e, omega_o, delta_p, delta_e)
    ok = np.abs(arg) <= 1
    # cos(arcsin(x)) = sqrt(1 - x^2)
    k_oz = k_o * np.sqrt(np.where(ok, 1 - arg**2, 0.0))
    dk = k_p * np.cos(delta_p) - k_e * np.cos(delta_e) - k_oz
    out = np.where(ok, dk, NO_SOLUTION)
    return out if out.ndim else float(out)


def _phase_sinc(dk, length, shape="sinc"):
    x = np.nan_to_num(dk * length / 2, nan=0.0)
    if shape == "sinc":
        envelope = np.sinc(x / np.pi)
    elif shape == "gaussian":
        envelope = np.exp(-GAMMA_SINC * x**2)
    else:
        raise ValueError(f"shape must be 'sinc' or 'gaussian', got {shape!r}")
    return np.where(np.isnan(dk), 0.0, np.exp(1j * x) * envelope)


def phasematching(omega_e, omega_o, delta_p, delta_e, crystal: CrystalSpec, shape="sinc"):
    """exp(i Dk L/2) sinc(Dk L/2); zero where transverse phasematching fails.

    ``shape="gaussian"`` swaps the sinc for its width-matched Gaussian
    exp(-0.193 x^2), which has no side lobes.
    """
    out = _phase_sinc(delta_kz(omega_e, omega_o, delta_p, delta_e, crystal), crystal.length, shape)
    return out if out.ndim else complex(out)


def jsa_planewave(
    grid: FrequencyGrid, crystal: CrystalSpec, pump: PumpSpec, delta_p=0.0, delta_e=0.0, shape="sinc"
) -> JointAmplitude:
    """Unnormalized JSA for a single pump/e-ray plane-wave pair."""
    we, wo = grid.mesh()
    values = pump_envelope(pump, we, wo, delta_p) * phasematching(we, wo, delta_p, delta_e, crystal, shape)
    return JointAmplitude(grid, values, normalized=False)


def _pump_angle_term(grid, crystal, pump, coll, delta_p, delta_e_list, weights, mode, shape):
    we, wo = grid.mesh()
    alpha = pump_envelope(pump, we, wo, delta_p)
    acc = np.zeros(grid.shape, dtype=complex)
    for de, w in zip(delta_e_list, weights):
        dk = delta_kz(we, wo, delta_p, de, crystal)
        term = _phase_sinc(dk, crystal.length, shape)
        if mode == "paired":
            acc += term * w
        else:
            d_o = solve_transverse(delta_p, de, we, wo, crystal)
            g_o = np.where(np.isnan(d_o), 0.0, collection_weight(coll, np.nan_to_num(d_o)))
            acc += term * w * g_o
    return alpha * acc


def jsa_integrated(
    grid: FrequencyGrid,
    crystal: CrystalSpec,
    pump: PumpSpec,
    coll: CollectionSpec,
    span_widths: float = 2.5,
    mode: Literal["paired", "full"] = "paired",
    shape: str = "sinc",
    n_jobs: int = 1,
    reverse: bool = False,
) -> JointAmplitude:
    """Angle-integrated, normalized JSA.

    ``mode="paired"`` weights each e-ray angle by g_F(delta_e)^2 (the o-ray
    assumed to follow its twin into the fibre). ``mode="full"`` weights by
    g_F(delta_e) g_F(delta_o) with delta_o from transverse phasematching.

    Rectangle-rule sums over ``coll.n_angles`` pump and e-ray angles
    spanning +/- ``span_widths`` amplitude widths. Pump-angle terms may be
    evaluated on ``n_jobs`` threads; they are always reduced in index order
    (reversed if ``reverse``), so the result does not depend on ``n_jobs``.
    """
    if mode not in ("paired", "full"):
        raise ValueError(f"mode must be 'paired' or 'full', got {mode!r}")
    n = coll.n_angles
    d_p = quadrature_angles(pump.sigma_L, n, span_widths)
    d_e = quadrature_angles(coll.sigma_F, n, span_widths)
    if mode == "paired":
        weights = collection_weight(coll, d_e) ** 2
    else:
        weights = collection_weight(coll, d_e)
    if reverse:
        d_p, d_e, weights = d_p[::-1], d_e[::-1], weights[::-1]

    def work(dp):
        return _pump_angle_term(grid, crystal, pump, coll, dp, d_e, weights, mode, shape)

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            terms = list(pool.map(work, d_p))
    else:
        terms = [work(dp) for dp in d_p]
    total = np.zeros(grid.shape, dtype=complex)
    for t in terms:
        total += t
    # |alpha| <= 1 and |phi| <= 1, so this bounds |total| from above
    bound = len(d_p) * float(np.sum(weights))
    if not np.abs(total).max() > NEGLIGIBLE * bound:
        raise ValueError("joint amplitude is negligible on the whole grid; check grid centre, pump and crystal angle")
    out = JointAmplitude(grid, total).normalize()
    out.meta.update(mode=mode, shape=shape, n_angles=n, span_widths=span_widths)
    return out


@dataclass(frozen=True)
class Marginals:
    m_e: np.ndarray
    m_o: np.ndarray
    fwhm_e_nm: float
    fwhm_o_nm: float


def marginal_widths(intensity, axis_e, axis_o, axis_kind="omega"):
    """Marginal distributions and their FWHM in nm.

    ``axis_kind="omega"`` expects rad/s axes and converts each width at the
    marginal's centroid; ``"nm"`` expects wavelength axes already in nm.
    """
    intensity = np.asarray(intensity, dtype=float)
    m_e = intensity.sum(axis=1)
    m_o = intensity.sum(axis=0)
    widths = []
    for axis, m in ((np.asarray(axis_e, float), m_e), (np.asarray(axis_o, float), m_o)):
        order = np.argsort(axis)
        w = fwhm(axis[order], m[order])
        if axis_kind == "omega":
            w_c = centroid(axis, m)
            w = 2 * np.pi * c * w / w_c**2 * 1e9
        elif axis_kind != "nm":
            raise ValueError(f"unknown axis kind {axis_kind!r}")
        widths.append(w)
    return m_e, m_o, widths[0], widths[1]


def marginals(F: JointAmplitude) -> Marginals:
    """Frequency marginals of a JSA and their FWHMs converted to nm."""
    if not F.normalized:
        F = F.normalize()
    m_e, m_o, we, wo = marginal_widths(F.intensity, F.grid.omega_e, F.grid.omega_o)
    return Marginals(m_e, m_o, we, wo)


@dataclass(frozen=True)
class Ridge:
    """e-ray centre per o-ray slice; NaN where the slice was skipped."""

    o_axis: np.ndarray
    e_center: np.ndarray

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.e_center)

    def span(self, o_lo, o_hi) -> float:
        """Peak-to-peak ridge variation for o-ray coordinates in [o_lo, o_hi]."""
        sel = (self.o_axis >= o_lo) & (self.o_axis <= o_hi) & self.present
        vals = self.e_center[sel]
        return float(vals.max() - vals.min())


def _parabolic_peak(x, y):
    i = int(np.argmax(y))
    if i == 0 or i == len(y) - 1 or np.any(y[i - 1 : i + 2] <= 0):
        return float(x[i])
    xs = x[i - 1 : i + 2]
    ly = np.log(y[i - 1 : i + 2])
    a, b, _ = np.polyfit(xs - xs[1], ly, 2)
    if a >= 0:
        return float(x[i])
    return float(xs[1] - b / (2 * a))


def _gaussian_peak(x, y):
    # four parameters need at least five samples; fall back on the parabola
    if len(x) < 5:
        return _parabolic_peak(x, y)
    w_tot = y.sum()
    mu = np.sum(x * y) / w_tot
    sd = math.sqrt(max(np.sum((x - mu) ** 2 * y) / w_tot, (x[1] - x[0]) ** 2))
    p0 = [y.max() - y.min(), mu, sd, y.min()]
    scale = max(abs(y.max()), 1e-300)

    def resid(p):
        a, m, s, b = p
        return (a * np.exp(-0.5 * ((x - m) / s) ** 2) + b - y) / scale

    # Levenberg-Marquardt, i.e. damped Gauss-Newton
    fit = least_squares(resid, p0, method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14)
    return float(fit.x[1])


def ridge(data, mode: Literal["argmax", "gaussian_fit"] = "argmax", e_axis=None, o_axis=None) -> Ridge:
    """Trace the e-ray centre for every o-ray slice.

    ``data`` is a :class:`JointAmplitude` (axes become wavelengths in nm)
    or a non-negative intensity matrix with explicit ``e_axis``/``o_axis``.
    Slices whose total weight is below 1e-6 of the largest are skipped.
    """
    if isinstance(data, JointAmplitude):
        intensity = data.intensity
        e_axis, o_axis = data.grid.wavelengths_nm()
    else:
        intensity = np.asarray(data, dtype=float)
        if e_axis is None or o_axis is None:
            raise ValueError("axes are required for a bare intensity matrix")
    e_axis = np.asarray(e_axis, dtype=float)
    o_axis = np.asarray(o_axis, dtype=float)
    if intensity.shape != (len(e_axis), len(o_axis)):
        raise ValueError("intensity shape does not match axes")
    if np.any(intensity < 0):
        raise ValueError("intensity must be non-negative")
    order = np.argsort(e_axis)
    x = e_axis[order]
    slice_weight = intensity.sum(axis=0)
    cutoff = 1e-6 * slice_weight.max()
    finder = {"argmax": _parabolic_peak, "gaussian_fit": _gaussian_peak}.get(mode)
    if finder is None:
        raise ValueError(f"unknown ridge mode {mode!r}")
    centers = np.full(len(o_axis), np.nan)
    for j in range(len(o_axis)):
        if slice_weight[j] <= cutoff or slice_weight[j] == 0:
            continue
        centers[j] = finder(x, intensity[order, j])
    o_order = np.argsort(o_axis)
    return Ridge(o_axis[o_order], centers[o_order])
