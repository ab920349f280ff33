"""Two-source Hong-Ou-Mandel predictions from heralded reduced states."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .dispersion import RayKind
from .jsa import JointAmplitude
from .schmidt import check_amplitude

__all__ = [
    "ReducedState",
    "reduce",
    "visibility",
    "DipFit",
    "DipCurve",
    "dip_curve",
    "operational_distance",
    "operational_distance_pure",
    "purity_bound",
    "HeraldingEfficiency",
    "heralding_efficiency",
]


@dataclass
class ReducedState:
    """Trace-one density matrix of one photon over a frequency axis (rad/s)."""

    rho: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        self.omega = np.asarray(self.omega, dtype=float)
        n = len(self.omega)
        if self.rho.shape != (n, n):
            raise ValueError(f"rho shape {self.rho.shape} does not match axis length {n}")
        if np.linalg.norm(self.rho - self.rho.conj().T) > 1e-12 * max(1.0, np.linalg.norm(self.rho)):
            raise ValueError("rho is not Hermitian")
        tr = np.trace(self.rho).real
        if abs(tr - 1) > 1e-10:
            raise ValueError(f"rho has trace {tr!r}, expected 1")
        if np.linalg.eigvalsh(self.rho).min() < -1e-10:
            raise ValueError("rho is not positive semidefinite")

    @property
    def purity(self) -> float:
        return float(np.real(np.sum(self.rho * self.rho.T)))


def reduce(F, which: RayKind, omega=None) -> ReducedState:
    """Partial trace of |F><F|.

    rho_e = F F^dagger (indices omega_e, omega_e'), rho_o = (F^dagger F)^T
    (indices omega_o, omega_o').
    """
    if isinstance(F, JointAmplitude):
        axis = F.grid.omega_e if which is RayKind.EXTRAORDINARY else F.grid.omega_o
    else:
        if omega is None:
            raise ValueError("frequency axis required for a bare matrix")
        axis = omega
    values = check_amplitude(F)
    if which is RayKind.EXTRAORDINARY:
        rho = values @ values.conj().T
    else:
        rho = (values.conj().T @ values).T
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return ReducedState(rho, axis)


def _same_axis(r1: ReducedState, r2: ReducedState):
    if r1.omega.shape != r2.omega.shape or not np.allclose(r1.omega, r2.omega, rtol=1e-12, atol=0):
        raise ValueError("reduced states live on different frequency axes")


def visibility(r1: ReducedState, r2: ReducedState) -> float:
    """V = Tr(rho1 rho2)."""
    _same_axis(r1, r2)
    return float(np.real(np.sum(r1.rho * r2.rho.T)))


@dataclass(frozen=True)
class DipFit:
    baseline: float
    visibility: float
    fwhm: float
    center: float


@dataclass(frozen=True)
class DipCurve:
    """``visibility`` is the exact Tr(rho1 rho2); ``fit.visibility`` comes from
    the Gaussian model and undershoots it for cusp-shaped dips."""

    delays: np.ndarray
    coincidence: np.ndarray
    fit: DipFit | None
    visibility: float = math.nan


def _gauss_dip(tau, baseline, vis, width, center):
    return baseline * (1 - vis * np.exp(-4 * math.log(2) * ((tau - center) / width) ** 2))


def dip_curve(r1: ReducedState, r2: ReducedState, delays, fit=True) -> DipCurve:
    """Coincidence probability versus relative delay.

    C(tau) = (1 - Tr(rho1 D rho2 D^dagger)) / 2 with D = diag(exp(i omega tau)).
    A four-parameter Gaussian dip (baseline, visibility, FWHM, centre) is
    fitted when ``fit`` is set.
    """
    _same_axis(r1, r2)
    delays = np.asarray(delays, dtype=float)
    w = r1.omega - r1.omega.mean()
    dw = w[:, None] - w[None, :]
    # Tr(rho1 D rho2 D^+) = sum_{m,n} rho1[n,m] rho2[m,n] exp(i (w_m - w_n) tau)
    prod = r1.rho.T * r2.rho
    overlap = np.array([np.real(np.sum(prod * np.exp(1j * dw * tau))) for tau in delays])
    coinc = 0.5 * (1 - overlap)
    result = None
    if fit and len(delays) >= 4:
        # fit in units of the delay span; raw seconds are badly scaled
        scale = float(np.ptp(delays)) or 1.0
        x = delays / scale
        depth = 0.5 - coinc.min()
        centre0 = x[np.argmin(coinc)]
        below = x[coinc < 0.5 - depth / 2]
        width0 = (below.max() - below.min()) if len(below) > 1 else 0.25
        p0 = [0.5, max(2 * depth, 1e-3), max(width0, 1e-3), centre0]
        with warnings.catch_warnings():
            # the parameter covariance is not used
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(_gauss_dip, x, coinc, p0=p0, maxfev=20000)
        result = DipFit(float(popt[0]), float(popt[1]), float(abs(popt[2])) * scale, float(popt[3]) * scale)
    return DipCurve(delays, coinc, result, float(np.real(np.sum(prod))))


def operational_distance(r1: ReducedState, r2: ReducedState) -> float:
    """Squared Frobenius norm of rho1 - rho2."""
    _same_axis(r1, r2)
    diff = r1.rho - r2.rho
    return float(np.real(np.sum(diff.conj() * diff)))


def operational_distance_pure(r1: ReducedState, r2: ReducedState) -> float:
    """2 - 2 Tr(rho1 rho2), the value taken when both states are pure."""
    return 2.0 - 2.0 * visibility(r1, r2)


def purity_bound(V: float) -> float:
    """Lower bound on the mean purity (P1 + P2) / 2 implied by visibility V."""
    if not 0 <= V <= 1:
        raise ValueError("visibility must lie in [0, 1]")
    return float(V)


@dataclass(frozen=True)
class HeraldingEfficiency:
    eta_D: float
    eta_H: float
    eta_corrected: float


def heralding_efficiency(R_C, R_T, eta_q, fbs_correction=False) -> HeraldingEfficiency:
    """Detection and heralding efficiencies from coincidence and trigger rates.

    eta_H = eta_q * eta_D is the product as defined; eta_corrected =
    eta_D / eta_q removes the signal-detector loss instead. eta_D is doubled
    when ``fbs_correction`` accounts for a 50:50 fibre splitter.
    """
    if not R_T > 0:
        raise ValueError("trigger rate must be positive")
    if not 0 < eta_q <= 1:
        raise ValueError("detector quantum efficiency must lie in (0, 1]")
    if R_C < 0:
        raise ValueError("coincidence rate must be non-negative")
    if R_C > R_T:
        raise ValueError(f"coincidence rate {R_C} exceeds trigger rate {R_T}")
    eta_D = R_C / R_T
    if fbs_correction:
        eta_D *= 2
    return HeraldingEfficiency(eta_D=eta_D, eta_H=eta_q * eta_D, eta_corrected=eta_D / eta_q)
