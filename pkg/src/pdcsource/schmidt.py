"""Schmidt analysis of a discretized two-photon amplitude via the SVD."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .jsa import JointAmplitude

__all__ = [
    "SchmidtResult",
    "decompose",
    "k_no_phase",
    "purity",
    "schmidt_number",
    "SchmidtDecomposition",
    "check_amplitude",
]


def check_amplitude(F, normalize=True) -> np.ndarray:
    """Validate a JSA (JointAmplitude or 2-D array) and return a complex matrix.

    Unnormalized input is rescaled to unit norm with a warning when
    ``normalize`` is set.
    """
    if isinstance(F, JointAmplitude):
        values = F.values
        already = F.normalized
    else:
        values = np.asarray(F)
        already = False
    if values.ndim != 2 or min(values.shape) < 1:
        raise ValueError(f"expected a 2-D amplitude matrix, got shape {values.shape}")
    values = values.astype(complex, copy=False)
    if not np.all(np.isfinite(values)):
        raise ValueError("amplitude contains non-finite entries")
    norm2 = float(np.sum(np.abs(values) ** 2))
    if norm2 == 0:
        raise ValueError("amplitude is identically zero")
    if normalize and abs(norm2 - 1) > 1e-12:
        if not already:
            warnings.warn("amplitude was not normalized; rescaling to unit norm", stacklevel=3)
        values = values / np.sqrt(norm2)
    return values


@dataclass(frozen=True)
class SchmidtResult:
    """Singular values d_j, magnitudes lambda_j = d_j^2, K and purity.

    Columns of ``U`` are e-ray Schmidt modes; rows of ``Vh`` are o-ray modes.
    """

    singular_values: np.ndarray
    lambdas: np.ndarray
    K: float
    purity: float
    U: np.ndarray
    Vh: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.Vh

    def report(self, n_modes=10) -> str:
        lines = [f"K = {self.K:.6f}", f"P = {self.purity:.6f}", "lambda_j:"]
        for j, lam in enumerate(self.lambdas[:n_modes]):
            lines.append(f"  {j:3d}  {lam:.10f}")
        return "\n".join(lines)


def decompose(F) -> SchmidtResult:
    """Full SVD of the amplitude matrix, F = U D V^dagger."""
    values = check_amplitude(F)
    U, d, Vh = np.linalg.svd(values, full_matrices=False)
    lam = d**2
    p = float(np.sum(lam**2))
    return SchmidtResult(singular_values=d, lambdas=lam, K=1.0 / p, purity=p, U=U, Vh=Vh)


def k_no_phase(intensity) -> SchmidtResult:
    """Schmidt analysis of sqrt(I), i.e. assuming a flat spectral phase."""
    intensity = np.asarray(intensity, dtype=float)
    if intensity.ndim != 2:
        raise ValueError("intensity must be a 2-D grid")
    if np.any(intensity < 0) or not np.all(np.isfinite(intensity)):
        raise ValueError("intensity must be finite and non-negative")
    total = intensity.sum()
    if total == 0:
        raise ValueError("intensity grid is all zero")
    return decompose(np.sqrt(intensity / total))


def purity(F) -> float:
    """Tr(rho_e^2) with rho_e = F F^dagger, cross-checked against sum(lambda_j^2)."""
    values = check_amplitude(F)
    rho = values @ values.conj().T
    trace_route = float(np.real(np.sum(rho * rho.T)))
    svd_route = decompose(values).purity
    if abs(trace_route - svd_route) > 1e-8:
        raise ArithmeticError(f"purity routes disagree: trace {trace_route!r} vs svd {svd_route!r}")
    return trace_route


def schmidt_number(F) -> float:
    return decompose(F).K


class SchmidtDecomposition(BaseEstimator):
    """Estimator wrapper around :func:`decompose`.

    Parameters
    ----------
    phase : {"keep", "discard"}
        ``"discard"`` analyzes sqrt(|F|^2), the flat-phase variant used for
        measured intensities.
    n_modes : int or None
        Number of Schmidt modes retained in ``e_modes_``/``o_modes_``.
    """

    def __init__(self, phase="keep", n_modes=None):
        self.phase = phase
        self.n_modes = n_modes

    def fit(self, X, y=None):
        if self.phase == "keep":
            res = decompose(X)
        elif self.phase == "discard":
            values = X.values if isinstance(X, JointAmplitude) else np.asarray(X)
            if np.iscomplexobj(values):
                values = np.abs(values) ** 2
            res = k_no_phase(values)
        else:
            raise ValueError(f"phase must be 'keep' or 'discard', got {self.phase!r}")
        n = self.n_modes or len(res.singular_values)
        self.result_ = res
        self.singular_values_ = res.singular_values
        self.schmidt_magnitudes_ = res.lambdas
        self.schmidt_number_ = res.K
        self.purity_ = res.purity
        self.e_modes_ = res.U[:, :n]
        self.o_modes_ = res.Vh[:n, :]
        return self

    def transform(self, X):
        """Schmidt-basis coefficients U^dagger F V of another amplitude."""
        values = check_amplitude(X, normalize=False)
        return self.e_modes_.conj().T @ values @ self.o_modes_.conj().T
