"""Joint temporal amplitude by a centred 2-D Fourier transform.

Convention: f(t_e, t_o) = (1 / 2 pi) \\iint F(w_e, w_o) exp(-i (w_e t_e + w_o t_o)),
with frequencies taken relative to the (padded) grid centre so the optical
carrier drops out. With this normalization
sum |f|^2 dt_e dt_o = sum |F|^2 dw_e dw_o.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numeric import fwhm
from .jsa import JointAmplitude

__all__ = ["CORE_THRESHOLD", "JointTemporal", "to_temporal", "from_temporal", "temporal_marginal_duration", "temporal_correlation"]

PAD_FACTOR = 4


@dataclass
class JointTemporal:
    """Sampled joint temporal amplitude; rows index t_e, columns t_o (seconds)."""

    t_e: np.ndarray
    t_o: np.ndarray
    values: np.ndarray
    d_omega_e: float
    d_omega_o: float
    source_shape: tuple
    pad: int

    @property
    def intensity(self):
        return np.abs(self.values) ** 2


def _centred_fft(x, axis, inverse=False):
    fn = np.fft.ifft if inverse else np.fft.fft
    return np.fft.fftshift(fn(np.fft.ifftshift(x, axes=axis), axis=axis), axes=axis)


def _padded_shape(n, pad):
    return n * pad


def to_temporal(F: JointAmplitude, pad: int = PAD_FACTOR) -> JointTemporal:
    """Fourier transform a JSA onto conjugate time axes, zero-padding by ``pad``."""
    if pad < 1:
        raise ValueError("pad must be >= 1")
    grid = F.grid
    n_e, n_o = grid.shape
    m_e, m_o = _padded_shape(n_e, pad), _padded_shape(n_o, pad)
    buf = np.zeros((m_e, m_o), dtype=complex)
    oe, oo = (m_e - n_e) // 2, (m_o - n_o) // 2
    buf[oe : oe + n_e, oo : oo + n_o] = F.values
    dwe, dwo = grid.d_omega_e, grid.d_omega_o
    out = _centred_fft(_centred_fft(buf, 0), 1) * (dwe * dwo / (2 * np.pi))
    t_e = (np.arange(m_e) - m_e // 2) * (2 * np.pi / (m_e * dwe))
    t_o = (np.arange(m_o) - m_o // 2) * (2 * np.pi / (m_o * dwo))
    return JointTemporal(t_e, t_o, out, dwe, dwo, (n_e, n_o), pad)


def from_temporal(f: JointTemporal) -> np.ndarray:
    """Inverse of :func:`to_temporal`; returns the unpadded spectral matrix."""
    m_e, m_o = f.values.shape
    back = _centred_fft(_centred_fft(f.values, 0, inverse=True), 1, inverse=True)
    back *= (2 * np.pi) / (f.d_omega_e * f.d_omega_o)
    n_e, n_o = f.source_shape
    oe, oo = (m_e - n_e) // 2, (m_o - n_o) // 2
    return back[oe : oe + n_e, oo : oo + n_o]


def temporal_marginal_duration(f: JointTemporal) -> tuple[float, float]:
    """Intensity FWHM (s) of the e-ray and o-ray temporal marginals."""
    inten = f.intensity
    return fwhm(f.t_e, inten.sum(axis=1)), fwhm(f.t_o, inten.sum(axis=0))


#: default intensity cut for :func:`temporal_correlation`, as a fraction of the peak
CORE_THRESHOLD = 0.5


def temporal_correlation(f: JointTemporal, threshold: float = CORE_THRESHOLD) -> float:
    """Pearson correlation of (t_e, t_o) under the joint temporal intensity.

    Only samples with intensity >= ``threshold`` times the peak contribute.
    The default keeps the half-maximum core: second moments over the whole
    window are dominated by the sinc side lobes and change with the
    spectral grid span. ``threshold=0`` gives the full-window value.
    """
    if not 0 <= threshold < 1:
        raise ValueError("threshold must lie in [0, 1)")
    inten = f.intensity
    w = np.where(inten >= threshold * inten.max(), inten, 0.0)
    w = w / w.sum()
    te, to = np.meshgrid(f.t_e, f.t_o, indexing="ij")
    me, mo = np.sum(w * te), np.sum(w * to)
    cov = np.sum(w * (te - me) * (to - mo))
    var_e = np.sum(w * (te - me) ** 2)
    var_o = np.sum(w * (to - mo) ** 2)
    return float(cov / np.sqrt(var_e * var_o))
