"""Design tools for group-velocity-matched parametric downconversion sources.

The usual entry point is :class:`PDCSource`, which turns laboratory
parameters into a joint spectral amplitude and its Schmidt decomposition::

    >>> from pdcsource import PDCSource
    >>> src = PDCSource(chirp_sign=+1).fit()
    >>> round(src.schmidt_number_, 2)
    1.05
"""
from .dispersion import (
    BBO,
    KDP,
    CrystalSpec,
    DispersionRangeError,
    NotPhasematchableError,
    RayKind,
    SellmeierSet,
    factorability_check,
    group_velocity,
    load_sellmeier,
    refractive_index,
    solve_collinear_pm_angle,
)
from .jsa import (
    CollectionSpec,
    FrequencyGrid,
    GridTooNarrowError,
    JointAmplitude,
    PumpSpec,
    jsa_integrated,
    jsa_planewave,
    marginals,
    ridge,
)
from .schmidt import SchmidtDecomposition, SchmidtResult, decompose, k_no_phase, purity, schmidt_number
from .source import PDCSource
from .temporal import JointTemporal, temporal_correlation, temporal_marginal_duration, to_temporal
from .interference import dip_curve, heralding_efficiency, operational_distance, reduce, visibility

from ._version import __version__

__all__ = [
    "__version__",
    "BBO",
    "KDP",
    "CollectionSpec",
    "CrystalSpec",
    "DispersionRangeError",
    "FrequencyGrid",
    "GridTooNarrowError",
    "JointAmplitude",
    "JointTemporal",
    "NotPhasematchableError",
    "PDCSource",
    "PumpSpec",
    "RayKind",
    "SchmidtDecomposition",
    "SchmidtResult",
    "SellmeierSet",
    "decompose",
    "dip_curve",
    "factorability_check",
    "group_velocity",
    "heralding_efficiency",
    "jsa_integrated",
    "jsa_planewave",
    "k_no_phase",
    "load_sellmeier",
    "marginals",
    "operational_distance",
    "purity",
    "reduce",
    "refractive_index",
    "ridge",
    "schmidt_number",
    "solve_collinear_pm_angle",
    "temporal_correlation",
    "temporal_marginal_duration",
    "to_temporal",
    "visibility",
]
