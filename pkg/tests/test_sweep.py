import math

import numpy as np
import pytest

from pdcsource import PDCSource
from pdcsource.jsa import CollectionSpec, jsa_integrated
from pdcsource.schmidt import purity
from pdcsource.sweep import SweepAxis, SweepSpec, run_sweep

FAST = dict(grid_n=32, n_angles=3)


def test_axis_grid_and_validation():
    assert np.allclose(SweepAxis("crystal_length", 1, 5, 5).grid(), [1, 2, 3, 4, 5])
    assert SweepAxis("chirp_sign", values=[-1, 1]).grid().tolist() == [-1.0, 1.0]
    assert SweepAxis("crystal_length", 5, 5, 1).grid().tolist() == [5.0]
    with pytest.raises(ValueError, match="unknown sweep parameter"):
        SweepAxis("temperature", 0, 1, 2)
    with pytest.raises(ValueError, match="steps"):
        SweepAxis("crystal_length", 1, 5, 1)
    with pytest.raises(ValueError, match="5"):
        SweepAxis("pump_angle_fwhm", 0.1, 6, 3)
    with pytest.raises(ValueError):
        SweepAxis("crystal_length", -1, 5, 3)
    with pytest.raises(ValueError):
        SweepAxis("chirp_sign", values=[0, 1])
    with pytest.raises(ValueError):
        SweepSpec(SweepAxis("crystal_length", 1, 2, 2), SweepAxis("crystal_length", 1, 2, 2))


def test_one_by_one_sweep_is_bit_exact():
    base = PDCSource(**FAST)
    spec = SweepSpec(
        SweepAxis("pump_angle_fwhm", 0.16, 0.16, 1), SweepAxis("collection_fwhm", 0.3, 0.3, 1), base, fidelity="base"
    )
    res = run_sweep(spec)
    direct = base.set_params(theta_pm_deg=math.degrees(base.theta_pm()))
    F = jsa_integrated(
        direct.frequency_grid(), direct.crystal_spec(), direct.pump_spec(), CollectionSpec.from_lab(0.3, 3)
    )
    assert res.purity[0, 0] == purity(F)


def test_determinism_across_threads():
    spec = SweepSpec(
        SweepAxis("chirp_nm_per_fwhm", 0, 10, 3), SweepAxis("chirp_sign", values=[-1, 1]), PDCSource(**FAST), "base"
    )
    a = run_sweep(spec, n_jobs=1)
    b = run_sweep(spec, n_jobs=4)
    assert np.array_equal(a.purity, b.purity) and np.array_equal(a.K, b.K)
    assert a.purity.shape == (3, 2)
    assert np.allclose(a.purity * a.K, 1.0)


def test_failed_cells_become_nan():
    # pump wavelengths far outside the grid leave an all-zero amplitude
    spec = SweepSpec(
        SweepAxis("pump_wavelength", values=[415.0, 330.0]), SweepAxis("crystal_length", 5, 5, 1),
        PDCSource(grid_center_nm=830.0, **FAST), "base",
    )
    res = run_sweep(spec)
    assert np.isfinite(res.purity[0, 0])
    assert np.isnan(res.purity[1, 0]) and (1, 0) in res.errors


def test_fidelity_presets_recorded():
    spec = SweepSpec(SweepAxis("crystal_length", 4, 5, 2), SweepAxis("chirp_sign", values=[1]), PDCSource())
    res = run_sweep(spec, n_jobs=2)
    assert res.meta["fidelity"] == "reduced" and res.meta["grid_n"] == 64 and res.meta["n_angles"] == 9


def test_theta_auto_is_fixed_by_base_pump():
    spec = SweepSpec(
        SweepAxis("pump_wavelength", values=[413.0, 417.0]), SweepAxis("chirp_sign", values=[1]), PDCSource(**FAST), "base"
    )
    res = run_sweep(spec)
    assert res.meta["base_params"]["theta_pm_deg"] == pytest.approx(67.764, abs=1e-3)


@pytest.mark.slow
def test_focusing_trend_matches_panels():
    """Tighter pump focusing broadens the state: purity falls down the focus axis."""
    spec = SweepSpec(
        SweepAxis("pump_angle_fwhm", values=[0.02, 0.08, 0.16, 0.27]),
        SweepAxis("collection_fwhm", values=[0.15, 0.3, 0.45]),
        PDCSource(chirp_sign=-1),
    )
    neg = run_sweep(spec, n_jobs=4)
    pos = run_sweep(SweepSpec(spec.rows, spec.cols, PDCSource(chirp_sign=1)), n_jobs=4)
    for res in (neg, pos):
        col = res.purity[:, 1]
        assert np.all(np.diff(col) <= 0)
    # negative chirp is worse than positive at the default focus
    assert neg.purity[2, 1] < pos.purity[2, 1]


@pytest.mark.slow
def test_chirp_optimum_near_observed_value():
    """At 415 nm the purity-maximizing chirp lies within 2 nm/FWHM of +7.5."""
    spec = SweepSpec(
        SweepAxis("pump_wavelength", values=[410.0, 415.0, 420.0]),
        SweepAxis("chirp_nm_per_fwhm", -15, 15, 31),
        PDCSource(chirp_sign=1),
    )
    res = run_sweep(spec, n_jobs=4)
    best = res.col_values[np.nanargmax(res.purity[1])]
    assert abs(best - 7.5) <= 2.0
