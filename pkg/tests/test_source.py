import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from pdcsource import PDCSource
from pdcsource.dispersion import KDP


def test_defaults_and_params():
    s = PDCSource()
    p = s.get_params()
    assert p["length_mm"] == 5.0 and p["pump_center_nm"] == 415.0 and p["chirp_sign"] == 1
    assert math.degrees(s.theta_pm()) == pytest.approx(67.76, abs=0.01)
    assert clone(s).get_params() == p


def test_fit_and_score(pos_source):
    assert pos_source.score() == pos_source.purity_
    assert pos_source.jsa_.meta["params"]["chirp_sign"] == 1
    with pytest.raises(NotFittedError):
        PDCSource().score()


def test_planewave_mode_and_shape():
    a = PDCSource(mode="planewave", grid_n=48).fit()
    b = PDCSource(mode="planewave", grid_n=48, shape="gaussian").fit()
    assert a.schmidt_number_ != b.schmidt_number_
    with pytest.raises(ValueError):
        PDCSource(mode="focused").fit()


def test_validation():
    with pytest.raises(ValueError):
        PDCSource(length_mm=0).fit()
    with pytest.raises(ValueError):
        PDCSource(pump_fwhm_nm=-1).fit()
    with pytest.raises(ValueError):
        PDCSource(n_angles=4).fit()
    with pytest.raises(ValueError):
        PDCSource(chirp_sign=0).fit()


def test_sellmeier_override_file(tmp_path):
    f = tmp_path / "kdp.toml"
    f.write_text(
        'crystal = "KDP"\nrange_nm = [213.4, 1529]\n'
        f"no_coeffs = {list(KDP.no_coeffs)}\nne_coeffs = {list(KDP.ne_coeffs)}\n"
    )
    a = PDCSource(crystal=str(f), grid_n=40, n_angles=3).fit()
    b = PDCSource(grid_n=40, n_angles=3).fit()
    assert np.array_equal(a.jsa_.values, b.jsa_.values)


def test_convergence_check():
    s = PDCSource(grid_n=40, n_angles=5).fit()
    fine = PDCSource(grid_n=40, n_angles=9).fit()
    assert s.convergence_check() == abs(fine.schmidt_number_ - s.schmidt_number_)
