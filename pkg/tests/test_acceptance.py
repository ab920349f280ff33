"""Acceptance suite: one PASS/FAIL line per criterion.

Lines are collected in ``RESULTS`` and printed in the pytest terminal
summary (see conftest.py); running this file directly prints them too.
Tolerances are the contract values; nothing here is loosened to pass.
"""
import io
import math
import time

import numpy as np
import pytest

from pdcsource import PDCSource
from pdcsource.cli import main as cli_main
from pdcsource.dispersion import KDP, RayKind, group_velocity, solve_collinear_pm_angle, wavelength_to_omega
from pdcsource.interference import ReducedState, dip_curve, operational_distance, reduce, visibility
from pdcsource.jsa import marginals, ridge
from pdcsource.schmidt import decompose, k_no_phase
from pdcsource.temporal import from_temporal, to_temporal

RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def within(x, target, tol_abs=None, tol_rel=None):
    tol = tol_abs if tol_abs is not None else abs(target) * tol_rel
    return abs(x - target) <= tol


@pytest.fixture(scope="module")
def design():
    out = {}
    for sign in (1, -1):
        t0 = time.perf_counter()
        src = PDCSource(chirp_sign=sign).fit()
        out[sign] = (src, time.perf_counter() - t0)
    return out


def test_criterion_01_group_velocities():
    t0 = time.perf_counter()
    w = float(wavelength_to_omega(830e-9))
    v_o = float(group_velocity(KDP, RayKind.ORDINARY, w, check=True))
    v_e = float(group_velocity(KDP, RayKind.EXTRAORDINARY, w, math.radians(67.8), check=True))
    dt = time.perf_counter() - t0
    ok = within(v_o, 1.97e8, tol_rel=0.01) and within(v_e, 2.02e8, tol_rel=0.01) and dt < 1
    assert record(1, ok, f"v_g(o)={v_o:.4e} m/s [1.97e8 +/-1%], v_g(e)={v_e:.4e} m/s [2.02e8 +/-1%], {dt:.3f} s")


def test_criterion_02_phasematching_angle():
    t0 = time.perf_counter()
    th = math.degrees(solve_collinear_pm_angle(KDP, 415e-9, 830e-9, 830e-9))
    dt = time.perf_counter() - t0
    ok = within(th, 67.8, tol_abs=0.5) and dt < 1
    assert record(2, ok, f"theta_pm={th:.3f} deg [67.8 +/-0.5], {dt:.3f} s")


def test_criterion_03_collinear_factorability():
    t0 = time.perf_counter()
    K = PDCSource(mode="planewave", chirp_nm_per_fwhm=0.0).fit().schmidt_number_
    dt = time.perf_counter() - t0
    # diagnostic only: the Gaussian approximation to the sinc
    K_gauss = PDCSource(mode="planewave", chirp_nm_per_fwhm=0.0, shape="gaussian").fit().schmidt_number_
    ok = within(K, 1.01, tol_abs=0.03) and dt < 10
    assert record(3, ok, f"K={K:.4f} [1.01 +/-0.03], {dt:.2f} s (Gaussian-phasematching diagnostic K={K_gauss:.4f})")


def test_criterion_04_integrated_model(design):
    (pos, t_pos), (neg, t_neg) = design[1], design[-1]
    checks = [
        within(pos.schmidt_number_, 1.05, tol_abs=0.05),
        within(neg.schmidt_number_, 1.19, tol_abs=0.06),
        within(pos.purity_, 0.953, tol_abs=0.02),
        within(neg.purity_, 0.839, tol_abs=0.03),
        max(t_pos, t_neg) < 300,
    ]
    assert record(
        4,
        all(checks),
        f"K+={pos.schmidt_number_:.4f} [1.05 +/-0.05], K-={neg.schmidt_number_:.4f} [1.19 +/-0.06], "
        f"P+={pos.purity_:.4f} [0.953 +/-0.02], P-={neg.purity_:.4f} [0.839 +/-0.03], "
        f"{t_pos:.2f}/{t_neg:.2f} s",
    )


def test_criterion_05_no_phase(design):
    kp = k_no_phase(design[1][0].jsa_.intensity).K
    kn = k_no_phase(design[-1][0].jsa_.intensity).K
    ok = within(kp, 1.03, tol_abs=0.03) and within(kn, 1.17, tol_abs=0.05)
    assert record(5, ok, f"K+(no phase)={kp:.4f} [1.03 +/-0.03], K-(no phase)={kn:.4f} [1.17 +/-0.05]")


def test_criterion_06_marginal_bandwidths(design):
    mp, mn = marginals(design[1][0].jsa_), marginals(design[-1][0].jsa_)
    ok = (
        within(mp.fwhm_e_nm, 5.4, tol_rel=0.15)
        and within(mn.fwhm_e_nm, 5.4, tol_rel=0.15)
        and within(mp.fwhm_o_nm, 21.0, tol_rel=0.15)
        and within(mn.fwhm_o_nm, 25.0, tol_rel=0.15)
    )
    assert record(
        6,
        ok,
        f"e: {mp.fwhm_e_nm:.2f}/{mn.fwhm_e_nm:.2f} nm [5.4 +/-15%], "
        f"o: {mp.fwhm_o_nm:.2f} nm [21.0 +/-15%] / {mn.fwhm_o_nm:.2f} nm [25.0 +/-15%]",
    )


def test_criterion_07_ridge(design):
    lo, hi = 815.0, 845.0  # central 30 nm of the 810-850 nm o-ray span
    rp = ridge(design[1][0].jsa_, "gaussian_fit")
    rp_arg = ridge(design[1][0].jsa_, "argmax")
    span = rp.span(lo, hi)
    rn = ridge(design[-1][0].jsa_, "gaussian_fit")
    sel = (rn.o_axis >= lo) & (rn.o_axis <= hi) & rn.present
    slope = np.polyfit(rn.o_axis[sel], rn.e_center[sel], 1)[0]
    monotone = bool(np.all(np.diff(rn.e_center[sel]) < 0))
    ok = span <= 1.0 and monotone and slope < 0
    assert record(
        7,
        ok,
        f"positive-chirp ridge span {span:.3f} nm [<= 1] (argmax {rp_arg.span(lo, hi):.3f} nm); "
        f"negative-chirp ridge monotone={monotone}, slope {slope:+.3f}",
    )


def test_criterion_08_hom(design):
    F = design[1][0].jsa_
    re_, ro = reduce(F, RayKind.EXTRAORDINARY), reduce(F, RayKind.ORDINARY)
    V = visibility(re_, re_)
    de = dip_curve(re_, re_, np.linspace(-1500e-15, 1500e-15, 301))
    do = dip_curve(ro, ro, np.linspace(-500e-15, 500e-15, 301))
    fe, fo = de.fit.fwhm * 1e15, do.fit.fwhm * 1e15
    parts = [V > 0.95 - 0.02, within(fe, 440, tol_rel=0.25), within(fo, 92, tol_rel=0.25)]
    assert record(
        8,
        all(parts),
        f"V={V:.4f} [> 0.93] {'ok' if parts[0] else 'FAIL'}; e-ray dip FWHM {fe:.1f} fs [440 +/-25%] "
        f"{'ok' if parts[1] else 'FAIL'}; o-ray dip FWHM {fo:.1f} fs [92 +/-25%] {'ok' if parts[2] else 'FAIL'}",
    )


def test_criterion_09_oracle_equivalence():
    rng = np.random.default_rng(2024)

    def oracle(F):
        F = F / np.linalg.norm(F)
        lam = np.clip(np.linalg.eigvalsh(F @ F.conj().T), 0, None)
        return 1 / np.sum(lam**2)

    mats = [rng.normal(size=(30, 30)) + 1j * rng.normal(size=(30, 30)) for _ in range(10)]
    x = np.linspace(-4, 4, 50)
    X, Y = np.meshgrid(x, x, indexing="ij")
    mats += [np.outer(np.exp(-(x**2)), np.exp(-(x**2) / 3)), np.eye(50), np.exp(-(X**2 - 1.6 * X * Y + Y**2) / 2)]
    errs = [abs(decompose(m / np.linalg.norm(m)).K - oracle(m)) for m in mats]
    worst = max(errs)
    assert record(9, worst < 1e-4, f"max |K_svd - K_eig| = {worst:.2e} over {len(mats)} matrices [< 1e-4]")


def test_criterion_10_identities(design):
    rng = np.random.default_rng(99)
    src = design[-1][0]
    kp = abs(src.schmidt_number_ * src.purity_ - 1)
    worst_v = 0.0
    for _ in range(20):
        rhos = []
        for _ in range(2):
            A = rng.normal(size=(16, int(rng.integers(1, 17)))) + 1j * rng.normal(size=(16, 1))
            r = A @ A.conj().T
            rhos.append(ReducedState(r / np.trace(r).real, np.arange(16.0)))
        r1, r2 = rhos
        lhs = (r1.purity + r2.purity - operational_distance(r1, r2)) / 2
        worst_v = max(worst_v, abs(lhs - visibility(r1, r2)))
    F = src.jsa_
    f = to_temporal(F)
    parse = abs(
        np.sum(np.abs(f.values) ** 2) * (f.t_e[1] - f.t_e[0]) * (f.t_o[1] - f.t_o[0])
        / (np.sum(F.intensity) * F.grid.d_omega_e * F.grid.d_omega_o)
        - 1
    )
    back = np.max(np.abs(from_temporal(f) - F.values))
    ok = kp < 1e-12 and worst_v < 1e-10 and parse < 1e-9 and back < 1e-10
    assert record(
        10,
        ok,
        f"|KP-1|={kp:.1e}, max|V identity|={worst_v:.1e} [1e-10], Parseval rel {parse:.1e} [1e-9], "
        f"double transform {back:.1e} [1e-10]",
    )


def test_criterion_11_determinism(tmp_path):
    digests = {}
    for n in (1, 4, 8):
        prefix = str(tmp_path / f"t{n}")
        assert cli_main(["jsa", "--threads", str(n), "-o", prefix], out=io.StringIO()) == 0
        digests[n] = (tmp_path / f"t{n}.grid").read_bytes()
    same = digests[1] == digests[4] == digests[8]
    assert record(11, same, f"grid files for 1/4/8 threads byte-identical: {same}")


if __name__ == "__main__":  # pragma: no cover
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
