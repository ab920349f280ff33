import numpy as np
import pytest
from scipy.stats import unitary_group

from pdcsource.dispersion import RayKind
from pdcsource.interference import (
    ReducedState,
    dip_curve,
    heralding_efficiency,
    operational_distance,
    operational_distance_pure,
    purity_bound,
    reduce,
    visibility,
)
from pdcsource.schmidt import purity

from conftest import gaussian_jsa

E, O = RayKind.EXTRAORDINARY, RayKind.ORDINARY


def random_state(rng, n=12, rank=None):
    rank = rank or n
    A = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = A @ A.conj().T
    return ReducedState(rho / np.trace(rho).real, np.arange(n, dtype=float))


def pure_state(vec, axis):
    vec = vec / np.linalg.norm(vec)
    return ReducedState(np.outer(vec, vec.conj()), axis)


def test_reduce_conventions(rng):
    n = 16
    axis = np.linspace(1e15, 1.01e15, n)
    u, v = rng.normal(size=n), rng.normal(size=n) + 1j * rng.normal(size=n)
    F = np.outer(u, v)
    F /= np.linalg.norm(F)
    r = reduce(F, E, axis)
    assert r.purity == pytest.approx(1.0, abs=1e-10)
    ro = reduce(F, O, axis)
    # rho_o = (F^dagger F)^T is the projector onto v itself
    vv = v / np.linalg.norm(v)
    assert np.allclose(ro.rho, np.outer(vv, vv.conj()), atol=1e-12)
    D = np.eye(n) / np.sqrt(n)
    assert np.allclose(reduce(D, E, axis).rho, np.eye(n) / n)
    with pytest.raises(ValueError):
        reduce(F, E)


def test_reduced_purity_matches_schmidt(pos_source):
    F = pos_source.jsa_
    for which in (E, O):
        assert reduce(F, which).purity == pytest.approx(purity(F), abs=1e-10)


def test_state_validation():
    axis = np.arange(2.0)
    with pytest.raises(ValueError, match="trace"):
        ReducedState(np.eye(2), axis)
    with pytest.raises(ValueError, match="Hermitian"):
        ReducedState(np.array([[0.5, 0.1], [0.2, 0.5]]), axis)
    with pytest.raises(ValueError, match="semidefinite"):
        ReducedState(np.array([[1.5, 0], [0, -0.5]]), axis)
    with pytest.raises(ValueError):
        ReducedState(np.eye(3) / 3, axis)


def test_visibility_basic(rng):
    axis = np.arange(4.0)
    a = pure_state(np.array([1, 0, 0, 0], complex), axis)
    b = pure_state(np.array([0, 1, 0, 0], complex), axis)
    assert visibility(a, a) == pytest.approx(1.0)
    assert visibility(a, b) == pytest.approx(0.0)
    c = ReducedState(np.eye(4) / 4, np.arange(4.0) + 1)
    with pytest.raises(ValueError, match="axes"):
        visibility(a, c)


def test_visibility_symmetry_and_unitary_invariance(rng):
    r1, r2 = random_state(rng), random_state(rng, rank=3)
    assert visibility(r1, r2) == pytest.approx(visibility(r2, r1), abs=1e-14)
    U = unitary_group.rvs(12, random_state=7)
    t1 = ReducedState(U @ r1.rho @ U.conj().T, r1.omega)
    t2 = ReducedState(U @ r2.rho @ U.conj().T, r2.omega)
    assert visibility(t1, t2) == pytest.approx(visibility(r1, r2), abs=1e-12)


def test_operational_distance_identity(rng):
    for _ in range(20):
        r1 = random_state(rng, rank=int(rng.integers(1, 13)))
        r2 = random_state(rng, rank=int(rng.integers(1, 13)))
        O_ = operational_distance(r1, r2)
        assert (r1.purity + r2.purity - O_) / 2 == pytest.approx(visibility(r1, r2), abs=1e-10)


def test_operational_distance_cases(rng):
    axis = np.arange(5.0)
    r = random_state(np.random.default_rng(1), n=5)
    assert operational_distance(r, r) == pytest.approx(0.0, abs=1e-15)
    a = pure_state(np.eye(5)[0].astype(complex), axis)
    b = pure_state(np.eye(5)[3].astype(complex), axis)
    assert operational_distance(a, b) == pytest.approx(2.0)
    u = rng.normal(size=5) + 1j * rng.normal(size=5)
    v = rng.normal(size=5) + 1j * rng.normal(size=5)
    pu, pv = pure_state(u, axis), pure_state(v, axis)
    overlap = abs(np.vdot(u / np.linalg.norm(u), v / np.linalg.norm(v))) ** 2
    assert operational_distance(pu, pv) == pytest.approx(2 - 2 * overlap, abs=1e-10)
    assert operational_distance_pure(pu, pv) == pytest.approx(operational_distance(pu, pv), abs=1e-10)


def test_purity_bound():
    assert purity_bound(0.95) == 0.95
    with pytest.raises(ValueError):
        purity_bound(1.2)


def test_dip_curve_properties(pos_source):
    F = pos_source.jsa_
    r = reduce(F, O)
    V = visibility(r, r)
    delays = np.linspace(-1000e-15, 1000e-15, 201)
    curve = dip_curve(r, r, delays)
    assert curve.coincidence[100] == pytest.approx(0.5 * (1 - V), abs=1e-12)
    assert np.all(curve.coincidence >= -1e-12) and np.all(curve.coincidence <= 0.5 + 1e-12)
    assert curve.visibility == pytest.approx(V, abs=1e-12)
    # far from the dip the photons are distinguishable: 10x the ~70 fs width
    far = dip_curve(r, r, [700e-15, -700e-15], fit=False)
    assert np.all(np.abs(far.coincidence - 0.5) < 0.01)
    assert far.fit is None


def test_dip_fit_on_gaussian_state():
    F = gaussian_jsa(n=64, rho=0.0, span=10)
    r = reduce(F, E)
    delays = np.linspace(-8e-12, 8e-12, 161)
    c = dip_curve(r, r, delays)
    assert c.fit.visibility == pytest.approx(1.0, abs=1e-3)
    assert c.fit.center == pytest.approx(0.0, abs=1e-15)
    # |f|^2 has spectral variance sigma_w^2 = (1e12 rad/s)^2, so
    # C(tau) = (1 - exp(-sigma_w^2 tau^2)) / 2 and FWHM = 2 sqrt(ln 2) / sigma_w
    fwhm_expected = 2 * np.sqrt(np.log(2)) / 1e12
    assert c.fit.fwhm == pytest.approx(fwhm_expected, rel=1e-3)


def test_heralding_efficiency():
    h = heralding_efficiency(13.0, 100.0, 0.6)
    assert h.eta_D == pytest.approx(0.13) and h.eta_H == pytest.approx(0.078)
    h2 = heralding_efficiency(13.0, 100.0, 0.6, fbs_correction=True)
    assert h2.eta_D == pytest.approx(0.26)
    assert h2.eta_H == pytest.approx(0.156)
    assert h2.eta_corrected == pytest.approx(0.4333, abs=1e-4)
    assert heralding_efficiency(0.0, 10.0, 0.5).eta_H == 0.0
    assert heralding_efficiency(3.0, 10.0, 1.0).eta_H == heralding_efficiency(3.0, 10.0, 1.0).eta_D
    with pytest.raises(ValueError, match="exceeds"):
        heralding_efficiency(11.0, 10.0, 0.5)
    with pytest.raises(ValueError):
        heralding_efficiency(1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        heralding_efficiency(1.0, 2.0, 1.5)
