import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfinsler import expr as ex
from cfinsler.core import (SamplePlan, classify, connections, fundamental_tensor, hermitian_from,
                           local_geometry, spray_theta, theta_star, torsion)
from cfinsler.domains import Ball, Whole
from cfinsler.errors import DomainViolation, NotPositiveDefinite
from cfinsler.jet import WirtingerPoint
from cfinsler.zoo import disk_metric, euclidean, hermitian_metric
from conftest import point

lam = st.complex_numbers(min_magnitude=0.3, max_magnitude=3.0, allow_nan=False, allow_infinity=False)
seed = st.integers(0, 10_000)


def nonkahler():
    """a = diag(1 + |z2|^2, 1): Hermitian but not Kähler."""
    a = [[1 + ex.abs2(ex.z(1)), ex.ZERO], [ex.ZERO, ex.ONE]]
    return hermitian_metric(a, Whole(2), "nonkahler")


def test_hermitian_from_rejects():
    with pytest.raises(NotPositiveDefinite):
        hermitian_from(np.array([[1, 2], [2, 1]], complex))
    with pytest.raises(NotPositiveDefinite):
        hermitian_from(np.array([[1, 1j], [0, 1]], complex))
    h = hermitian_from(np.array([[2, 1j], [-1j, 2]]))
    assert np.allclose(h.entries @ h.inverse, np.eye(2))
    assert h.min_eigenvalue == pytest.approx(1.0)
    assert h.condition == pytest.approx(3.0)


def test_condition_warning_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="cfinsler.core"):
        hermitian_from(np.diag([1.0, 1e-11]))
    assert "condition" in caplog.text


def test_one_dimensional_disk_spray():
    # L = |eta|^2 / (1 - |z|^2)^2, N = 2 zbar eta / (1 - |z|^2), G = zbar eta^2 / (1 - |z|^2)
    z, eta = 0.3 + 0.2j, 0.8 - 0.5j
    geo = local_geometry(disk_metric(1, -1.0), point([z], [eta]))
    r = 1 - abs(z) ** 2
    assert geo.conn.N[0, 0] == pytest.approx(2 * np.conj(z) * eta / r, rel=1e-13)
    assert geo.G[0] == pytest.approx(np.conj(z) * eta ** 2 / r, rel=1e-13)
    assert np.allclose(geo.theta, 0, atol=1e-14)


def test_euclidean_geometry_vanishes():
    geo = local_geometry(euclidean(2), point([0.3, -0.1j], [1, 2]))
    for arr in (geo.conn.N, geo.G, geo.theta, geo.conn.Lcoef, geo.conn.Ccoef):
        assert np.max(np.abs(arr)) == 0


def test_zero_fiber_rejected():
    with pytest.raises(DomainViolation):
        local_geometry(euclidean(2), point([0, 0], [0, 0]))


def test_spray_theta_matches_full_pipeline(metrics, small_plan):
    for key in ("disk:eps=-1", "hartogs-randers", "randers-z2"):
        m = metrics[key]
        for p in small_plan.points(m):
            G, th = spray_theta(m, p)
            geo = local_geometry(m, p)
            assert np.allclose(G, geo.G, rtol=1e-12, atol=1e-13)
            assert np.allclose(th, geo.theta, rtol=1e-12, atol=1e-13)


def test_convenience_accessors():
    m, p = disk_metric(2, -0.5), point([0.2, 0.1], [1, 1j])
    geo = local_geometry(m, p)
    assert np.array_equal(fundamental_tensor(m, p).entries, geo.g.entries)
    assert np.array_equal(connections(m, p).N, geo.conn.N)
    assert np.array_equal(theta_star(m, p).theta, geo.theta)


def test_nonkahler_hermitian_metric():
    m = nonkahler()
    rep = classify(m, SamplePlan(8, 1))
    assert not rep.kahler and not rep.weakly_kahler
    assert rep.theta_residual > 1e-3
    # covector by hand: cov_2 = zbar2 |eta1|^2, cov_1 = -zbar2 eta2 etabar1
    z, eta = np.array([0.2, 0.5 + 0.1j]), np.array([1.0, 0.5j])
    _, cov = torsion(local_geometry(m, WirtingerPoint(z, eta)))
    want = np.array([-np.conj(z[1]) * eta[1] * np.conj(eta[0]), np.conj(z[1]) * abs(eta[0]) ** 2])
    assert np.allclose(cov, want, atol=1e-14)


@pytest.mark.parametrize("key", ["euclidean", "disk:eps=-1", "disk:eps=-0.5", "hartogs-alpha", "hartogs-randers",
                                 "randers-z2"])
def test_structural_identities(metrics, key, small_plan):
    m = metrics[key]
    for p in small_plan.points(m):
        geo = local_geometry(m, p)
        s = max(1.0, np.max(np.abs(geo.G)))
        assert np.max(np.abs(geo.conn.N @ p.eta - 2 * geo.G)) / s < 1e-9
        assert np.max(np.abs(geo.conn.Ncan @ p.eta - 2 * geo.G)) / s < 1e-9
        assert abs(geo.dL @ p.eta - geo.L) / abs(geo.L) < 1e-9
        assert abs(geo.dLbar @ p.eta.conj() - geo.L) / abs(geo.L) < 1e-9


@settings(max_examples=20, deadline=None)
@given(lam, seed)
def test_scaling_laws(l, s):
    m = disk_metric(2, -1.0)
    p = SamplePlan(1, s).points(m)[0]
    a, b = local_geometry(m, p), local_geometry(m, p.scaled(l))
    assert b.L == pytest.approx(abs(l) ** 2 * a.L, rel=1e-9)
    assert np.allclose(b.G, l ** 2 * a.G, rtol=1e-9, atol=1e-12)
    assert np.allclose(b.g.entries, a.g.entries, rtol=1e-9, atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(lam, seed)
def test_theta_scaling_nonkahler(l, s):
    m = nonkahler()
    p = SamplePlan(1, s, rmin=0.5, rmax=1.5).points(m)[0]
    a, b = local_geometry(m, p), local_geometry(m, p.scaled(l))
    assert np.allclose(b.theta, abs(l) ** 2 * a.theta, rtol=1e-9, atol=1e-12)


def test_classification_flags(metrics):
    plan = SamplePlan(16, 7)
    expected = {"euclidean": (True, True, True), "disk:eps=-1": (True, True, True),
                "hartogs-alpha": (True, True, True), "hartogs-randers": (True, True, True),
                "randers-z2": (False, False, False)}
    for key, (k, w, gb) in expected.items():
        rep = classify(metrics[key], plan)
        assert (rep.kahler, rep.weakly_kahler, rep.generalized_berwald) == (k, w, gb), key
        assert rep.complex_berwald == (rep.kahler and rep.generalized_berwald)
        if rep.kahler:
            assert rep.weakly_kahler


def test_sampler_is_seeded_and_in_domain(D1):
    a = SamplePlan(10, 5).points(D1)
    b = SamplePlan(10, 5).points(D1)
    assert all(np.array_equal(x.z, y.z) and np.array_equal(x.eta, y.eta) for x, y in zip(a, b))
    assert all(np.linalg.norm(p.z) < 0.8 for p in a)


def test_sampler_disjoint_domains():
    far = disk_metric(2, -1.0)
    other = hermitian_metric([[ex.ONE, ex.ZERO], [ex.ZERO, ex.ONE]], Ball(2, 0.5, (3, 0)), "shifted")
    with pytest.raises(DomainViolation):
        SamplePlan(4, 1).draw([far, other])
