import json

import numpy as np
import pytest

from cfinsler.core import local_geometry
from cfinsler.errors import DegenerateSample, DomainViolation, NonRealFactor
from cfinsler.geodesic import (Trajectory, equation_residual, export_trajectory, geodesic_rhs, integrate,
                               matched_euclidean, pointset_distance, reparameterize, seeded_initial_data,
                               straightness, trajectory_csv)
from cfinsler.jet import WirtingerPoint
from cfinsler.zoo import disk_metric, euclidean


def _traj(z, s=None):
    z = np.asarray(z, complex)
    s = np.linspace(0, 1, len(z)) if s is None else s
    return Trajectory(s, z, np.gradient(z, s, axis=0), "fixture", float(s[1] - s[0]))


def test_euclidean_is_exact():
    for step in (0.5, 0.01):
        tr = integrate(euclidean(2), [0.1, -0.2j], [1 + 1j, 0.5], step, 20)
        want = np.array([0.1, -0.2j]) + np.outer(tr.s, [1 + 1j, 0.5])
        assert np.max(np.abs(tr.z - want)) < 1e-12


def test_sagitta_fixture():
    R, phi = 2.0, 0.3
    t = np.linspace(-phi, phi, 401)
    arc = _traj(np.stack([R * np.sin(t), R * np.cos(t)], axis=1))
    # the arc's deviation from its chord is the sagitta R (1 - cos phi)
    assert straightness(arc).chord_deviation == pytest.approx(R * (1 - np.cos(phi)), rel=1e-12)


def test_parallel_lines_fixture():
    s = np.linspace(0, 1, 50)
    a = _traj(np.stack([s, 0 * s], axis=1))
    b = _traj(np.stack([s, 0 * s + 0.25j], axis=1))
    assert pointset_distance(a, b) == pytest.approx(0.25, rel=1e-14)
    c = _traj(np.stack([s[::7] * 1.0, 0 * s[::7]], axis=1))
    # coarse polyline along the same segment: distance zero, not node spacing
    assert pointset_distance(a, c) < 1e-15


@pytest.mark.parametrize("key,z0,v0", [
    ("disk:eps=-1", [0.3, 0.1j], [0.5, 0.4]),
    ("disk:eps=-0.5", [0.2, -0.1], [0.3j, 0.4]),
    ("hartogs-alpha", [0.6, 0.2], [0.05, 0.04j]),
    ("hartogs-randers", [0.6, 0.2], [0.05, 0.04j]),
    ("randers-z2", [0.3, 0.1], [0.2, 0.1]),
])
def test_fourth_order_self_convergence(metrics, key, z0, v0):
    m = metrics[key]
    ends = [integrate(m, z0, v0, h, round(1 / h)).z[-1] for h in (0.1, 0.05, 0.025)]
    ratio = np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2])
    assert 12 <= ratio <= 20


def test_disk_geodesic_is_straight_and_solves_equation(D1):
    z0, v0 = seeded_initial_data(3, 2, 1)[0]
    tr = integrate(D1, z0, v0, 1e-2, 100)
    dev = straightness(tr)
    assert dev.chord_deviation < 1e-12
    assert dev.energy_drift < 1e-10
    assert np.max(equation_residual(D1, tr)) < 1e-3
    assert pointset_distance(tr, matched_euclidean(tr)) < 1e-12


def test_truncation_at_boundary(D1):
    tr = integrate(D1, [0.9, 0], [1.0, 0], 0.01, 1000)
    assert tr.truncated and "boundary" in tr.reason
    assert np.all(np.linalg.norm(tr.z, axis=1) < 1)


def test_integration_input_errors(D1):
    with pytest.raises(DomainViolation):
        integrate(D1, [1.5, 0], [1, 0], 0.1, 2)
    with pytest.raises(DomainViolation):
        integrate(D1, [0.1], [1], 0.1, 2)
    with pytest.raises(DegenerateSample):
        integrate(D1, [0.1, 0], [0, 0], 0.1, 2)
    with pytest.raises(ValueError):
        integrate(D1, [0.1, 0], [1, 0], -0.1, 2)
    with pytest.raises(DegenerateSample):
        geodesic_rhs(D1, np.zeros(2), np.zeros(2))


def test_rhs_matches_spray(D1):
    z, v = np.array([0.2, 0.1j]), np.array([0.3, -0.2])
    geo = local_geometry(D1, WirtingerPoint(z, v))
    assert np.allclose(geodesic_rhs(D1, z, v), geo.theta - 2 * geo.G, atol=1e-15)


def test_reparameterization_rejects_complex_factor():
    tr = integrate(euclidean(1), [0.1], [1.0], 0.1, 10)
    with pytest.raises(NonRealFactor):
        reparameterize(tr, np.full(len(tr), 0.1 + 0.01j))
    with pytest.raises(ValueError):
        reparameterize(tr, np.zeros(3))


def test_reparameterization_constant_factor():
    # with constant real P the new parameter is (exp(2 P s) - 1) / (2 P)
    tr = integrate(euclidean(1), [0.0], [1.0], 0.01, 100)
    P = 0.2
    rp = reparameterize(tr, np.full(len(tr), P))
    assert rp.s[-1] == pytest.approx((np.exp(2 * P) - 1) / (2 * P), rel=1e-4)
    # the image of the curve is unchanged
    assert pointset_distance(tr, rp) < 1e-12


def test_seeded_initial_data_real_factor():
    for z0, v0 in seeded_initial_data(7, 2, 5):
        assert abs(np.vdot(z0, v0).imag) < 1e-15
        assert np.linalg.norm(z0) < 0.5
        assert np.linalg.norm(v0) == pytest.approx(0.3)
    a = seeded_initial_data(7, 2, 2)
    b = seeded_initial_data(7, 2, 2)
    assert all(np.array_equal(x[0], y[0]) for x, y in zip(a, b))


def test_csv_export(tmp_path, D1):
    tr = integrate(D1, [0.1, 0.2j], [0.3, 0.1], 0.05, 4)
    text = trajectory_csv(tr)
    lines = text.splitlines()
    assert lines[0] == "s,z1_re,z1_im,z2_re,z2_im,v1_re,v1_im,v2_re,v2_im"
    assert len(lines) == 6
    row = [float(x) for x in lines[3].split(",")]
    assert row[1] + 1j * row[2] == tr.z[2, 0]  # repr floats round-trip exactly
    path = tmp_path / "t.csv"
    export_trajectory(tr, path, straightness(tr))
    meta = json.loads((tmp_path / "t.csv.json").read_text())
    assert meta["metric"] == D1.name and meta["states"] == 5 and meta["step"] == 0.05
    assert "chord_deviation" in meta
