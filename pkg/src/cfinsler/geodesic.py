"""Geodesic integration, straightness measures and reparameterization of trajectories."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicHermiteSpline

from .core import spray_theta
from .errors import DegenerateSample, DomainViolation, NonRealFactor
from .jet import WirtingerPoint

BOUNDARY_MARGIN = 1e-6
IMAG_TOL = 1e-6


def geodesic_rhs(expr, z, v) -> np.ndarray:
    """Acceleration z'' = theta*(z, v) - 2 G(z, v)."""
    v = np.asarray(v, dtype=complex)
    if not np.any(v):
        raise DegenerateSample("velocity must be nonzero")
    G, theta = spray_theta(expr, WirtingerPoint(z, v))
    return theta - 2.0 * G


@dataclass
class Trajectory:
    s: np.ndarray
    z: np.ndarray   # (m, n) complex
    v: np.ndarray   # (m, n) complex
    metric: str
    step: float
    order: int = 4
    truncated: bool = False
    reason: str = ""
    expr: object = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.z.shape[1]

    def __len__(self):
        return len(self.s)


def _flat(z, v):
    return np.concatenate([z.real, z.imag, v.real, v.imag])


def _unflat(y, n):
    return y[:n] + 1j * y[n:2 * n], y[2 * n:3 * n] + 1j * y[3 * n:]


def integrate(expr, z0, v0, step: float, count: int) -> Trajectory:
    """Classical RK4 on the real 4n-dimensional first-order system (z, v).

    Stops early, flagging the trajectory as truncated, when any stage point comes
    within ``BOUNDARY_MARGIN`` of the domain boundary.
    """
    if step <= 0 or count < 1:
        raise ValueError("step must be positive and count >= 1")
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    v0 = np.atleast_1d(np.asarray(v0, dtype=complex))
    n = z0.size
    if v0.size != n or n != expr.dim:
        raise DomainViolation(f"initial data has dimension {n}, metric has {expr.dim}")
    if not expr.domain.contains(z0, margin=BOUNDARY_MARGIN):
        raise DomainViolation(f"initial point {np.round(z0, 6).tolist()} outside {expr.domain}")
    if not np.any(v0):
        raise DegenerateSample("initial velocity must be nonzero")

    def f(y):
        z, v = _unflat(y, n)
        if not expr.domain.contains(z, margin=BOUNDARY_MARGIN):
            raise _Boundary
        a = geodesic_rhs(expr, z, v)
        return _flat(v, a)

    ys = [_flat(z0, v0)]
    truncated, reason = False, ""
    y = ys[0]
    h = step
    for _ in range(count):
        try:
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
        except _Boundary:
            truncated, reason = True, "boundary margin reached"
            break
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        ys.append(y)
    Y = np.array(ys)
    z = Y[:, :n] + 1j * Y[:, n:2 * n]
    v = Y[:, 2 * n:3 * n] + 1j * Y[:, 3 * n:]
    s = step * np.arange(len(ys))
    return Trajectory(s, z, v, expr.name, step, 4, truncated, reason, expr)


class _Boundary(Exception):
    pass


@dataclass(frozen=True)
class GeodesicDeviation:
    chord_deviation: float
    energy_drift: float | None


def _line_distance(points, base, direction):
    d = direction / np.linalg.norm(direction)
    w = points - base
    proj = (w @ d.conj())[:, None] * d[None, :]
    return np.linalg.norm(w - proj, axis=1)


def straightness(traj: Trajectory) -> GeodesicDeviation:
    """Distance from the complex line through the first and last points, and the drift of L(z, v)."""
    if len(traj) < 3:
        raise DegenerateSample("need at least 3 states")
    d = traj.z[-1] - traj.z[0]
    if np.linalg.norm(d) < 1e-14:
        raise DegenerateSample("trajectory endpoints coincide")
    chord = float(np.max(_line_distance(traj.z, traj.z[0], d)))
    drift = None
    if traj.expr is not None:
        L0 = traj.expr.L(WirtingerPoint(traj.z[0], traj.v[0]))
        drift = max(abs(traj.expr.L(WirtingerPoint(zz, vv)) - L0) for zz, vv in zip(traj.z, traj.v))
        drift = float(drift)
    return GeodesicDeviation(chord, drift)


def _point_to_polyline(points, poly, chunk=256):
    a, b = poly[:-1], poly[1:]
    ab = b - a
    ab2 = np.sum(np.abs(ab) ** 2, axis=1)
    ab2 = np.where(ab2 == 0, 1.0, ab2)
    out = np.empty(len(points))
    for i in range(0, len(points), chunk):
        p = points[i:i + chunk][:, None, :]
        t = np.real(np.sum((p - a[None]) * ab.conj()[None], axis=2)) / ab2[None]
        t = np.clip(t, 0.0, 1.0)
        proj = a[None] + t[..., None] * ab[None]
        dist = np.linalg.norm(p - proj, axis=2)
        out[i:i + chunk] = dist.min(axis=1)
    return out


def pointset_distance(t1: Trajectory, t2: Trajectory) -> float:
    """Symmetric Hausdorff distance between the z-curves, each read as a polyline through its nodes."""
    if len(t1) == 0 or len(t2) == 0:
        raise DegenerateSample("empty trajectory")
    z1, z2 = t1.z, t2.z
    if len(z1) == 1 or len(z2) == 1:
        return float(max(np.min(np.linalg.norm(z1[:, None] - z2[None], axis=2), axis=1).max(),
                         np.min(np.linalg.norm(z2[:, None] - z1[None], axis=2), axis=1).max()))
    return float(max(_point_to_polyline(z1, z2).max(), _point_to_polyline(z2, z1).max()))


def matched_euclidean(traj: Trajectory):
    """Euclidean geodesic from the same start, with the initial speed rescaled by a real factor so
    it ends at the projection of ``traj``'s endpoint onto the initial direction."""
    from .zoo import euclidean

    z0, v0 = traj.z[0], traj.v[0]
    span = traj.s[-1] - traj.s[0]
    c = float(np.real(np.vdot(v0, traj.z[-1] - z0)) / np.vdot(v0, v0).real) / span
    return integrate(euclidean(traj.dim), z0, c * v0, traj.step, len(traj) - 1)


def reparameterize(traj: Trajectory, P_samples) -> Trajectory:
    """New parameter st(s) = int_0^s u, u = exp(int_0^s 2 Re P); states resampled on a uniform
    st-grid by cubic Hermite interpolation using the exact derivative dz/dst = v / u."""
    P = np.asarray(P_samples, dtype=complex)
    if P.shape != (len(traj),):
        raise ValueError("one P sample per state is required")
    im = float(np.max(np.abs(2 * P.imag)))
    if im > IMAG_TOL:
        raise NonRealFactor(f"max |Im 2P| = {im:.2e} exceeds {IMAG_TOL}")
    s = traj.s
    u = np.exp(cumulative_trapezoid(2 * P.real, s, initial=0.0))
    st = cumulative_trapezoid(u, s, initial=0.0)
    assert np.all(np.diff(st) > 0), "new parameter must be strictly increasing"
    w = traj.v / u[:, None]
    grid = np.linspace(st[0], st[-1], len(st))
    zi = CubicHermiteSpline(st, traj.z, w, axis=0)(grid)
    dw = np.gradient(w, st, axis=0, edge_order=2)
    wi = CubicHermiteSpline(st, w, dw, axis=0)(grid)
    step = float(grid[1] - grid[0]) if len(grid) > 1 else traj.step
    return Trajectory(grid, zi, wi, traj.metric + " (reparameterized)", step, traj.order,
                      traj.truncated, traj.reason, None)


def equation_residual(expr, traj: Trajectory) -> np.ndarray:
    """Residual of z'' = theta* - 2G at interior nodes, with z' and z'' from central differences."""
    h = traj.step
    z = traj.z
    zd = (z[2:] - z[:-2]) / (2 * h)
    zdd = (z[2:] - 2 * z[1:-1] + z[:-2]) / h ** 2
    out = np.empty(len(zd))
    for i in range(len(zd)):
        out[i] = np.linalg.norm(zdd[i] - geodesic_rhs(expr, z[i + 1], zd[i]))
    return out


def seeded_initial_data(seed: int, n: int, count: int, radius: float = 0.5, speed: float = 0.3,
                        real_factor: bool = True):
    """Seeded (z0, v0) pairs inside the ball of the given radius.

    With ``real_factor`` the velocity is adjusted so that sum conj(z0_k) v0_k is real; along such
    data the disk-metric projective factor is real.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        x = rng.normal(size=2 * n)
        x *= radius * rng.random() ** (1 / (2 * n)) / np.linalg.norm(x)
        z0 = x[:n] + 1j * x[n:]
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        if real_factor and np.linalg.norm(z0) > 0:
            c = np.vdot(z0, v)
            v = v - 1j * c.imag * z0 / np.vdot(z0, z0).real
        v *= speed / np.linalg.norm(v)
        out.append((z0, v))
    return out


def trajectory_csv(traj: Trajectory) -> str:
    n = traj.dim
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["s"]
    head += [f"z{k + 1}_{p}" for k in range(n) for p in ("re", "im")]
    head += [f"v{k + 1}_{p}" for k in range(n) for p in ("re", "im")]
    w.writerow(head)
    for s, z, v in zip(traj.s, traj.z, traj.v):
        row = [repr(float(s))]
        for arr in (z, v):
            for c in arr:
                row += [repr(float(c.real)), repr(float(c.imag))]
        w.writerow(row)
    return buf.getvalue()


def trajectory_metadata(traj: Trajectory, deviation: GeodesicDeviation | None = None) -> dict:
    meta = {"metric": traj.metric, "step": traj.step, "order": traj.order, "states": len(traj),
            "truncated": traj.truncated, "reason": traj.reason}
    if deviation is not None:
        meta["chord_deviation"] = deviation.chord_deviation
        meta["energy_drift"] = deviation.energy_drift
    return meta


def export_trajectory(traj: Trajectory, csv_path, deviation: GeodesicDeviation | None = None):
    """Write the CSV table and a JSON sidecar next to it (``<csv>.json``)."""
    with open(csv_path, "w", newline="") as fh:
        fh.write(trajectory_csv(traj))
    with open(str(csv_path) + ".json", "w") as fh:
        json.dump(trajectory_metadata(traj, deviation), fh, indent=2, sort_keys=True)
        fh.write("\n")
