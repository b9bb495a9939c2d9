"""Tensor pipeline of a complex Finsler metric at a point, and metric classification.

Index conventions used throughout (numpy arrays, 0-based):

* ``g[i, j]``       = g_{i jbar} = d^2 L / d eta^i d etabar^j
* ``ginv[j, i]``    = g^{jbar i}, so that ``g @ ginv == I``
* ``N[i, j]``       = N^i_j (Chern-Finsler nonlinear connection)
* ``Ncan[i, j]``    = d G^i / d eta^j (canonical connection)
* ``Gbar[i, h]``    = d G^i / d etabar^h
* ``Lcoef[i, j, k]`` = L^i_{jk},  ``Ccoef[i, j, k]`` = C^i_{jk}
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import CFinslerError, DomainViolation, NotPositiveDefinite
from .jet import DenseDerivatives, WirtingerPoint, evaluate_jet

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-10
COND_WARN = 1e10


@dataclass(frozen=True)
class HermitianMatrix:
    entries: np.ndarray
    inverse: np.ndarray
    min_eigenvalue: float
    condition: float

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def hermitian_defect(self) -> float:
        e = self.entries
        return float(np.max(np.abs(e - e.conj().T)) / max(1.0, np.max(np.abs(e))))


def hermitian_from(entries: np.ndarray, what: str = "fundamental tensor") -> HermitianMatrix:
    """Validate Hermitian symmetry and positive definiteness, and invert.

    Cholesky first; an LU (pivoted) solve is the fallback when Cholesky
    rejects a matrix whose eigenvalues are nevertheless positive.
    """
    e = np.asarray(entries, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(e))))
    defect = float(np.max(np.abs(e - e.conj().T))) / scale
    if defect > HERMITIAN_TOL:
        raise NotPositiveDefinite(f"{what} is not Hermitian (defect {defect:.2e})")
    h = 0.5 * (e + e.conj().T)
    eig = np.linalg.eigvalsh(h)
    if eig[0] <= 0:
        raise NotPositiveDefinite(f"{what} is not positive definite (smallest eigenvalue {eig[0]:.3e})")
    cond = float(eig[-1] / eig[0])
    if cond > COND_WARN:
        log.warning("%s condition number %.3e", what, cond)
    else:
        log.debug("%s condition number %.3e", what, cond)
    eye = np.eye(h.shape[0])
    try:
        inv = scipy.linalg.cho_solve(scipy.linalg.cho_factor(h), eye)
    except np.linalg.LinAlgError:
        inv = scipy.linalg.lu_solve(scipy.linalg.lu_factor(h), eye)
    return HermitianMatrix(h, inv, float(eig[0]), cond)


@dataclass(frozen=True)
class ConnectionPack:
    N: np.ndarray
    G: np.ndarray
    Ncan: np.ndarray
    Lcoef: np.ndarray
    Ccoef: np.ndarray
    Gbar_sensitivity: np.ndarray


@dataclass(frozen=True)
class ThetaStar:
    theta: np.ndarray


@dataclass
class LocalGeometry:
    """Everything the pipeline knows about one metric at one point."""

    point: WirtingerPoint
    L: complex
    dL: np.ndarray        # dL/deta^i
    dLbar: np.ndarray     # dL/detabar^i
    dzL: np.ndarray       # dL/dz^k
    dzbarL: np.ndarray    # dL/dzbar^k
    dz_dbarL: np.ndarray  # [k, r] = d^2 L / dz^k detabar^r
    g: HermitianMatrix
    dg_eta: np.ndarray    # [h, i, j] = d g_{i jbar} / d eta^h
    dg_etabar: np.ndarray  # [h, i, j] = d g_{i jbar} / d etabar^h
    dzg: np.ndarray       # [k, i, j] = d g_{i jbar} / d z^k
    conn: ConnectionPack
    dN_etabar: np.ndarray  # [r, l, k] = d N^l_k / d etabar^r
    theta: np.ndarray

    @property
    def eta(self):
        return self.point.eta

    @property
    def G(self):
        return self.conn.G


def _geometry_from_jet(jet, point) -> LocalGeometry:
    D = DenseDerivatives(jet)
    eta = point.eta
    L = jet.value
    dL, dLbar = D.d("E"), D.d("EB")
    dzL, dzbarL = D.d("Z"), D.d("ZB")
    dz_dbarL = D.d("Z", "EB")
    gm = hermitian_from(D.d("E", "EB"))
    H = gm.inverse  # H[m, i] = g^{mbar i}
    dg_e = D.d("E", "E", "EB")
    dg_eb = D.d("EB", "E", "EB")
    dzg = D.d("Z", "E", "EB")
    dzg_e = D.d("Z", "E", "E", "EB")    # [k, h, i, j]
    dzg_eb = D.d("Z", "EB", "E", "EB")  # [k, h, i, j]

    # dH/d eta^h = -H (dg/d eta^h) H
    dH_e = -np.einsum("ab,hbc,cd->had", H, dg_e, H)
    dH_eb = -np.einsum("ab,hbc,cd->had", H, dg_eb, H)

    # N^i_j = g^{mbar i} dg_{l mbar}/dz^j eta^l
    A = np.einsum("jlm,l->jm", dzg, eta)  # [j, m]
    N = np.einsum("mi,jm->ij", H, A)
    G = 0.5 * N @ eta

    # derivatives of N^i_j in the fiber (product rule, no Euler shortcuts)
    dN_e = (np.einsum("hmi,jm->hij", dH_e, A)
            + np.einsum("mi,jhlm,l->hij", H, dzg_e, eta)
            + np.einsum("mi,jhm->hij", H, dzg))
    dN_eb = (np.einsum("hmi,jm->hij", dH_eb, A)
             + np.einsum("mi,jhlm,l->hij", H, dzg_eb, eta))
    # G^i = 1/2 N^i_j eta^j
    Ncan = 0.5 * (np.einsum("hij,j->ih", dN_e, eta) + N)
    Gbar = 0.5 * np.einsum("hij,j->ih", dN_eb, eta)

    # L^i_{jk} = g^{lbar i} (d_k g_{j lbar} - N^m_k dg_{j lbar}/d eta^m)
    delta_g = dzg - np.einsum("mk,mjl->kjl", N, dg_e)  # [k, j, l]
    Lcoef = np.einsum("li,kjl->ijk", H, delta_g)
    Ccoef = np.einsum("li,kjl->ijk", H, dg_e)

    # theta*^k = 2 g^{jbar k} (dL/dzbar^j - conj(Ncan^l_j) dL/detabar^l)
    delta_bar_L = dzbarL - np.einsum("lj,l->j", Ncan.conj(), dLbar)
    theta = 2.0 * H.T @ delta_bar_L

    conn = ConnectionPack(N, G, Ncan, Lcoef, Ccoef, Gbar)
    return LocalGeometry(point, L, dL, dLbar, dzL, dzbarL, dz_dbarL, gm, dg_e, dg_eb, dzg,
                         conn, dN_eb, theta)


def local_geometry(expr, point: WirtingerPoint) -> LocalGeometry:
    """Evaluate the full pipeline of ``expr`` at ``point`` (eta must be nonzero)."""
    if np.linalg.norm(point.eta) == 0:
        raise DomainViolation("fiber coordinate eta must be nonzero")
    jet = evaluate_jet(expr, point, fiber_order=3, base_order=1, which="L")
    return _geometry_from_jet(jet, point)


def spray_theta(expr, point: WirtingerPoint) -> tuple[np.ndarray, np.ndarray]:
    """Spray G and theta* only, from the reduced "spray" jet; used by geodesic integration."""
    if np.linalg.norm(point.eta) == 0:
        raise DomainViolation("fiber coordinate eta must be nonzero")
    jet = evaluate_jet(expr, point, fiber_order=3, base_order=1, which="L", shape="spray")
    D = DenseDerivatives(jet)
    eta = point.eta
    H = hermitian_from(D.d("E", "EB")).inverse
    dg_e = D.d("E", "E", "EB")
    dzg = D.d("Z", "E", "EB")
    dzg_e = D.d("Z", "E", "E", "EB")
    dH_e = -np.einsum("ab,hbc,cd->had", H, dg_e, H)
    A = np.einsum("jlm,l->jm", dzg, eta)
    N = np.einsum("mi,jm->ij", H, A)
    G = 0.5 * N @ eta
    dN_e = (np.einsum("hmi,jm->hij", dH_e, A)
            + np.einsum("mi,jhlm,l->hij", H, dzg_e, eta)
            + np.einsum("mi,jhm->hij", H, dzg))
    Ncan = 0.5 * (np.einsum("hij,j->ih", dN_e, eta) + N)
    delta_bar_L = D.d("ZB") - np.einsum("lj,l->j", Ncan.conj(), D.d("EB"))
    theta = 2.0 * H.T @ delta_bar_L
    return G, theta


def fundamental_tensor(expr, point: WirtingerPoint) -> HermitianMatrix:
    if np.linalg.norm(point.eta) == 0:
        raise DomainViolation("fiber coordinate eta must be nonzero")
    jet = evaluate_jet(expr, point, fiber_order=2, base_order=0, which="L")
    return hermitian_from(DenseDerivatives(jet).d("E", "EB"))


def connections(expr, point: WirtingerPoint) -> ConnectionPack:
    return local_geometry(expr, point).conn


def theta_star(expr, point: WirtingerPoint) -> ThetaStar:
    return ThetaStar(local_geometry(expr, point).theta)


def torsion(geo: LocalGeometry):
    """Kähler vector T^i_{jk} eta^j (indexed [i, k]) and weakly-Kähler covector
    g_{i lbar} T^i_{jk} eta^j etabar^l (indexed [k])."""
    Lc = geo.conn.Lcoef
    T = Lc - Lc.transpose(0, 2, 1)
    eta = geo.eta
    kv = np.einsum("ijk,j->ik", T, eta)
    cov = np.einsum("il,ik,l->k", geo.g.entries, kv, eta.conj())
    return kv, cov


def torsion_tests(expr, point: WirtingerPoint):
    return torsion(local_geometry(expr, point))


def local_scale(geo: LocalGeometry) -> float:
    return max(1.0, float(np.max(np.abs(geo.G))), abs(geo.L))


# ---------------------------------------------------------------- sampling


@dataclass(frozen=True)
class SamplePlan:
    """Seeded sample generator: base points in a shrunk copy of the domain, fibers on the
    unit sphere scaled by a radius drawn from ``[rmin, rmax]``."""

    count: int = 64
    seed: int = 7
    shrink: float = 0.8
    rmin: float = 0.5
    rmax: float = 2.0

    def points(self, metric, domain=None, max_tries: int | None = None) -> list[WirtingerPoint]:
        return self.draw(metric, domain, max_tries)[0]

    def draw(self, metrics, domain=None, max_tries: int | None = None):
        """Admissible points for every metric in ``metrics`` plus the number of rejected draws
        (e.g. Randers samples with |beta| below the cutoff)."""
        if not isinstance(metrics, (list, tuple)):
            metrics = [metrics]
        if domain is None:
            domain = metrics[0].domain
            for m in metrics[1:]:
                domain = domain.intersect(m.domain)
        dim = metrics[0].dim
        rng = np.random.default_rng(self.seed)
        out = []
        tries = 0
        limit = max_tries or 50 * self.count + 100
        while len(out) < self.count:
            tries += 1
            if tries > limit:
                raise DomainViolation(f"could only draw {len(out)} admissible samples in {limit} tries")
            z = domain.sample_base(rng, self.shrink)
            v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            v /= np.linalg.norm(v)
            v *= self.rmin + (self.rmax - self.rmin) * rng.random()
            p = WirtingerPoint(z, v)
            if all(m.admissible(p) for m in metrics):
                out.append(p)
        return out, tries - len(out)


# ---------------------------------------------------------------- classification


@dataclass
class ClassificationReport:
    metric: str
    samples: int
    tolerance: float
    kahler_residual: float
    weakly_kahler_residual: float
    gen_berwald_residual: float
    theta_residual: float
    connection_gap: float
    kahler: bool
    weakly_kahler: bool
    generalized_berwald: bool
    complex_berwald: bool
    min_eigenvalue: float
    per_sample: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def flags(self) -> dict:
        return {"kahler": self.kahler, "weakly_kahler": self.weakly_kahler,
                "generalized_berwald": self.generalized_berwald,
                "complex_berwald": self.complex_berwald}


def sample_residuals(geo: LocalGeometry) -> dict:
    kv, cov = torsion(geo)
    s = local_scale(geo)
    return {
        "kahler": float(np.max(np.abs(kv))) / s,
        "weakly_kahler": float(np.max(np.abs(cov))) / s,
        "gen_berwald": float(np.max(np.abs(geo.conn.Gbar_sensitivity))) / s,
        "theta": float(np.max(np.abs(geo.theta))) / s,
        "connection_gap": float(np.max(np.abs(geo.conn.N - geo.conn.Ncan))) / s,
        "min_eigenvalue": geo.g.min_eigenvalue,
    }


def classify(expr, sampler: SamplePlan | None = None, tol: float = 1e-7,
             points: list | None = None) -> ClassificationReport:
    """Aggregate Kähler / weakly Kähler / generalized Berwald residuals over samples.

    Flags compare the max (not mean) of each relative residual to ``tol``.
    Samples that raise are recorded and left out of the aggregate.
    """
    sampler = sampler or SamplePlan()
    pts = points if points is not None else sampler.points(expr)
    rows, failures = [], []
    for idx, p in enumerate(pts):
        try:
            geo = local_geometry(expr, p)
        except CFinslerError as exc:
            failures.append({"index": idx, **exc.record()})
            continue
        r = sample_residuals(geo)
        r["index"] = idx
        rows.append(r)

    def mx(key):
        return max((r[key] for r in rows), default=float("nan"))

    k, w, b = mx("kahler"), mx("weakly_kahler"), mx("gen_berwald")
    ok = bool(rows)
    kahler = ok and k < tol
    weakly = ok and w < tol
    gb = ok and b < tol
    return ClassificationReport(
        metric=expr.name, samples=len(rows), tolerance=tol,
        kahler_residual=k, weakly_kahler_residual=w, gen_berwald_residual=b,
        theta_residual=mx("theta"), connection_gap=mx("connection_gap"),
        kahler=kahler, weakly_kahler=weakly, generalized_berwald=gb,
        complex_berwald=kahler and gb,
        min_eigenvalue=min((r["min_eigenvalue"] for r in rows), default=float("nan")),
        per_sample=rows, failures=failures,
    )
