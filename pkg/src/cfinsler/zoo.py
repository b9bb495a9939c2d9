"""Metric constructors: built-in examples, Kähler potentials and Randers metrics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr as ex
from .domains import Ball, Domain, Hartogs, Whole
from .errors import (CFinslerError, DegenerateSample, DomainViolation, HomogeneityWarning,
                     NotPositiveDefinite, PreconditionViolation)
from .jet import WirtingerPoint, index_set, jet_of, DenseDerivatives

BETA_CUTOFF = 1e-6
NORM_B_SLACK = 1e-9
HOMOGENEITY_TOL = 1e-9


@dataclass(eq=False)
class MetricExpr:
    """A complex Finsler metric given by an expression tree.

    ``form`` is ``"L"`` when ``body`` is L = F^2 and ``"F"`` when it is F itself.
    """

    name: str
    dim: int
    body: ex.Expr
    form: str = "L"
    domain: Domain | None = None
    params: dict = field(default_factory=dict)
    randers: "RandersData | None" = None

    def __post_init__(self):
        if self.form not in ("L", "F"):
            raise ValueError("form must be 'L' or 'F'")
        if self.domain is None:
            self.domain = Whole(self.dim)
        if self.domain.dim != self.dim:
            raise DomainViolation(f"domain dimension {self.domain.dim} != metric dimension {self.dim}")
        bad = [s for s in ex.symbols(self.body) if s[1] >= self.dim]
        if bad:
            fam, k = sorted(bad)[0]
            raise DomainViolation(f"{fam}[{k + 1}] exceeds dimension {self.dim}")

    def check_point(self, point: WirtingerPoint):
        if not self.domain.contains(point.z):
            raise DomainViolation(f"base point {np.round(point.z, 6).tolist()} outside {self.domain}")
        if self.randers is not None and not self.randers.is_zero:
            b = abs(self.randers.beta(point))
            if b < BETA_CUTOFF:
                raise DegenerateSample(f"|beta| = {b:.2e} below {BETA_CUTOFF}")

    def admissible(self, point: WirtingerPoint) -> bool:
        try:
            self.check_point(point)
        except CFinslerError:
            return False
        return bool(np.linalg.norm(point.eta) > 0)

    def L(self, point: WirtingerPoint) -> complex:
        """Plain evaluation of L = F^2."""
        self.check_point(point)
        v = ex.evaluate(self.body, point.env())
        return v * v if self.form == "F" else v

    def homogeneity_defect(self, probes: int = 8, seed: int = 0) -> float:
        """Worst relative defect of L(z, lam eta) = |lam|^2 L(z, eta) over random probes."""
        rng = np.random.default_rng(seed)
        worst = 0.0
        done = 0
        for _ in range(20 * probes):
            if done == probes:
                break
            z = self.domain.sample_base(rng, 0.8)
            v = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
            lam = complex(rng.normal(), rng.normal())
            p = WirtingerPoint(z, v)
            if not self.admissible(p):
                continue
            try:
                a = self.L(p)
                b = self.L(p.scaled(lam))
            except (CFinslerError, ZeroDivisionError, ValueError):
                continue
            worst = max(worst, abs(b - abs(lam) ** 2 * a) / max(1.0, abs(b)))
            done += 1
        return worst

    def probe_homogeneity(self, probes: int = 8, seed: int = 0) -> float:
        d = self.homogeneity_defect(probes, seed)
        if d > HOMOGENEITY_TOL:
            warnings.warn(f"metric {self.name!r} fails (1,1)-homogeneity by {d:.2e}", HomogeneityWarning,
                          stacklevel=2)
        return d

    def describe(self) -> dict:
        return {"name": self.name, "dim": self.dim, "form": self.form,
                "domain": self.domain.describe(), "params": dict(self.params)}


# ---------------------------------------------------------------- builtins


def euclidean(n: int = 2) -> MetricExpr:
    body = ex.add(*(ex.eta(k) * ex.etabar(k) for k in range(n)))
    return MetricExpr("euclidean", n, body, "L", Whole(n), {"dim": n})


def disk_metric(n: int = 2, eps: float = -1.0) -> MetricExpr:
    """Constant holomorphic curvature ``eps`` < 0 metric on the ball of radius 1/sqrt(-eps)."""
    if not eps < 0:
        raise PreconditionViolation(f"eps must be negative, got {eps}")
    zz = ex.add(*(ex.z(k) * ex.zbar(k) for k in range(n)))
    ee = ex.add(*(ex.eta(k) * ex.etabar(k) for k in range(n)))
    pair = ex.add(*(ex.z(k) * ex.etabar(k) for k in range(n)))
    num = ee + eps * (zz * ee - ex.abs2(pair))
    body = num / (1 + eps * zz) ** 2
    return MetricExpr(f"disk(eps={eps!r})", n, body, "L", Ball(n, 1.0 / np.sqrt(-eps)),
                      {"dim": n, "eps": eps})


def kahler_from_potential(potential: ex.Expr, dim: int) -> list:
    """Hermitian matrix ``a[i][j] = d^2 phi / dz^i dzbar^j`` as expression trees."""
    rows = []
    for i in range(dim):
        di = ex.diff(potential, "z", i)
        rows.append([ex.diff(di, "zbar", j) for j in range(dim)])
    return rows


def _eval_matrix(rows, z) -> np.ndarray:
    env = WirtingerPoint(z, np.ones(len(z))).env()
    return np.array([[ex.evaluate(e, env) for e in row] for row in rows], dtype=complex)


def check_positive(rows, domain: Domain, probes: int = 8, seed: int = 0, what: str = "matrix"):
    rng = np.random.default_rng(seed)
    for _ in range(probes):
        z = domain.sample_base(rng, 0.8)
        m = _eval_matrix(rows, z)
        eig = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if eig[0] <= 0:
            raise NotPositiveDefinite(f"{what} not positive definite at z = {np.round(z, 6).tolist()}")


def hermitian_metric(a, domain: Domain, name: str = "hermitian", params: dict | None = None) -> MetricExpr:
    """Purely Hermitian metric L = a_{i jbar}(z) eta^i etabar^j."""
    n = len(a)
    body = ex.add(*(a[i][j] * ex.eta(i) * ex.etabar(j) for i in range(n) for j in range(n)))
    return MetricExpr(name, n, body, "L", domain, params or {})


def hartogs_potential() -> ex.Expr:
    zz = ex.abs2(ex.z(0))
    ww = ex.abs2(ex.z(1))
    return -ex.log((1 - zz) * (zz - ww))


def hartogs_covector():
    d = ex.abs2(ex.z(0)) - ex.abs2(ex.z(1))
    return [ex.z(1) / d, -ex.z(0) / d]


def hartogs_alpha() -> MetricExpr:
    a = kahler_from_potential(hartogs_potential(), 2)
    return hermitian_metric(a, Hartogs(), "hartogs-alpha")


@dataclass(eq=False)
class RandersData:
    """Hermitian ``a_{i jbar}(z)`` and holomorphic-index covector ``b_i(z)`` as expression trees."""

    a: list
    b: list
    domain: Domain

    @property
    def dim(self) -> int:
        return len(self.b)

    @property
    def is_zero(self) -> bool:
        return all(isinstance(e, ex.Const) and e.value == 0 for e in self.b)

    def alpha2_expr(self) -> ex.Expr:
        n = self.dim
        return ex.add(*(self.a[i][j] * ex.eta(i) * ex.etabar(j) for i in range(n) for j in range(n)))

    def beta_expr(self) -> ex.Expr:
        return ex.add(*(self.b[i] * ex.eta(i) for i in range(self.dim)))

    def beta(self, point: WirtingerPoint) -> complex:
        return complex(ex.evaluate(self.beta_expr(), point.env()))

    def norm_b2(self, z) -> float:
        t = randers_tensors(self, WirtingerPoint(z, np.ones(self.dim)))
        return t.normb2


def randers(data: RandersData, name: str = "randers", params: dict | None = None,
            probes: int = 8, seed: int = 0) -> MetricExpr:
    """F = sqrt(alpha^2) + |beta|, validated on probe points.

    The covector norm is allowed to reach 1 up to a small slack; the hard requirement
    checked here is positive definiteness of the resulting fundamental tensor.
    """
    from .core import fundamental_tensor

    n = data.dim
    if len(data.a) != n or any(len(r) != n for r in data.a):
        raise DomainViolation("a and b have inconsistent dimensions")
    check_positive(data.a, data.domain, probes, seed, "a_{i jbar}")
    body = ex.sqrt(data.alpha2_expr()) + ex.sqrt(ex.abs2(data.beta_expr()))
    m = MetricExpr(name, n, body, "F", data.domain, params or {}, data)
    rng = np.random.default_rng(seed)
    for _ in range(probes):
        z = data.domain.sample_base(rng, 0.8)
        nb = data.norm_b2(z)
        if nb > 1 + NORM_B_SLACK:
            raise PreconditionViolation(f"||b||^2 = {nb:.6g} exceeds 1 at z = {np.round(z, 6).tolist()}")
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        p = WirtingerPoint(z, v)
        if m.admissible(p):
            fundamental_tensor(m, p)
    return m


def hartogs_randers() -> MetricExpr:
    a = kahler_from_potential(hartogs_potential(), 2)
    return randers(RandersData(a, hartogs_covector(), Hartogs()), "hartogs-randers")


def randers_z2(n: int = 2) -> MetricExpr:
    """a = identity, b_1 = z_1^2 and b_k = 0 otherwise, on the unit ball."""
    a = [[ex.ONE if i == j else ex.ZERO for j in range(n)] for i in range(n)]
    b = [ex.z(0) ** 2] + [ex.ZERO] * (n - 1)
    return randers(RandersData(a, b, Ball(n, 1.0)), "randers-z2", {"dim": n})


# ---------------------------------------------------------------- Randers closed forms


@dataclass
class RandersTensors:
    a: np.ndarray       # [i, j] = a_{i jbar}
    H: np.ndarray       # [j, i] = a^{jbar i}
    b: np.ndarray       # b_i
    bup: np.ndarray     # b^i = a^{jbar i} bbar_j
    dzb_up_bar: np.ndarray  # [k, r] = d conj(b^r) / dz^k
    dz_bbar: np.ndarray     # [k, r] = d conj(b_r) / dz^k
    normb2: float
    alpha: float
    beta: complex


def randers_tensors(data: RandersData, point: WirtingerPoint) -> RandersTensors:
    n = data.dim
    iset = index_set(n, 0, 1)
    a_j = [[jet_of(e, point, iset) for e in row] for row in data.a]
    b_j = [jet_of(e, point, iset) for e in data.b]

    def dense(jets, blocks):
        return np.array([DenseDerivatives(j).d(*blocks) if blocks else j.value for j in jets])

    a = np.array([[j.value for j in row] for row in a_j])
    dzbar_a = np.array([[DenseDerivatives(j).d("ZB") for j in row] for row in a_j])  # [i, j, k]
    b = dense(b_j, ())
    dz_b = dense(b_j, ("Z",))      # [i, k]
    dzbar_b = dense(b_j, ("ZB",))  # [i, k]
    H = np.linalg.inv(a)  # a @ H = I, H[j, i] = a^{jbar i}
    bup = np.einsum("ji,j->i", H, b.conj())
    # d b^i / dzbar^k = d a^{jbar i}/dzbar^k bbar_j + a^{jbar i} d bbar_j / dzbar^k
    dH = -np.einsum("ja,abk,bi->kji", H, dzbar_a, H)
    dzbar_bup = (np.einsum("kji,j->ki", dH, b.conj())
                 + np.einsum("ji,jk->ki", H, dz_b.conj()))
    dzb_up_bar = dzbar_bup.conj()
    dz_bbar = dzbar_b.conj().T  # [k, r]
    normb2 = float(np.real(np.einsum("ji,i,j->", H, b, b.conj())))
    eta = point.eta
    alpha = float(np.sqrt(np.real(eta @ a @ eta.conj())))
    beta = complex(b @ eta)
    return RandersTensors(a, H, b, bup, dzb_up_bar, dz_bbar, normb2, alpha, beta)


def randers_closed_form_term(data: RandersData, point: WirtingerPoint) -> complex:
    """(1/(2|beta|)) eta^j (betabar l_rbar d bbar^r/dz^j + beta d b_rbar/dz^j etabar^r)."""
    t = randers_tensors(data, point)
    eta = point.eta
    lbar = t.a.T @ eta  # l_rbar = a_{j rbar} eta^j
    s1 = eta @ t.dzb_up_bar @ lbar
    s2 = eta @ t.dz_bbar @ eta.conj()
    return (np.conj(t.beta) * s1 + t.beta * s2) / (2 * abs(t.beta))


def randers_spray_closed_form(data: RandersData, point: WirtingerPoint, alpha_metric: MetricExpr | None = None):
    """Spray of F = alpha + |beta| as the spray of alpha plus explicit correction terms."""
    from .core import local_geometry

    t = randers_tensors(data, point)
    if abs(t.beta) <= BETA_CUTOFF:
        raise DegenerateSample(f"|beta| = {abs(t.beta):.2e} below {BETA_CUTOFF}")
    if alpha_metric is None:
        alpha_metric = hermitian_metric(data.a, data.domain)
    G_a = local_geometry(alpha_metric, point).G
    eta = point.eta
    alpha, beta, ab = t.alpha, t.beta, abs(t.beta)
    Lt = (alpha + ab) ** 2
    gamma = Lt + alpha ** 2 * (t.normb2 - 1)
    xi = np.conj(beta) * eta + alpha ** 2 * t.bup
    lbar = t.a.T @ eta
    bracket = t.dzb_up_bar @ lbar - (beta ** 2 / ab ** 2) * (t.dz_bbar @ eta.conj())  # [j]
    term1 = (bracket @ eta) * xi / (2 * gamma)
    bupbar = t.bup.conj()
    k = (2 * alpha * t.H
         + (2 * (alpha * t.normb2 + 2 * ab) / gamma) * np.outer(eta.conj(), eta)
         - (2 * alpha ** 3 / gamma) * np.outer(bupbar, t.bup)
         - (2 * alpha / gamma) * (np.conj(beta) * np.outer(bupbar, eta) + beta * np.outer(eta.conj(), t.bup)))
    # k[r, i] = k^{rbar i}
    v = eta @ t.dz_bbar  # [r] = d b_rbar/dz^j eta^j
    term2 = (beta / (4 * ab)) * (v @ k)
    return G_a + term1 + term2


# ---------------------------------------------------------------- registry


BUILTINS: dict[str, Callable[..., MetricExpr]] = {
    "euclidean": lambda dim=2, **_: euclidean(int(dim)),
    "disk": lambda dim=2, eps=-1.0, **_: disk_metric(int(dim), float(eps)),
    "hartogs-alpha": lambda **_: hartogs_alpha(),
    "hartogs-randers": lambda **_: hartogs_randers(),
    "randers-z2": lambda dim=2, **_: randers_z2(int(dim)),
}


def parse_builtin(text: str) -> tuple[str, dict]:
    """``"disk:eps=-1,dim=2"`` -> ``("disk", {"eps": "-1", "dim": "2"})``."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise PreconditionViolation(f"malformed parameter {item!r} in {text!r}")
        params[key.strip()] = value.strip()
    return name.strip(), params


def builtin(text: str, **defaults) -> MetricExpr:
    name, params = parse_builtin(text)
    if name not in BUILTINS:
        raise PreconditionViolation(f"unknown builtin metric {name!r}; known: {', '.join(sorted(BUILTINS))}")
    merged = {**{k: v for k, v in defaults.items() if v is not None}, **params}
    return BUILTINS[name](**merged)
