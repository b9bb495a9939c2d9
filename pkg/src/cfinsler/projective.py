"""Projective relatedness of metric pairs via residual identities.

A pair (L, Lt) is evaluated sample by sample.  The horizontal derivative
``delta_k`` always uses the Chern-Finsler connection of the first metric L.
The projective factor P and the drift B are recovered from closed forms and
every residual is reported relative to ``max(1, |terms involved|)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import SamplePlan, classify, local_geometry
from .errors import CFinslerError, DegenerateSample, PreconditionViolation
from .jet import WirtingerPoint
from .zoo import (BETA_CUTOFF, MetricExpr, RandersData, euclidean, hermitian_metric,
                  randers_closed_form_term, randers_tensors)

L_FLOOR = 1e-12
SCALING_PROBES = (2.0, 1 + 1j, 0.5j)
FD_STEP = 1e-3


def _rel(res, *refs) -> float:
    scale = 1.0
    for r in refs:
        scale = max(scale, float(np.max(np.abs(r))))
    return float(np.max(np.abs(res))) / scale


@dataclass
class PairTerms:
    """Quantities shared by all projective conditions at one sample."""

    Lt: float
    dLt: np.ndarray        # d Lt / d eta^l
    dLt_bar: np.ndarray    # d Lt / d etabar^r
    delta_eta: complex     # (delta_k Lt) eta^k
    X: np.ndarray          # d/detabar^r (delta_k Lt) eta^k
    Y: np.ndarray          # X_r + 2 (d G^l / detabar^r) d Lt / d eta^l
    theta: np.ndarray
    theta_t: np.ndarray
    G: np.ndarray
    Gt: np.ndarray
    gt: np.ndarray
    gt_inv: np.ndarray
    Gbar: np.ndarray
    Gbar_t: np.ndarray
    dzLt: np.ndarray

    @property
    def Ft(self) -> float:
        return float(np.sqrt(self.Lt))


def pair_terms(L_expr, Lt_expr, point: WirtingerPoint) -> PairTerms:
    geo = local_geometry(L_expr, point)
    geot = local_geometry(Lt_expr, point)
    Lt = float(np.real(geot.L))
    if Lt < L_FLOOR:
        raise DegenerateSample(f"Lt = {Lt:.3e} below {L_FLOOR}")
    eta = point.eta
    N = geo.conn.N
    Neta = N @ eta
    delta_eta = eta @ geot.dzL - Neta @ geot.dL
    X = (eta @ geot.dz_dbarL
         - np.einsum("rlk,k,l->r", geo.dN_etabar, eta, geot.dL)
         - Neta @ geot.g.entries)
    Y = X + 2 * geot.dL @ geo.conn.Gbar_sensitivity
    return PairTerms(Lt, geot.dL, geot.dLbar, complex(delta_eta), X, Y, geo.theta, geot.theta,
                     geo.G, geot.G, geot.g.entries, geot.g.inverse, geo.conn.Gbar_sensitivity,
                     geot.conn.Gbar_sensitivity, geot.dzL)


def spray_difference_residual(L_expr, Lt_expr, point: WirtingerPoint) -> np.ndarray:
    """Gt - G - 1/2 gt^{rbar i} Y_r; vanishes for every pair of metrics."""
    t = pair_terms(L_expr, Lt_expr, point)
    return t.Gt - t.G - 0.5 * t.Y @ t.gt_inv


def spray_difference_relative(L_expr, Lt_expr, point: WirtingerPoint) -> float:
    t = pair_terms(L_expr, Lt_expr, point)
    rhs = 0.5 * t.Y @ t.gt_inv
    return _rel(t.Gt - t.G - rhs, t.Gt, t.G, rhs)


def recovered_P(t: PairTerms) -> complex:
    return (t.delta_eta + t.theta @ t.dLt) / (2 * t.Lt)


def _P_at(L_expr, Lt_expr, point) -> complex:
    return recovered_P(pair_terms(L_expr, Lt_expr, point))


def homogeneity_type(L_expr, Lt_expr, point, P, tol) -> dict:
    """Scaling probes of the recovered P: (1,0) means P(l eta) = l P, (0,1) means conj(l) P."""
    d10 = d01 = 0.0
    for lam in SCALING_PROBES:
        Pl = _P_at(L_expr, Lt_expr, point.scaled(lam))
        s = max(1.0, abs(Pl), abs(lam * P))
        d10 = max(d10, abs(Pl - lam * P) / s)
        d01 = max(d01, abs(Pl - np.conj(lam) * P) / s)
    return {"P_10_defect": d10, "P_01_defect": d01, "P_10": d10 < tol, "P_01": d01 < tol}


def S_and_Q(L_expr, Lt_expr, point) -> tuple[complex, complex]:
    """S = (d P/d eta^k) eta^k and Q = -(d P/d etabar^k) etabar^k from differences of P
    along the real dilation t -> e^t eta and the rotation th -> e^{i th} eta."""

    def deriv(kind):
        vals = []
        for h in (FD_STEP, FD_STEP / 2):
            f = (lambda s: np.exp(s)) if kind == "dil" else (lambda s: np.exp(1j * s))
            p = _P_at(L_expr, Lt_expr, point.scaled(f(h)))
            m = _P_at(L_expr, Lt_expr, point.scaled(f(-h)))
            vals.append((p - m) / (2 * h))
        return (4 * vals[1] - vals[0]) / 3

    A = deriv("dil")   # S - Q
    R = deriv("rot")   # i (S + Q)
    S = 0.5 * (A - 1j * R)
    Q = 0.5 * (-1j * R - A)
    return complex(S), complex(Q)


@dataclass
class ProjectiveSample:
    index: int
    point: WirtingerPoint
    P: complex
    S: complex | None
    Q: complex | None
    B: np.ndarray
    rapcsak_residual: np.ndarray
    change_residual: np.ndarray
    residuals: dict = field(default_factory=dict)

    def row(self) -> dict:
        def c(x):
            return None if x is None else [float(np.real(x)), float(np.imag(x))]

        return {"index": self.index,
                "z": [c(v) for v in self.point.z], "eta": [c(v) for v in self.point.eta],
                "P": c(self.P), "S": c(self.S), "Q": c(self.Q),
                "B": [c(v) for v in self.B],
                "residuals": {k: float(v) for k, v in sorted(self.residuals.items())}}


@dataclass
class ProjectiveReport:
    check: str
    metrics: list
    verdict: bool
    tolerance: float
    conditions: dict            # name -> max relative residual (gates the verdict)
    diagnostics: dict = field(default_factory=dict)  # reported, not gating
    flags: dict = field(default_factory=dict)
    samples: list = field(default_factory=list)
    skipped: int = 0
    failures: list = field(default_factory=list)
    domain: str = ""

    def max_residual(self) -> float:
        return max(self.conditions.values(), default=0.0)


def _aggregate(rows, keys):
    return {k: max((r[k] for r in rows), default=float("nan")) for k in keys}


def _verdict(conditions, tol):
    return bool(conditions) and all(np.isfinite(v) and v < tol for v in conditions.values())


def _draw(sampler, metrics):
    sampler = sampler or SamplePlan()
    pts, skipped = sampler.draw(list(metrics))
    return pts, skipped


def _probe_extras(L_expr, Lt_expr, sample, tol, gen_berwald):
    """Closure, scaling type of P, and the generalized-Berwald probes."""
    p = sample.point
    S, Q = S_and_Q(L_expr, Lt_expr, p)
    sample.S, sample.Q = S, Q
    r = sample.residuals
    r["closure"] = abs(S - Q - sample.P) / max(1.0, abs(sample.P), abs(S), abs(Q))
    h = homogeneity_type(L_expr, Lt_expr, p, sample.P, tol)
    r["P_10_defect"] = h["P_10_defect"]
    r["P_01_defect"] = h["P_01_defect"]
    if gen_berwald and h["P_10"]:
        r["dbar_P"] = _dbar_P(L_expr, Lt_expr, p)
    if gen_berwald and h["P_01"]:
        t = pair_terms(L_expr, Lt_expr, p)
        r["berwald_G_gap"] = _rel(t.Gt - t.G, t.Gt, t.G)
        r["berwald_B_plus_Peta"] = _rel(sample.B + sample.P * p.eta, sample.B, sample.P * p.eta)


def _dbar_P(L_expr, Lt_expr, point) -> float:
    """max_r |dP/detabar^r| by central differences on the real and imaginary parts of eta^r."""
    out = 0.0
    P0 = _P_at(L_expr, Lt_expr, point)
    for r in range(point.dim):
        parts = []
        for d in (1.0, 1j):
            vals = []
            for h in (FD_STEP, FD_STEP / 2):
                e = np.zeros(point.dim, complex)
                e[r] = d * h
                fp = _P_at(L_expr, Lt_expr, WirtingerPoint(point.z, point.eta + e))
                fm = _P_at(L_expr, Lt_expr, WirtingerPoint(point.z, point.eta - e))
                vals.append((fp - fm) / (2 * h))
            parts.append((4 * vals[1] - vals[0]) / 3)
        dbar = 0.5 * (parts[0] + 1j * parts[1])
        out = max(out, abs(dbar) / max(1.0, abs(P0)))
    return out


def _diag_max(samples, key):
    vals = [s.residuals[key] for s in samples if key in s.residuals]
    return max(vals) if vals else None


def rapcsak_check(L_expr, Lt_expr, sampler: SamplePlan | None = None, tol: float = 1e-7,
                  probe_samples: int = 4) -> ProjectiveReport:
    """Three-part residual test (a) drift-free identity, (b) B formula, (c) P formula, plus the
    projective-change form Gt = G + B + P eta."""
    pts, skipped = _draw(sampler, [L_expr, Lt_expr])
    gen_berwald = classify(L_expr, points=pts[:probe_samples], tol=tol).generalized_berwald if pts else False
    samples, failures = [], []
    for idx, p in enumerate(pts):
        try:
            t = pair_terms(L_expr, Lt_expr, p)
        except CFinslerError as exc:
            failures.append({"index": idx, **exc.record()})
            continue
        P = recovered_P(t)
        B = 0.5 * (t.theta_t - t.theta)
        rhs_a = t.delta_eta * t.dLt_bar / t.Lt
        res_a = t.Y - rhs_a
        B_formula = -(t.theta @ t.dLt) / (2 * t.Lt) * p.eta
        change = t.Gt - t.G - B - P * p.eta
        res13 = 0.5 * t.Y - P * t.dLt_bar - B @ t.gt
        P_proj = np.vdot(p.eta, t.Gt - t.G - B) / np.vdot(p.eta, p.eta)
        s = ProjectiveSample(idx, p, complex(P), None, None, B, res_a, change)
        s.residuals = {
            "a_identity": _rel(res_a, t.Y, rhs_a),
            "b_drift": _rel(B - B_formula, B, B_formula),
            "projective_change": _rel(change, t.Gt, t.G, B, P * p.eta),
            "pb_identity": _rel(res13, 0.5 * t.Y, P * t.dLt_bar),
            "P_projection_gap": abs(P_proj - P) / max(1.0, abs(P), abs(P_proj)),
        }
        samples.append(s)
    for s in samples[:probe_samples]:
        _probe_extras(L_expr, Lt_expr, s, tol, gen_berwald)
    conditions = _aggregate([s.residuals for s in samples], ["a_identity", "b_drift", "projective_change"])
    verdict = _verdict(conditions, tol) and not failures
    diagnostics = {"pb_identity": _diag_max(samples, "pb_identity"),
                   "P_projection_gap": _diag_max(samples, "P_projection_gap")}
    _fill_probe_diagnostics(diagnostics, samples, verdict, gen_berwald, tol)
    return ProjectiveReport("rapcsak", [L_expr.name, Lt_expr.name], verdict, tol, conditions, diagnostics,
                            {"L_generalized_berwald": gen_berwald}, samples, skipped, failures,
                            _domain_text(L_expr, Lt_expr))


def _fill_probe_diagnostics(diagnostics, samples, verdict, gen_berwald, tol):
    for key in ("closure", "P_10_defect", "P_01_defect", "dbar_P", "berwald_G_gap", "berwald_B_plus_Peta"):
        diagnostics[key] = _diag_max(samples, key)
    if verdict and diagnostics["closure"] is not None:
        diagnostics["closure_holds"] = diagnostics["closure"] < max(tol, 1e-6)


def _domain_text(*metrics):
    d = metrics[0].domain
    for m in metrics[1:]:
        d = d.intersect(m.domain)
    return d.describe()


def weakly_kahler_projective_check(L_expr, Lt_expr, sampler: SamplePlan | None = None,
                                   tol: float = 1e-7) -> ProjectiveReport:
    """Pair test when L is weakly Kähler: Lt must be weakly Kähler and the drift-free identity
    must hold with P = (delta_k Lt) eta^k / (2 Lt); the change is then Gt = G + P eta."""
    pts, skipped = _draw(sampler, [L_expr, Lt_expr])
    pre = classify(L_expr, points=pts, tol=tol)
    if not pre.weakly_kahler:
        raise PreconditionViolation(f"{L_expr.name} is not weakly Kähler "
                                    f"(residual {pre.weakly_kahler_residual:.2e})")
    samples, failures = [], []
    for idx, p in enumerate(pts):
        try:
            t = pair_terms(L_expr, Lt_expr, p)
        except CFinslerError as exc:
            failures.append({"index": idx, **exc.record()})
            continue
        P = t.delta_eta / (2 * t.Lt)
        rhs = 2 * P * t.dLt_bar
        change = t.Gt - t.G - P * p.eta
        s = ProjectiveSample(idx, p, complex(P), None, None, np.zeros(p.dim, complex), t.Y - rhs, change)
        d10 = 0.0
        for lam in (2.0, 1j):
            tl = pair_terms(L_expr, Lt_expr, p.scaled(lam))
            Pl = tl.delta_eta / (2 * tl.Lt)
            d10 = max(d10, abs(Pl - lam * P) / max(1.0, abs(Pl)))
        s.residuals = {
            "theta_tilde": _rel(t.theta_t, t.Gt, t.Lt),
            "weak_kahler_identity": _rel(t.Y - rhs, t.Y, rhs),
            "change": _rel(change, t.Gt, t.G, P * p.eta),
            "P_10_defect": d10,
        }
        samples.append(s)
    conditions = _aggregate([s.residuals for s in samples], ["theta_tilde", "weak_kahler_identity", "change"])
    verdict = _verdict(conditions, tol) and not failures
    diagnostics = {"P_10_defect": _diag_max(samples, "P_10_defect")}
    if verdict:
        diagnostics["P_homogeneous_10"] = diagnostics["P_10_defect"] < tol
    return ProjectiveReport("weakly-kahler", [L_expr.name, Lt_expr.name], verdict, tol, conditions, diagnostics,
                            {"L_weakly_kahler": True}, samples, skipped, failures, _domain_text(L_expr, Lt_expr))


def _F_terms(t: PairTerms):
    """F-form versions of the pair quantities, Ft = sqrt(Lt)."""
    Ft = t.Ft
    dF_eta = t.delta_eta / (2 * Ft)            # (delta_k Ft) eta^k
    dFbar = t.dLt_bar / (2 * Ft)               # d Ft / d etabar^r
    dF = t.dLt / (2 * Ft)                      # d Ft / d eta^l
    Z = t.X / (2 * Ft) - t.delta_eta * dFbar / (2 * Ft ** 2)  # d/detabar^r (delta_k Ft) eta^k
    return Ft, dF_eta, dF, dFbar, Z


def berwald_projective_check(F_expr, Ft_expr, sampler: SamplePlan | None = None,
                             tol: float = 1e-7, probe_samples: int = 4) -> ProjectiveReport:
    """Pair test when F is generalized Berwald, in F-form; on a positive verdict the generalized
    Berwald property of Ft is checked as the expected conclusion."""
    pts, skipped = _draw(sampler, [F_expr, Ft_expr])
    pre = classify(F_expr, points=pts, tol=tol)
    if not pre.generalized_berwald:
        raise PreconditionViolation(f"{F_expr.name} is not generalized Berwald "
                                    f"(residual {pre.gen_berwald_residual:.2e})")
    samples, failures = [], []
    for idx, p in enumerate(pts):
        try:
            t = pair_terms(F_expr, Ft_expr, p)
        except CFinslerError as exc:
            failures.append({"index": idx, **exc.record()})
            continue
        Ft, dF_eta, dF, dFbar, Z = _F_terms(t)
        rhs = dF_eta * dFbar / Ft
        B = 0.5 * (t.theta_t - t.theta)
        B_formula = -(t.theta @ dF) / Ft * p.eta
        P = (dF_eta + t.theta @ dF) / Ft
        change = t.Gt - t.G - dF_eta / Ft * p.eta
        s = ProjectiveSample(idx, p, complex(P), None, None, B, Z - rhs, change)
        s.residuals = {
            "berwald_identity": _rel(Z - rhs, Z, rhs),
            "b_drift": _rel(B - B_formula, B, B_formula),
            "change": _rel(change, t.Gt, t.G),
            "Gt_dbar": _rel(t.Gbar_t, t.Gt),
        }
        if pre.kahler:
            P2 = dF_eta / Ft
            s.residuals["kahler_F_identity"] = _rel(Z - P2 * dFbar, Z, P2 * dFbar)
            s.residuals["kahler_theta_tilde"] = _rel(t.theta_t, t.Gt, t.Lt)
        samples.append(s)
    for s in samples[:probe_samples]:
        _probe_extras(F_expr, Ft_expr, s, tol, True)
    conditions = _aggregate([s.residuals for s in samples], ["berwald_identity", "b_drift", "change"])
    verdict = _verdict(conditions, tol) and not failures
    diagnostics = {"Gt_dbar": _diag_max(samples, "Gt_dbar"),
                   "kahler_F_identity": _diag_max(samples, "kahler_F_identity"),
                   "kahler_theta_tilde": _diag_max(samples, "kahler_theta_tilde")}
    _fill_probe_diagnostics(diagnostics, samples, verdict, True, tol)
    flags = {"F_generalized_berwald": True, "F_kahler": pre.kahler}
    if verdict:
        flags["Ft_generalized_berwald"] = diagnostics["Gt_dbar"] < tol
    return ProjectiveReport("berwald", [F_expr.name, Ft_expr.name], verdict, tol, conditions, diagnostics,
                            flags, samples, skipped, failures, _domain_text(F_expr, Ft_expr))


def hilbert_check(Lt_expr, sampler: SamplePlan | None = None, tol: float = 1e-7) -> ProjectiveReport:
    """Is Lt projectively related to the Euclidean metric on its domain?  Tests theta*~ = 0 and
    Gt^i = (dLt/dz^k) eta^k eta^i / (2 Lt); on a positive verdict also the generalized
    Berwald conclusion."""
    E = euclidean(Lt_expr.dim)
    pts, skipped = _draw(sampler, [Lt_expr])
    samples, failures = [], []
    for idx, p in enumerate(pts):
        try:
            geot = local_geometry(Lt_expr, p)
        except CFinslerError as exc:
            failures.append({"index": idx, **exc.record()})
            continue
        Lt = float(np.real(geot.L))
        P = (p.eta @ geot.dzL) / (2 * Lt)
        change = geot.G - P * p.eta
        s = ProjectiveSample(idx, p, complex(P), None, None, np.zeros(p.dim, complex), change, change)
        s.residuals = {
            "theta_tilde": _rel(geot.theta, geot.G, Lt),
            "hilbert_spray": _rel(change, geot.G, P * p.eta),
            "Gt_dbar": _rel(geot.conn.Gbar_sensitivity, geot.G),
        }
        samples.append(s)
    conditions = _aggregate([s.residuals for s in samples], ["theta_tilde", "hilbert_spray"])
    verdict = _verdict(conditions, tol) and not failures
    diagnostics = {"Gt_dbar": _diag_max(samples, "Gt_dbar")}
    flags = {}
    if verdict:
        flags["generalized_berwald_conclusion"] = diagnostics["Gt_dbar"] < tol
    return ProjectiveReport("hilbert", [E.name, Lt_expr.name], verdict, tol, conditions, diagnostics, flags,
                            samples, skipped, failures, Lt_expr.domain.describe())


# ---------------------------------------------------------------- Randers


def _alpha_of(rd: RandersData) -> MetricExpr:
    return hermitian_metric(rd.a, rd.domain, "alpha")


def _gamma_term(rd: RandersData, point: WirtingerPoint) -> complex:
    """-(betabar/(2|beta|)) Gamma^k_{i jbar} b_k eta^i etabar^j with
    Gamma^k_{i jbar} = 1/2 a^{mbar k}(d a_{i mbar}/dzbar^j - d a_{i jbar}/dzbar^m)."""
    from .jet import DenseDerivatives, index_set, jet_of

    t = randers_tensors(rd, point)
    iset = index_set(rd.dim, 0, 1)
    dzbar_a = np.array([[DenseDerivatives(jet_of(e, point, iset)).d("ZB") for e in row] for row in rd.a])
    eta = point.eta
    # W[i, m, j] = d a_{i mbar}/dzbar^j - d a_{i jbar}/dzbar^m
    W = dzbar_a - dzbar_a.transpose(0, 2, 1)
    Gam = 0.5 * np.einsum("mk,imj->kij", t.H, W)
    val = np.einsum("kij,k,i,j->", Gam, t.b, eta, eta.conj())
    return -np.conj(t.beta) / (2 * abs(t.beta)) * val


def randers_projective_check(rd, sampler: SamplePlan | None = None, tol: float = 1e-7) -> ProjectiveReport:
    """Randers-specific checks: closed-form vs generic (delta_k |beta|) eta^k, the
    theta*-contraction formula, the generalized-Berwald criterion and the alpha/Ft theorem."""
    Ft = rd if isinstance(rd, MetricExpr) else None
    if Ft is None:
        from .zoo import randers
        Ft = randers(rd)
    data = Ft.randers
    if data is None:
        raise PreconditionViolation(f"{Ft.name} is not a Randers metric")
    alpha = _alpha_of(data)
    sampler = sampler or SamplePlan()
    pts, skipped = sampler.draw([alpha, Ft])
    cls_t = classify(Ft, points=pts, tol=tol)
    cls_a = classify(alpha, points=pts, tol=tol)
    rows, failures = [], []
    samples = []
    for idx, p in enumerate(pts):
        try:
            t = pair_terms(alpha, Ft, p)
        except CFinslerError as exc:
            failures.append({"index": idx, **exc.record()})
            continue
        Ftv, dF_eta, dF, dFbar, Z = _F_terms(t)
        r = {}
        if not data.is_zero:
            closed = randers_closed_form_term(data, p)
            r["beta_delta_gap"] = abs(closed - dF_eta) / max(1.0, abs(dF_eta), abs(closed))
            r["beta_delta"] = abs(dF_eta) / max(1.0, Ftv)
            generic_tb = t.theta @ dF
            closed_tb = _gamma_term(data, p)
            r["theta_beta_gap"] = abs(generic_tb - closed_tb) / max(1.0, abs(generic_tb), abs(closed_tb))
        else:
            r["beta_delta"] = abs(dF_eta) / max(1.0, Ftv)
        B = 0.5 * (t.theta_t - t.theta)
        P = (dF_eta + t.theta @ dF) / Ftv
        r["B_plus_Peta"] = _rel(B + P * p.eta, B, P * p.eta)
        r["Gt_minus_Ga"] = _rel(t.Gt - t.G, t.Gt, t.G)
        s = ProjectiveSample(idx, p, complex(P), None, None, B, Z - dF_eta * dFbar / Ftv, t.Gt - t.G - B - P * p.eta)
        s.residuals = r
        samples.append(s)
        rows.append(r)
    pair = berwald_projective_check(alpha, Ft, SamplePlan(len(pts), sampler.seed, sampler.shrink,
                                                          sampler.rmin, sampler.rmax), tol, probe_samples=0)
    gb = cls_t.generalized_berwald
    beta_delta_zero = max(r["beta_delta"] for r in rows) < tol if rows else False
    gb_consistent = gb == beta_delta_zero
    bp = max((r["B_plus_Peta"] for r in rows), default=float("nan"))
    berwald_pair_ok = pair.verdict == (gb and bp < tol)
    kahler_alpha_ok = (cls_a.kahler and pair.verdict) == cls_t.complex_berwald
    conditions = {"gen_berwald_consistency": 0.0 if gb_consistent else 1.0,
                  "berwald_pair_consistency": 0.0 if berwald_pair_ok else 1.0,
                  "kahler_alpha_consistency": 0.0 if kahler_alpha_ok else 1.0}
    if not data.is_zero:
        conditions["beta_delta_gap"] = max(r["beta_delta_gap"] for r in rows)
    diagnostics = {"beta_delta": max((r["beta_delta"] for r in rows), default=None),
                   "theta_beta_gap": max((r["theta_beta_gap"] for r in rows if "theta_beta_gap" in r), default=None),
                   "B_plus_Peta": bp,
                   "Gt_minus_Ga": max((r["Gt_minus_Ga"] for r in rows), default=None),
                   "pair_conditions": pair.conditions}
    flags = {"generalized_berwald": gb, "complex_berwald": cls_t.complex_berwald,
             "weakly_kahler": cls_t.weakly_kahler, "alpha_kahler": cls_a.kahler,
             "alpha_Ft_projective": pair.verdict}
    if cls_a.kahler and pair.verdict:
        flags["Gt_equals_Ga"] = diagnostics["Gt_minus_Ga"] < tol
    verdict = _verdict(conditions, tol) and not failures and flags.get("Gt_equals_Ga", True)
    return ProjectiveReport("randers", [alpha.name, Ft.name], verdict, tol, conditions, diagnostics, flags,
                            samples, skipped, failures, Ft.domain.describe())


def euclidean_randers_check(rd, sampler: SamplePlan | None = None, tol: float = 1e-7) -> ProjectiveReport:
    """(Euclidean ~ Ft) iff (Euclidean ~ alpha and Ft complex Berwald), both sides evaluated."""
    Ft = rd if isinstance(rd, MetricExpr) else None
    if Ft is None:
        from .zoo import randers
        Ft = randers(rd)
    data = Ft.randers
    if data is None:
        raise PreconditionViolation(f"{Ft.name} is not a Randers metric")
    alpha = _alpha_of(data)
    sampler = sampler or SamplePlan()
    E = euclidean(Ft.dim)
    lhs = rapcsak_check(E, Ft, sampler, tol, probe_samples=0)
    hil = hilbert_check(alpha, sampler, tol)
    cls = classify(Ft, sampler, tol)
    rhs = hil.verdict and cls.complex_berwald
    equivalence = lhs.verdict == rhs
    diagnostics = {"euclid_Ft_conditions": lhs.conditions, "hilbert_alpha_conditions": hil.conditions,
                   "hilbert_alpha_max_residual": hil.max_residual(),
                   "Ft_kahler_residual": cls.kahler_residual, "Ft_gen_berwald_residual": cls.gen_berwald_residual}
    if lhs.verdict and not data.is_zero:
        pts, _ = sampler.draw([alpha, Ft])
        worst = 0.0
        for p in pts:
            geo = local_geometry(alpha, p)
            tt = randers_tensors(data, p)
            a_alpha = float(np.sqrt(np.real(geo.L)))
            dz_alpha = (p.eta @ geo.dzL) / (2 * a_alpha)
            lhs_ab = geo.G @ tt.b
            rhs_ab = tt.beta / a_alpha * dz_alpha
            worst = max(worst, abs(lhs_ab - rhs_ab) / max(1.0, abs(lhs_ab), abs(rhs_ab)))
        diagnostics["alpha_beta_residual"] = worst
    flags = {"euclid_Ft_projective": lhs.verdict, "euclid_alpha_projective": hil.verdict,
             "Ft_complex_berwald": cls.complex_berwald, "equivalence_holds": equivalence}
    conditions = {"equivalence": 0.0 if equivalence else 1.0}
    if "alpha_beta_residual" in diagnostics:
        conditions["alpha_beta_residual"] = diagnostics["alpha_beta_residual"]
    return ProjectiveReport("randers-euclidean", [E.name, Ft.name], _verdict(conditions, tol), tol, conditions, diagnostics,
                            flags, [], lhs.skipped, lhs.failures + hil.failures, Ft.domain.describe())
