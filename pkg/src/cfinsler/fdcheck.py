"""Finite-difference oracle for jet coefficients.

Two independent routes are provided:

* :func:`fd_check` estimates one mixed Wirtinger partial by nested central
  differences on real coordinates, evaluated in extended precision (mpmath),
  with one Richardson halving.  Slow but fully independent of the jet engine.
* :func:`fd_sweep` checks every coefficient of a jet at once: each order-k
  coefficient must equal the central difference (float64, Richardson) of the
  matching order-(k-1) coefficient of jets taken at shifted points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import DomainViolation
from .expr import Backend, evaluate
from .jet import WirtingerPoint, evaluate_jet, multi_index

_SLOTS = ("z", "zbar", "eta", "etabar")
# d/dz = (d/dx - i d/dy)/2, d/dzbar = (d/dx + i d/dy)/2
_WIRTINGER = {"z": (0.5, -0.5j), "zbar": (0.5, 0.5j), "eta": (0.5, -0.5j), "etabar": (0.5, 0.5j)}
_BASEFAM = {"z": "z", "zbar": "z", "eta": "eta", "etabar": "eta"}

MP_BACKEND = Backend(mpmath.sqrt, mpmath.log, lambda x, p: x ** p)


def _factors(n, index):
    if len(index) and not isinstance(index[0], (int, np.integer)):
        index = multi_index(n, *index)
    out = []
    for slot, count in enumerate(index):
        fam, k = _SLOTS[slot // n], slot % n
        out.extend([(fam, k)] * int(count))
    return out


def _mp_env(z, eta):
    env = {}
    for k in range(len(z)):
        env[("z", k)] = z[k]
        env[("zbar", k)] = mpmath.conj(z[k])
        env[("eta", k)] = eta[k]
        env[("etabar", k)] = mpmath.conj(eta[k])
    return env


def fd_check(expr, point: WirtingerPoint, index, step: float = 1e-5, which: str = "L",
             dps: int = 40) -> complex:
    """Central-difference estimate of the raw partial ``index`` of L (or of the body).

    ``index`` is an exponent tuple over the 4n slots or a list of ``(family, k)`` pairs.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    n = expr.dim
    if point.dim != n:
        raise DomainViolation(f"point has dimension {point.dim}, metric has {n}")
    if not expr.domain.contains(point.z, margin=4 * step):
        raise DomainViolation(f"stencil of width {4 * step:g} leaves {expr.domain}")
    factors = _factors(n, index)
    square = which == "L" and expr.form == "F"

    with mpmath.workdps(dps):
        z0 = [mpmath.mpc(complex(c)) for c in point.z]
        e0 = [mpmath.mpc(complex(c)) for c in point.eta]

        def f(shift):
            z = list(z0)
            e = list(e0)
            for (fam, k, part), delta in shift.items():
                d = delta if part == 0 else mpmath.mpc(0, delta)
                if fam == "z":
                    z[k] += d
                else:
                    e[k] += d
            v = evaluate(expr.body, _mp_env(z, e), MP_BACKEND)
            return v * v if square else v

        # expand the product of Wirtinger operators into real partials
        terms = [(mpmath.mpc(1), ())]
        for fam, k in factors:
            cx, cy = _WIRTINGER[fam]
            base = _BASEFAM[fam]
            terms = [(c * w, coords + ((base, k, part),))
                     for c, coords in terms for w, part in ((cx, 0), (cy, 1))]

        def nested(h):
            h = mpmath.mpf(h)
            total = mpmath.mpc(0)
            for c, coords in terms:
                acc = mpmath.mpc(0)
                for signs in itertools.product((1, -1), repeat=len(coords)):
                    shift = {}
                    for s, key in zip(signs, coords):
                        shift[key] = shift.get(key, 0) + s * h
                    acc += int(np.prod(signs)) * f(shift)
                total += c * acc / (2 * h) ** len(coords)
            return total

        d1 = nested(step)
        d2 = nested(step / 2)
        est = (4 * d2 - d1) / 3
        return complex(est)


@dataclass
class SweepResult:
    max_rel_error: float
    checked: int
    worst: tuple
    value_error: float


def _real_shift(point, slot_fam, k, part, h):
    z = point.z.copy()
    e = point.eta.copy()
    d = h if part == 0 else 1j * h
    if slot_fam == "z":
        z[k] += d
    else:
        e[k] += d
    return WirtingerPoint(z, e)


def fd_sweep(expr, point: WirtingerPoint, step: float = 1e-3, fiber_order: int = 3,
             base_order: int = 1) -> SweepResult:
    """Check every admitted coefficient of the jet of L at ``point`` by differencing lower-order
    coefficients; also compares the zeroth coefficient with plain evaluation."""
    jet = evaluate_jet(expr, point, fiber_order, base_order)
    iset = jet.iset
    n = iset.n
    raw = jet.raw()
    value_err = abs(raw[0] - expr.L(point)) / max(1.0, abs(raw[0]))

    # derivatives of all raw coefficients along each real direction
    deriv = {}
    for fam in ("z", "eta"):
        for k in range(n):
            for part in (0, 1):
                vals = {}
                for h in (step, step / 2):
                    plus = evaluate_jet(expr, _real_shift(point, fam, k, part, h), fiber_order, base_order).raw()
                    minus = evaluate_jet(expr, _real_shift(point, fam, k, part, -h), fiber_order, base_order).raw()
                    vals[h] = (plus - minus) / (2 * h)
                deriv[(fam, k, part)] = (4 * vals[step / 2] - vals[step]) / 3

    worst, worst_at, checked = 0.0, None, 0
    for idx, mono in enumerate(iset.monomials):
        if idx == 0:
            continue
        for slot, count in enumerate(mono):
            if count == 0:
                continue
            fam, k = _SLOTS[slot // n], slot % n
            lower = list(mono)
            lower[slot] -= 1
            j = iset.index[tuple(lower)]
            cx, cy = _WIRTINGER[fam]
            base = _BASEFAM[fam]
            fd = cx * deriv[(base, k, 0)][j] + cy * deriv[(base, k, 1)][j]
            err = abs(raw[idx] - fd) / max(1.0, abs(fd))
            checked += 1
            if err > worst:
                worst, worst_at = err, mono
    return SweepResult(float(worst), checked, worst_at, float(value_err))
