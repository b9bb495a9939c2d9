"""Truncated Taylor jets in the Wirtinger variables (z, zbar, eta, etabar).

A jet is the truncated multivariate Taylor expansion of a function at a
point, where each holomorphic variable and its conjugate are independent
directions.  Coefficients are stored internally as Taylor coefficients
(partial derivative divided by the multi-index factorial); :func:`partial`
and :meth:`Jet.raw` hand out raw partial derivatives, which is the only
convention visible outside this module.

The admitted monomials form a down-closed set described by two caps: the
total fiber degree (eta and etabar together) and the total base degree
(z and zbar together).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainViolation, JetDomainError, MissingIndex, UnsupportedOrder
from .expr import Backend, evaluate

# sqrt/log/1/u are guarded below this modulus
SINGULAR_GUARD = 1e-12

_FAMILY_SLOT = {"z": 0, "zbar": 1, "eta": 2, "etabar": 3}


@dataclass(frozen=True)
class WirtingerPoint:
    """Base coordinates ``z`` and fiber coordinates ``eta``; conjugates are implied."""

    z: np.ndarray
    eta: np.ndarray

    def __init__(self, z, eta):
        zz = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
        ee = np.atleast_1d(np.asarray(eta, dtype=complex)).copy()
        if zz.ndim != 1 or zz.shape != ee.shape or zz.size < 1:
            raise ValueError("z and eta must be 1-d vectors of equal length n >= 1")
        zz.setflags(write=False)
        ee.setflags(write=False)
        object.__setattr__(self, "z", zz)
        object.__setattr__(self, "eta", ee)

    @property
    def dim(self) -> int:
        return self.z.size

    def scaled(self, lam: complex) -> "WirtingerPoint":
        return WirtingerPoint(self.z, lam * self.eta)

    def env(self) -> dict:
        out = {}
        for k in range(self.dim):
            out[("z", k)] = complex(self.z[k])
            out[("zbar", k)] = complex(self.z[k]).conjugate()
            out[("eta", k)] = complex(self.eta[k])
            out[("etabar", k)] = complex(self.eta[k]).conjugate()
        return out


def var_slot(n: int, family: str, index: int) -> int:
    """Position of a variable in the 4n-long exponent vector."""
    if not 0 <= index < n:
        raise MissingIndex(f"{family}[{index + 1}] outside dimension {n}")
    return _FAMILY_SLOT[family] * n + index


def multi_index(n: int, *factors) -> tuple:
    """Exponent tuple from ``(family, index)`` pairs, e.g. ``("eta", 0), ("etabar", 0)``."""
    exps = [0] * (4 * n)
    for family, index in factors:
        exps[var_slot(n, family, index)] += 1
    return tuple(exps)


def mirror_index(n: int, exps: Sequence[int]) -> tuple:
    e = list(exps)
    return tuple(e[n:2 * n] + e[:n] + e[3 * n:] + e[2 * n:3 * n])


def _spray_shape(n, m):
    """Down-closed set carrying exactly what the spray and theta* need."""
    dz, dzb = sum(m[:n]), sum(m[n:2 * n])
    de, deb = sum(m[2 * n:3 * n]), sum(m[3 * n:])
    if de > 2 or deb > 1:
        return False
    if dzb == 0:
        return dz <= 1
    return dz == 0 and dzb == 1 and de + deb == 0


SHAPES = {"full": None, "spray": _spray_shape}


class IndexSet:
    """Admitted monomials plus the precomputed truncated-product table.

    ``shape="spray"`` keeps only the down-closed subset needed for G and theta*,
    which makes geodesic right-hand sides several times cheaper.
    """

    def __init__(self, n: int, fiber_order: int = 3, base_order: int = 1, shape: str = "full"):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self.n = n
        self.fiber_order = fiber_order
        self.base_order = base_order
        self.shape = shape
        base = list(_monomials(2 * n, base_order))
        fiber = list(_monomials(2 * n, fiber_order))
        monos = [b + f for b in base for f in fiber]
        keep = SHAPES[shape]
        if keep is not None:
            monos = [m for m in monos if keep(n, m)]
        monos.sort(key=lambda m: (sum(m), tuple(-x for x in m)))
        self.monomials = monos
        self.index = {m: i for i, m in enumerate(monos)}
        self.size = len(monos)
        self.degree = np.array([sum(m) for m in monos])
        self.max_degree = int(self.degree.max())
        self.factorial = np.array(
            [float(np.prod([math.factorial(e) for e in m])) for m in monos]
        )
        ia, ib, ic = [], [], []
        for i, a in enumerate(monos):
            for j, b in enumerate(monos):
                c = tuple(x + y for x, y in zip(a, b))
                k = self.index.get(c)
                if k is not None:
                    ia.append(i)
                    ib.append(j)
                    ic.append(k)
        order = np.argsort(np.array(ic), kind="stable")
        self._ia = np.array(ia, dtype=np.intp)[order]
        self._ib = np.array(ib, dtype=np.intp)[order]
        self._ic = np.array(ic, dtype=np.intp)[order]
        # every monomial k appears at least as k * 1, so each segment is nonempty
        self._starts = np.searchsorted(self._ic, np.arange(len(monos)))
        mir = [self.index.get(mirror_index(n, m), -1) for m in monos]
        self.mirror = np.array(mir, dtype=np.intp)
        self.mirror_closed = bool(np.all(self.mirror >= 0))

    def admits(self, exps: Sequence[int]) -> bool:
        return tuple(exps) in self.index

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.add.reduceat(x[self._ia] * y[self._ib], self._starts)


def _monomials(nvars: int, max_deg: int):
    for deg in range(max_deg + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            yield tuple(e)


@lru_cache(maxsize=None)
def index_set(n: int, fiber_order: int = 3, base_order: int = 1, shape: str = "full") -> IndexSet:
    return IndexSet(n, fiber_order, base_order, shape)


class Jet:
    """Truncated Taylor expansion; supports +, -, *, / and analytic compositions."""

    __slots__ = ("iset", "c")
    __array_priority__ = 100

    def __init__(self, iset: IndexSet, coeffs: np.ndarray):
        self.iset = iset
        self.c = coeffs

    @classmethod
    def constant(cls, iset: IndexSet, value: complex) -> "Jet":
        c = np.zeros(iset.size, dtype=complex)
        c[0] = value
        return cls(iset, c)

    @classmethod
    def variable(cls, iset: IndexSet, family: str, index: int, value: complex) -> "Jet":
        c = np.zeros(iset.size, dtype=complex)
        c[0] = value
        e = [0] * (4 * iset.n)
        e[var_slot(iset.n, family, index)] = 1
        k = iset.index.get(tuple(e))
        if k is not None:
            c[k] = 1.0
        return cls(iset, c)

    @property
    def value(self) -> complex:
        return complex(self.c[0])

    def _lift(self, other):
        if isinstance(other, Jet):
            return other.c
        return None

    def __add__(self, other):
        oc = self._lift(other)
        if oc is not None:
            return Jet(self.iset, self.c + oc)
        c = self.c.copy()
        c[0] += other
        return Jet(self.iset, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.iset, -self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        oc = self._lift(other)
        if oc is not None:
            return Jet(self.iset, self.iset.mul(self.c, oc))
        return Jet(self.iset, self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.iset, self.c / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p: int):
        if not isinstance(p, (int, np.integer)):
            raise TypeError("jets support integer powers only")
        if p < 0:
            return (self ** (-p)).reciprocal()
        result = Jet.constant(self.iset, 1.0)
        base = self
        while p:
            if p & 1:
                result = result * base
            p >>= 1
            if p:
                base = base * base
        return result

    def compose(self, derivs: Sequence[complex]) -> "Jet":
        """Apply f given ``derivs[m] = f^(m)(value)``; exact because the nilpotent part
        vanishes beyond ``max_degree``."""
        K = self.iset.max_degree
        h = Jet(self.iset, self.c.copy())
        h.c[0] = 0.0
        acc = Jet.constant(self.iset, derivs[K] / math.factorial(K))
        for m in range(K - 1, -1, -1):
            acc = acc * h
            acc.c[0] += derivs[m] / math.factorial(m)
        return acc

    def _guard(self, what: str):
        if abs(self.c[0]) <= SINGULAR_GUARD:
            raise JetDomainError(f"{what} evaluated at |u| = {abs(self.c[0]):.3e} <= {SINGULAR_GUARD}")

    def reciprocal(self) -> "Jet":
        self._guard("1/u")
        u = complex(self.c[0])
        K = self.iset.max_degree
        return self.compose([(-1) ** m * math.factorial(m) / u ** (m + 1) for m in range(K + 1)])

    def sqrt(self) -> "Jet":
        self._guard("sqrt")
        u = complex(self.c[0])
        K = self.iset.max_degree
        derivs = []
        coef = 1.0
        for m in range(K + 1):
            derivs.append(coef * u ** (0.5 - m))
            coef *= 0.5 - m
        return self.compose(derivs)

    def log(self) -> "Jet":
        self._guard("log")
        u = complex(self.c[0])
        K = self.iset.max_degree
        derivs = [np.log(u)] + [(-1) ** (m - 1) * math.factorial(m - 1) / u ** m for m in range(1, K + 1)]
        return self.compose(derivs)

    def conj(self) -> "Jet":
        if not self.iset.mirror_closed:
            raise UnsupportedOrder("conjugation needs a mirror-closed index set")
        return Jet(self.iset, np.conj(self.c[self.iset.mirror]))

    def raw(self) -> np.ndarray:
        """All coefficients as raw partial derivatives."""
        return self.c * self.iset.factorial

    def __repr__(self):
        return f"Jet(n={self.iset.n}, value={self.value:.6g}, size={self.iset.size})"


def _jsqrt(x):
    if isinstance(x, Jet):
        return x.sqrt()
    if abs(x) <= SINGULAR_GUARD:
        raise JetDomainError(f"sqrt evaluated at |u| = {abs(x):.3e}")
    return complex(x) ** 0.5


def _jlog(x):
    if isinstance(x, Jet):
        return x.log()
    if abs(x) <= SINGULAR_GUARD:
        raise JetDomainError(f"log evaluated at |u| = {abs(x):.3e}")
    return complex(np.log(complex(x)))


JET_BACKEND = Backend(_jsqrt, _jlog)


def seed_env(iset: IndexSet, point: WirtingerPoint, families: Iterable[str] = ("z", "zbar", "eta", "etabar")) -> dict:
    env = {}
    for (family, k), value in point.env().items():
        if family in families:
            env[(family, k)] = Jet.variable(iset, family, k, value)
    return env


def jet_of(body, point: WirtingerPoint, iset: IndexSet) -> Jet:
    """Jet of an expression tree at ``point`` (no domain checking)."""
    out = evaluate(body, seed_env(iset, point), JET_BACKEND)
    if not isinstance(out, Jet):
        out = Jet.constant(iset, out)
    return out


def evaluate_jet(expr, point: WirtingerPoint, fiber_order: int = 3, base_order: int = 1,
                 which: str = "L", shape: str = "full") -> Jet:
    """Jet of a metric at ``point``.

    ``which="L"`` gives the jet of L = F^2 regardless of the metric's form;
    ``which="body"`` gives the jet of the stored body (F for F-form metrics).
    """
    if fiber_order > 3 or base_order > 2 or fiber_order < 0 or base_order < 0:
        raise UnsupportedOrder(f"fiber order {fiber_order}, base order {base_order} exceeds the jet engine's caps")
    if point.dim != expr.dim:
        raise DomainViolation(f"point has dimension {point.dim}, metric has {expr.dim}")
    expr.check_point(point)
    iset = index_set(expr.dim, fiber_order, base_order, shape)
    j = jet_of(expr.body, point, iset)
    if which == "L" and expr.form == "F":
        j = j * j
    return j


def partial(jet: Jet, index) -> complex:
    """Raw partial derivative at ``index`` (exponent tuple or ``(family, k)`` pairs)."""
    n = jet.iset.n
    if not len(index) or not isinstance(index[0], (int, np.integer)):
        index = multi_index(n, *index)
    k = jet.iset.index.get(tuple(index))
    if k is None:
        raise MissingIndex(f"multi-index {tuple(index)} not in the jet's index set")
    return complex(jet.c[k] * jet.iset.factorial[k])


class DenseDerivatives:
    """Raw partials of one jet arranged by variable slots, for tensor contractions.

    Slots: ``Z`` (z), ``ZB`` (zbar), ``E`` (eta), ``EB`` (etabar).  ``d(*blocks)``
    returns the dense array of raw partials over the named blocks; entries not
    admitted by the index set raise instead of silently reading zero.
    """

    def __init__(self, jet: Jet):
        self.jet = jet
        self.n = jet.iset.n
        self.raw = jet.raw()
        self._cache = {}

    def d(self, *blocks: str) -> np.ndarray:
        out = self._cache.get(blocks)
        if out is None:
            out = self.raw[_block_index(self.jet.iset, blocks)]
            self._cache[blocks] = out
        return out


def _block_index(iset: IndexSet, blocks: tuple) -> np.ndarray:
    cache = iset.__dict__.setdefault("_block_cache", {})
    idx = cache.get(blocks)
    if idx is not None:
        return idx
    n = iset.n
    offsets = {"Z": 0, "ZB": n, "E": 2 * n, "EB": 3 * n}
    idx = np.empty((n,) * len(blocks), dtype=np.intp)
    for pos in itertools.product(range(n), repeat=len(blocks)):
        e = [0] * (4 * n)
        for b, p in zip(blocks, pos):
            e[offsets[b] + p] += 1
        k = iset.index.get(tuple(e))
        if k is None:
            raise UnsupportedOrder(f"partial over blocks {blocks} not admitted by the index set")
        idx[pos] = k
    cache[blocks] = idx
    return idx
