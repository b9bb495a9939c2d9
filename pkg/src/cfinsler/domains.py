"""Domain predicates for metrics, with seeded sampling of shrunk copies."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainViolation

HARTOGS_MARGIN = 1e-9


class Domain:
    dim: int

    def contains(self, z, margin: float = 0.0, shrink: float = 1.0) -> bool:
        raise NotImplementedError

    def sample_base(self, rng: np.random.Generator, shrink: float = 0.8) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def intersect(self, other: "Domain") -> "Domain":
        if other.dim != self.dim:
            raise DomainViolation(f"dimension mismatch: {self.dim} vs {other.dim}")
        if isinstance(other, Whole):
            return self
        if isinstance(self, Whole):
            return other
        if self == other:
            return self
        return Intersection(self, other)

    def __str__(self):
        return self.describe()


def _uniform_ball(rng, dim, radius):
    v = rng.normal(size=2 * dim)
    v /= np.linalg.norm(v)
    r = radius * rng.random() ** (1.0 / (2 * dim))
    x = r * v
    return x[:dim] + 1j * x[dim:]


@dataclass(frozen=True)
class Whole(Domain):
    """All of C^n; sampling uses the ball of radius ``shrink``."""

    dim: int

    def contains(self, z, margin=0.0, shrink=1.0):
        return bool(np.all(np.isfinite(z)))

    def sample_base(self, rng, shrink=0.8):
        return _uniform_ball(rng, self.dim, shrink)

    def describe(self):
        return "all"


@dataclass(frozen=True)
class Ball(Domain):
    dim: int
    radius: float
    center: tuple = field(default=None)

    def _c(self):
        return np.zeros(self.dim, complex) if self.center is None else np.asarray(self.center, complex)

    def contains(self, z, margin=0.0, shrink=1.0):
        return bool(np.linalg.norm(np.asarray(z) - self._c()) < shrink * self.radius - margin)

    def sample_base(self, rng, shrink=0.8):
        return self._c() + _uniform_ball(rng, self.dim, shrink * self.radius)

    def describe(self):
        if self.center is None:
            return f"ball({float(self.radius)!r})"
        c = ", ".join(_fmt_c(x) for x in self.center)
        return f"ball({float(self.radius)!r}; {c})"


@dataclass(frozen=True)
class Polydisc(Domain):
    radii: tuple

    @property
    def dim(self):
        return len(self.radii)

    def contains(self, z, margin=0.0, shrink=1.0):
        z = np.asarray(z)
        return bool(np.all(np.abs(z) < shrink * np.asarray(self.radii) - margin))

    def sample_base(self, rng, shrink=0.8):
        out = []
        for r in self.radii:
            rho = shrink * r * np.sqrt(rng.random())
            out.append(rho * np.exp(2j * np.pi * rng.random()))
        return np.array(out)

    def describe(self):
        return "polydisc(" + ", ".join(repr(float(r)) for r in self.radii) + ")"


@dataclass(frozen=True)
class Hartogs(Domain):
    """The Hartogs triangle |w| < |z| < 1 in C^2.

    The shrunk copy used for sampling is ``|w| < s|z|`` with ``1 - s < |z| < s``,
    which keeps samples away from the apex and from both boundary pieces.
    """

    dim: int = 2

    def contains(self, z, margin=HARTOGS_MARGIN, shrink=1.0):
        a, b = abs(z[0]), abs(z[1])
        margin = max(margin, HARTOGS_MARGIN)
        if shrink >= 1.0:
            return bool(b + margin < a < 1.0 - margin)
        return bool(b + margin < shrink * a and 1.0 - shrink + margin < a < shrink - margin)

    def sample_base(self, rng, shrink=0.8):
        for _ in range(100000):
            zz = shrink * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
            ww = shrink * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
            p = np.array([zz, ww])
            if self.contains(p, shrink=shrink):
                return p
        raise DomainViolation("could not sample the Hartogs triangle")

    def describe(self):
        return "hartogs"


@dataclass(frozen=True)
class Intersection(Domain):
    first: Domain
    second: Domain

    @property
    def dim(self):
        return self.first.dim

    def contains(self, z, margin=0.0, shrink=1.0):
        return self.first.contains(z, margin, shrink) and self.second.contains(z, margin, shrink)

    def sample_base(self, rng, shrink=0.8):
        for _ in range(20000):
            p = self.first.sample_base(rng, shrink)
            if self.second.contains(p, shrink=shrink):
                return p
        raise DomainViolation(f"intersection of {self.first} and {self.second} looks empty")

    def describe(self):
        return f"{self.first.describe()} & {self.second.describe()}"


def _fmt_c(x):
    x = complex(x)
    if x.imag == 0:
        return repr(x.real)
    return f"{x.real!r}{x.imag:+}i"


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_domain(text: str, dim: int) -> Domain:
    """Parse ``all``, ``ball(r)``, ``ball(r; c1, c2)``, ``polydisc(r1, r2)``, ``hartogs``."""
    t = text.strip().lower().replace(" ", "")
    if t in ("all", "c^n", "whole"):
        return Whole(dim)
    if t == "hartogs":
        if dim != 2:
            raise DomainViolation("the Hartogs triangle lives in C^2")
        return Hartogs()
    m = re.fullmatch(r"ball\((" + _NUM + r")(?:;(.*))?\)", t)
    if m:
        center = None
        if m.group(2):
            center = tuple(complex(c.replace("i", "j")) for c in m.group(2).split(","))
            if len(center) != dim:
                raise DomainViolation("ball center has the wrong dimension")
        return Ball(dim, float(m.group(1)), center)
    m = re.fullmatch(r"polydisc\((.*)\)", t)
    if m:
        radii = tuple(float(r) for r in m.group(1).split(","))
        if len(radii) == 1:
            radii = radii * dim
        if len(radii) != dim:
            raise DomainViolation("polydisc radii have the wrong dimension")
        return Polydisc(radii)
    raise DomainViolation(f"unrecognised domain descriptor {text!r}")
