"""Expression trees over paired holomorphic / antiholomorphic symbols.

Every symbol family and its conjugate family are independent leaves
(``z``/``zbar``, ``eta``/``etabar``), which is what makes Wirtinger
differentiation a plain structural operation.  Conjugation is never a node:
``conj`` pushes itself down to the leaves when it is applied, swapping the
symbol families and conjugating constants.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable, Mapping

FAMILIES = ("z", "zbar", "eta", "etabar")
MIRROR = {"z": "zbar", "zbar": "z", "eta": "etabar", "etabar": "eta"}


class Expr:
    """Base node.  Arithmetic operators build new trees with light constant folding."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            raise TypeError("only integer powers are supported")
        return power(self, exponent)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: complex

    def __str__(self):
        v = complex(self.value)
        if v.imag == 0:
            return repr(v.real)
        if v.real == 0:
            return f"{v.imag!r}*i"
        return f"({v.real!r}+{v.imag!r}*i)"


@dataclass(frozen=True, eq=True)
class Sym(Expr):
    family: str
    index: int  # 0-based

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown symbol family {self.family!r}")

    def __str__(self):
        return f"{self.family}[{self.index + 1}]"


@dataclass(frozen=True, eq=True)
class Add(Expr):
    terms: tuple

    def __str__(self):
        return "(" + " + ".join(str(t) for t in self.terms) + ")"


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    factors: tuple

    def __str__(self):
        return "(" + "*".join(str(f) for f in self.factors) + ")"


@dataclass(frozen=True, eq=True)
class Div(Expr):
    num: Expr
    den: Expr

    def __str__(self):
        return f"({self.num}/{self.den})"


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __str__(self):
        return f"({self.base})^{self.exponent}"


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str  # "sqrt" | "log"
    arg: Expr

    def __str__(self):
        return f"{self.name}({self.arg})"


ZERO = Const(0j)
ONE = Const(1 + 0j)


def as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, float, complex)):
        return Const(complex(x))
    raise TypeError(f"cannot convert {type(x).__name__} to an expression")


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def add(*items) -> Expr:
    terms = []
    const = 0j
    for item in items:
        e = as_expr(item)
        parts = e.terms if isinstance(e, Add) else (e,)
        for p in parts:
            if isinstance(p, Const):
                const += p.value
            else:
                terms.append(p)
    if const != 0:
        terms.append(Const(const))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


def mul(*items) -> Expr:
    factors = []
    const = 1 + 0j
    for item in items:
        e = as_expr(item)
        parts = e.factors if isinstance(e, Mul) else (e,)
        for p in parts:
            if isinstance(p, Const):
                const *= p.value
            else:
                factors.append(p)
    if const == 0:
        return ZERO
    if const != 1:
        factors.insert(0, Const(const))
    if not factors:
        return ONE
    if len(factors) == 1:
        return factors[0]
    return Mul(tuple(factors))


def neg(x) -> Expr:
    return mul(Const(-1 + 0j), x)


def div(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if _is_const(b):
        if b.value == 0:
            raise ZeroDivisionError("division by constant zero")
        return mul(Const(1 / b.value), a)
    if _is_const(a, 0):
        return ZERO
    return Div(a, b)


def power(base, exponent: int) -> Expr:
    base = as_expr(base)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Const):
        return Const(base.value ** exponent)
    return Pow(base, int(exponent))


def sqrt(x) -> Expr:
    x = as_expr(x)
    if isinstance(x, Const):
        return Const(cmath.sqrt(x.value))
    return Func("sqrt", x)


def log(x) -> Expr:
    x = as_expr(x)
    if isinstance(x, Const):
        return Const(cmath.log(x.value))
    return Func("log", x)


def conj(x) -> Expr:
    """Conjugate an expression by swapping symbol families and conjugating constants.

    Valid for the principal branches of sqrt/log away from the negative real axis,
    which is where every metric in this package evaluates them.
    """
    memo: dict[int, Expr] = {}

    def go(e):
        key = id(e)
        if key in memo:
            return memo[key]
        if isinstance(e, Const):
            r = Const(complex(e.value).conjugate())
        elif isinstance(e, Sym):
            r = Sym(MIRROR[e.family], e.index)
        elif isinstance(e, Add):
            r = add(*(go(t) for t in e.terms))
        elif isinstance(e, Mul):
            r = mul(*(go(f) for f in e.factors))
        elif isinstance(e, Div):
            r = div(go(e.num), go(e.den))
        elif isinstance(e, Pow):
            r = power(go(e.base), e.exponent)
        elif isinstance(e, Func):
            r = Func(e.name, go(e.arg))
        else:
            raise TypeError(type(e))
        memo[key] = r
        return r

    return go(as_expr(x))


def abs2(x) -> Expr:
    x = as_expr(x)
    return mul(x, conj(x))


def z(k):
    return Sym("z", k)


def zbar(k):
    return Sym("zbar", k)


def eta(k):
    return Sym("eta", k)


def etabar(k):
    return Sym("etabar", k)


def diff(expr: Expr, family: str, index: int) -> Expr:
    """Wirtinger derivative of ``expr`` with respect to one symbol.

    No simplification beyond constant folding; shared subtrees stay shared.
    """
    target = Sym(family, index)
    memo: dict[int, Expr] = {}

    def d(e):
        key = id(e)
        if key in memo:
            return memo[key]
        if isinstance(e, Const):
            r = ZERO
        elif isinstance(e, Sym):
            r = ONE if e == target else ZERO
        elif isinstance(e, Add):
            r = add(*(d(t) for t in e.terms))
        elif isinstance(e, Mul):
            parts = []
            for i, f in enumerate(e.factors):
                df = d(f)
                if _is_const(df, 0):
                    continue
                parts.append(mul(*e.factors[:i], df, *e.factors[i + 1:]))
            r = add(*parts)
        elif isinstance(e, Div):
            dn, dd = d(e.num), d(e.den)
            first = div(dn, e.den)
            if _is_const(dd, 0):
                r = first
            else:
                r = add(first, neg(div(mul(e.num, dd), power(e.den, 2))))
        elif isinstance(e, Pow):
            db = d(e.base)
            r = mul(Const(e.exponent), power(e.base, e.exponent - 1), db)
        elif isinstance(e, Func):
            da = d(e.arg)
            if _is_const(da, 0):
                r = ZERO
            elif e.name == "sqrt":
                r = div(da, mul(2, e))
            elif e.name == "log":
                r = div(da, e.arg)
            else:
                raise ValueError(e.name)
        else:
            raise TypeError(type(e))
        memo[key] = r
        return r

    return d(as_expr(expr))


def symbols(expr: Expr) -> set:
    found = set()
    seen = set()

    def walk(e):
        if id(e) in seen:
            return
        seen.add(id(e))
        if isinstance(e, Sym):
            found.add((e.family, e.index))
        elif isinstance(e, Add):
            for t in e.terms:
                walk(t)
        elif isinstance(e, Mul):
            for f in e.factors:
                walk(f)
        elif isinstance(e, Div):
            walk(e.num)
            walk(e.den)
        elif isinstance(e, Pow):
            walk(e.base)
        elif isinstance(e, Func):
            walk(e.arg)

    walk(expr)
    return found


class Backend:
    """Numeric primitives used by :func:`evaluate`; arithmetic uses the operators."""

    def __init__(self, sqrt: Callable, log: Callable, power: Callable | None = None):
        self.sqrt = sqrt
        self.log = log
        self.power = power or (lambda x, p: x ** p)


def _csqrt(x):
    return cmath.sqrt(x)


def _clog(x):
    if x == 0:
        raise ZeroDivisionError("log(0)")
    return cmath.log(x)


COMPLEX = Backend(_csqrt, _clog)


def evaluate(expr: Expr, env: Mapping, backend: Backend = COMPLEX):
    """Evaluate ``expr`` with ``env[(family, index)]`` supplying leaf values.

    Values may be Python complex numbers, mpmath numbers or jets; the backend
    supplies sqrt and log for them.  Shared subtrees are evaluated once.
    """
    memo: dict[int, object] = {}

    def ev(e):
        key = id(e)
        if key in memo:
            return memo[key]
        if isinstance(e, Const):
            r = e.value
        elif isinstance(e, Sym):
            r = env[(e.family, e.index)]
        elif isinstance(e, Add):
            it = iter(e.terms)
            r = ev(next(it))
            for t in it:
                r = r + ev(t)
        elif isinstance(e, Mul):
            it = iter(e.factors)
            r = ev(next(it))
            for f in it:
                r = r * ev(f)
        elif isinstance(e, Div):
            r = ev(e.num) / ev(e.den)
        elif isinstance(e, Pow):
            r = backend.power(ev(e.base), e.exponent)
        elif isinstance(e, Func):
            a = ev(e.arg)
            r = backend.sqrt(a) if e.name == "sqrt" else backend.log(a)
        else:
            raise TypeError(type(e))
        memo[key] = r
        return r

    return ev(expr)
