"""A small expression language for metric definitions, and the metric-file loader.

Grammar (whitespace-insensitive, symbols are 1-based)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | factor
    factor := base ('^' ['-'] integer)?
    base   := number | 'i' | param | symbol | call | '(' expr ')'
    symbol := ('z' | 'zbar' | 'eta' | 'etabar') '[' (integer | indexvar) ']'
    call   := ('sqrt' | 'abs2' | 'log' | 'conj') '(' expr ')'
            | 'sum' '(' indexvar ',' expr ')'

``sum`` binds its index variable over 1..n.  ``param`` names come from the
metric file's ``params`` table.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import yaml

from . import expr as ex
from .domains import parse_domain
from .errors import DomainViolation, DSLSyntaxError, UnknownSymbol
from .zoo import MetricExpr

_FAMILIES = ("z", "zbar", "eta", "etabar")
_FUNCS = {"sqrt": ex.sqrt, "abs2": ex.abs2, "log": ex.log, "conj": ex.conj}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            out.append(Token(kind, s, line, col))
        if s == "\n":
            line, col = line + 1, 1
        else:
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, text, dim, params):
        self.toks = tokenize(text)
        self.i = 0
        self.dim = dim
        self.params = params
        self.bound = {}
        self.max_index = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.next()
        if t.text != text:
            what = "end of input" if t.kind == "eof" else repr(t.text)
            raise DSLSyntaxError(f"expected {text!r}, found {what}", t.line, t.col)
        return t

    def parse(self):
        if self.peek().kind == "eof":
            t = self.peek()
            raise DSLSyntaxError("empty expression", t.line, t.col)
        e = self.expr()
        t = self.peek()
        if t.kind != "eof":
            raise DSLSyntaxError(f"unexpected {t.text!r}", t.line, t.col)
        return e

    def expr(self):
        e = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            r = self.term()
            e = e + r if op == "+" else e - r
        return e

    def term(self):
        e = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.next().text
            r = self.unary()
            e = e * r if op == "*" else e / r
        return e

    def unary(self):
        if self.peek().text == "-":
            self.next()
            return -self.unary()
        return self.factor()

    def factor(self):
        b = self.base()
        if self.peek().text == "^":
            self.next()
            sign = 1
            if self.peek().text == "-":
                self.next()
                sign = -1
            t = self.next()
            if t.kind != "num" or not t.text.isdigit():
                raise DSLSyntaxError("exponent must be an integer", t.line, t.col)
            k = sign * int(t.text)
            b = ex.power(b, k) if k >= 0 else ex.div(1, ex.power(b, -k))
        return b

    def base(self):
        t = self.next()
        if t.kind == "num":
            return ex.Const(complex(float(t.text)))
        if t.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t.kind != "name":
            what = "end of input" if t.kind == "eof" else repr(t.text)
            raise DSLSyntaxError(f"unexpected {what}", t.line, t.col)
        name = t.text
        if name == "i":
            return ex.Const(1j)
        if name in _FAMILIES:
            return self.symbol(name, t)
        if name == "sum":
            return self.sum(t)
        if name in _FUNCS:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return _FUNCS[name](arg)
        if name in self.params:
            return ex.Const(complex(self.params[name]))
        if name in self.bound:
            raise DSLSyntaxError(f"index variable {name!r} used outside brackets", t.line, t.col)
        raise UnknownSymbol(f"unknown symbol {name!r}", t.line, t.col)

    def symbol(self, family, tok):
        self.expect("[")
        t = self.next()
        if t.kind == "num" and t.text.isdigit():
            k = int(t.text)
        elif t.kind == "name" and t.text in self.bound:
            k = self.bound[t.text]
        else:
            raise UnknownSymbol(f"bad index {t.text!r} for {family}", t.line, t.col)
        self.expect("]")
        if k < 1 or (self.dim is not None and k > self.dim):
            raise UnknownSymbol(f"{family}[{k}] outside 1..{self.dim}", tok.line, tok.col)
        self.max_index = max(self.max_index, k)
        return ex.Sym(family, k - 1)

    def sum(self, tok):
        if self.dim is None:
            raise DSLSyntaxError("sum(...) needs the metric dimension", tok.line, tok.col)
        self.expect("(")
        v = self.next()
        if v.kind != "name" or v.text in _FAMILIES or v.text in _FUNCS or v.text in ("i", "sum"):
            raise DSLSyntaxError("sum needs an index variable name", v.line, v.col)
        self.expect(",")
        start = self.i
        terms = []
        for k in range(1, self.dim + 1):
            self.i = start
            self.bound[v.text] = k
            terms.append(self.expr())
        del self.bound[v.text]
        self.expect(")")
        return ex.add(*terms)


def parse_expression(text: str, dim: int | None = None, params: dict | None = None):
    """Parse DSL text into an expression tree; returns ``(tree, highest index used)``."""
    p = _Parser(text, dim, dict(params or {}))
    tree = p.parse()
    return tree, p.max_index


def parse_metric_dsl(text: str, dim: int | None = None, form: str = "L", domain: str = "all",
                     name: str = "dsl", params: dict | None = None, probe: bool = True) -> MetricExpr:
    """Build a metric from DSL text; runs the homogeneity probe (warning only)."""
    tree, top = parse_expression(text, dim, params)
    n = dim if dim is not None else max(top, 1)
    metric = MetricExpr(name, n, tree, form, parse_domain(domain, n), dict(params or {}))
    if probe:
        metric.probe_homogeneity()
    return metric


_FIELDS = {"name", "dim", "form", "domain", "body", "params"}


def load_metric_file(path) -> MetricExpr:
    """Load a YAML metric file with fields name, dim, form (L|F), domain, body, params."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return load_metric_text(text)


def load_metric_text(text: str) -> MetricExpr:
    if not text.strip():
        raise DSLSyntaxError("empty metric file", 1, 1)
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line, col = (mark.line + 1, mark.column + 1) if mark else (1, 1)
        raise DSLSyntaxError(f"malformed metric file: {getattr(exc, 'problem', exc)}", line, col) from None
    if not isinstance(doc, dict):
        raise DSLSyntaxError("metric file must be a key/value document", 1, 1)
    unknown = set(doc) - _FIELDS
    if unknown:
        raise DSLSyntaxError(f"unknown field(s): {', '.join(sorted(map(str, unknown)))}", 1, 1)
    if "body" not in doc:
        raise DSLSyntaxError("missing field 'body'", 1, 1)
    body_line, body_col = _body_origin(text)
    dim = doc.get("dim")
    if dim is not None and (not isinstance(dim, int) or dim < 1):
        raise DSLSyntaxError("dim must be a positive integer", _field_line(text, "dim"), 1)
    form = str(doc.get("form", "L"))
    if form not in ("L", "F"):
        raise DSLSyntaxError("form must be L or F", _field_line(text, "form"), 1)
    params = doc.get("params") or {}
    if not isinstance(params, dict):
        raise DSLSyntaxError("params must be a table", _field_line(text, "params"), 1)
    for k, v in params.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise DSLSyntaxError(f"param {k!r} must be numeric", _field_line(text, "params"), 1)
    try:
        return parse_metric_dsl(str(doc["body"]), dim, form, str(doc.get("domain", "all")),
                                str(doc.get("name", "custom")), params)
    except DSLSyntaxError as exc:
        # report positions relative to the file when the body sits on one line
        col = exc.column + (body_col - 1 if exc.line == 1 else _indent(text, body_line + exc.line - 1))
        raise type(exc)(str(exc).rsplit(" (line", 1)[0], body_line + exc.line - 1, col) from None
    except DomainViolation:
        raise


def _body_origin(text):
    """(line, column) where the body text starts in the file."""
    lines = text.splitlines()
    line = _field_line(text, "body")
    m = re.match(r"(\s*body\s*:\s*)(.*)$", lines[line - 1])
    if m and m.group(2) and m.group(2)[0] not in "|>":
        return line, len(m.group(1)) + 1
    return line + 1, 1


def _indent(text, line):
    lines = text.splitlines()
    if 1 <= line <= len(lines):
        return len(lines[line - 1]) - len(lines[line - 1].lstrip())
    return 0


def _field_line(text, key):
    for i, line in enumerate(text.splitlines(), 1):
        if re.match(rf"\s*{re.escape(key)}\s*:", line):
            return i
    return 1
