"""Superpotential expressions: parsing, printing, evaluation and the
PT map ``W(x) -> W*(-x)``.

The accepted syntax is ordinary algebra over the reserved literal ``i``,
the coordinate ``x``, named real parameters and numeric literals::

    i*k*x^3 - i*g*x^2
    i*x - i*lam/x
    i*abs(x)^2          # or i*|x|^2
    sign(x)*x^2

Precedence is ``^`` > unary ``-`` > ``* /`` > ``+ -``.  Exponents are
integer literals; negative exponents are only accepted on ``x`` itself.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import EvaluationError, ParseError, UnboundParameter

ParamEnv = Mapping[str, float]


class Node:
    """Base class of all AST nodes (frozen dataclasses, compared by value)."""

    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Node):
    value: complex


@dataclass(frozen=True)
class Sym(Node):
    """The coordinate ``x``."""


@dataclass(frozen=True)
class Param(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class Add(Node):
    terms: tuple


@dataclass(frozen=True)
class Sub(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Mul(Node):
    factors: tuple


@dataclass(frozen=True)
class Div(Node):
    num: Node
    den: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exp: int


@dataclass(frozen=True)
class Abs(Node):
    arg: Node


@dataclass(frozen=True)
class Sign(Node):
    arg: Node


SuperpotentialExpr = Node
X = Sym()
I = Num(1j)
ZERO = Num(0)
ONE = Num(1)

_FUNCTIONS = {"abs": Abs, "sign": Sign}
_RESERVED = {"i", "x"} | set(_FUNCTIONS)


def add(*terms):
    """n-ary sum with nested sums flattened."""
    flat = []
    for t in terms:
        flat.extend(t.terms if isinstance(t, Add) else (t,))
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors):
    """n-ary product with nested products flattened."""
    flat = []
    for f in factors:
        flat.extend(f.factors if isinstance(f, Mul) else (f,))
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def neg(e):
    """Negation that cancels a double minus."""
    return e.arg if isinstance(e, Neg) else Neg(e)


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.k = 0
        self.bar_depth = 0

    @property
    def tok(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, text):
        t = self.take()
        if t.text != text:
            what = repr(t.text) if t.kind != "end" else "end of input"
            raise ParseError(f"expected {text!r}, found {what}", t.pos)
        return t

    def parse(self):
        if self.tok.kind == "end":
            raise ParseError("empty expression", 0)
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self):
        left = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            right = self.term()
            left = add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self):
        left = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take().text
            right = self.unary()
            left = mul(left, right) if op == "*" else Div(left, right)
        return left

    def unary(self):
        if self.tok.text == "-":
            self.take()
            return Neg(self.unary())
        if self.tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.tok.text != "^":
            return base
        caret = self.take()
        n = self.exponent()
        if n < 0 and base != X:
            raise ParseError("negative exponent only allowed on x", caret.pos)
        if self.tok.text == "^":
            raise ParseError("chained exponent; use parentheses", self.tok.pos)
        return Pow(base, n)

    def exponent(self):
        paren = self.tok.text == "("
        if paren:
            self.take()
        sign = 1
        if self.tok.text == "-":
            self.take()
            sign = -1
        t = self.take()
        if t.kind != "num":
            raise ParseError("non-integer exponent", t.pos)
        if not re.fullmatch(r"\d+", t.text):
            raise ParseError(f"non-integer exponent {t.text!r}", t.pos)
        if paren:
            self.expect(")")
        return sign * int(t.text)

    def primary(self):
        t = self.take()
        if t.kind == "num":
            return Num(_number(t.text))
        if t.kind == "ident":
            if self.tok.text == "(":
                fn = _FUNCTIONS.get(t.text)
                if fn is None:
                    raise ParseError(f"unknown function {t.text!r}", t.pos)
                self.take()
                inner = self.expr()
                self.expect(")")
                return fn(inner)
            if t.text in _FUNCTIONS:
                raise ParseError(f"function {t.text!r} needs an argument", t.pos)
            if t.text == "i":
                return I
            if t.text == "x":
                return X
            return Param(t.text)
        if t.text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if t.text == "|":
            self.bar_depth += 1
            inner = self.expr()
            self.expect("|")
            self.bar_depth -= 1
            return Abs(inner)
        what = repr(t.text) if t.kind != "end" else "end of input"
        raise ParseError(f"unexpected {what}", t.pos)


def _number(text):
    v = float(text)
    return int(v) if v.is_integer() and abs(v) < 2**53 else v


def parse(text: str) -> Node:
    """Parse superpotential text into an AST.

    >>> parse("i*x")
    Mul(factors=(Num(value=1j), Sym()))
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e):
    return _PREC.get(type(e), 5)


def _wrap(e, cond):
    s = to_text(e)
    return f"({s})" if cond else s


def _fmt_num(v):
    if v == 1j:
        return "i"
    v = complex(v)
    if v.imag == 0 and v.real >= 0:
        r = v.real
        if r.is_integer() and r < 2**53:
            return str(int(r))
        return repr(r)
    # not produced by the parser; printed as an equivalent (non-literal) form
    return f"({_fmt_num(abs(v.real)) if v.real >= 0 else '-' + _fmt_num(-v.real)} + ({v.imag!r})*i)"


def to_text(e: Node) -> str:
    """Print an AST so that ``parse(to_text(e)) == e`` for parser-shaped trees."""
    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Sym):
        return "x"
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Add):
        parts = [_wrap(e.terms[0], False)]
        parts += [_wrap(t, _prec(t) <= 1) for t in e.terms[1:]]
        return " + ".join(parts)
    if isinstance(e, Sub):
        return f"{to_text(e.left)} - {_wrap(e.right, _prec(e.right) <= 1)}"
    if isinstance(e, Mul):
        parts = [_wrap(e.factors[0], _prec(e.factors[0]) < 2)]
        parts += [_wrap(f, _prec(f) <= 2) for f in e.factors[1:]]
        return "*".join(parts)
    if isinstance(e, Div):
        return f"{_wrap(e.num, _prec(e.num) < 2)}/{_wrap(e.den, _prec(e.den) <= 2)}"
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _prec(e.arg) < 3)
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _prec(e.base) < 5)}^{e.exp}"
    if isinstance(e, Abs):
        return f"abs({to_text(e.arg)})"
    if isinstance(e, Sign):
        return f"sign({to_text(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# evaluation


def check_env(env: ParamEnv | None) -> dict:
    env = dict(env or {})
    for name, v in env.items():
        if isinstance(v, complex) or not math.isfinite(float(v)):
            raise EvaluationError(f"parameter {name!r} must be a finite real, got {v!r}")
    return env


def parameters(e: Node) -> set:
    """Names of all parameters referenced by ``e``."""
    if isinstance(e, Param):
        return {e.name}
    out = set()
    for child in _children(e):
        out |= parameters(child)
    return out


def _children(e):
    if isinstance(e, (Add,)):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, Sub):
        return (e.left, e.right)
    if isinstance(e, Div):
        return (e.num, e.den)
    if isinstance(e, (Neg, Abs, Sign)):
        return (e.arg,)
    if isinstance(e, Pow):
        return (e.base,)
    return ()


def evaluate(e: Node, x, env: ParamEnv | None = None):
    """Evaluate ``e`` at ``x`` (scalar or array, real or complex).

    ``abs`` and ``sign`` act on the real part of their argument.
    """
    env = check_env(env)
    missing = parameters(e) - set(env)
    if missing:
        raise UnboundParameter(f"unbound parameter(s): {', '.join(sorted(missing))}")
    return _eval(e, np.asarray(x, dtype=complex) if np.ndim(x) else complex(x), env)


eval_expr = evaluate


def _eval(e, x, env):
    if isinstance(e, Num):
        return complex(e.value)
    if isinstance(e, Sym):
        return x
    if isinstance(e, Param):
        return complex(env[e.name])
    if isinstance(e, Neg):
        return -_eval(e.arg, x, env)
    if isinstance(e, Add):
        out = 0j
        for t in e.terms:
            out = out + _eval(t, x, env)
        return out
    if isinstance(e, Sub):
        return _eval(e.left, x, env) - _eval(e.right, x, env)
    if isinstance(e, Mul):
        out = 1 + 0j
        for f in e.factors:
            out = out * _eval(f, x, env)
        return out
    if isinstance(e, Div):
        den = _eval(e.den, x, env)
        if np.any(den == 0):
            raise EvaluationError(f"division by zero in {to_text(e)}")
        return _eval(e.num, x, env) / den
    if isinstance(e, Pow):
        base = _eval(e.base, x, env)
        if e.exp < 0 and np.any(base == 0):
            raise EvaluationError(f"pole of {to_text(e)}")
        return base**e.exp
    if isinstance(e, Abs):
        return np.abs(np.real(_eval(e.arg, x, env))) + 0j
    if isinstance(e, Sign):
        return np.sign(np.real(_eval(e.arg, x, env))) + 0j
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# symbolic transforms


def _is_zero(e):
    return isinstance(e, Num) and e.value == 0


def _is_one(e):
    return isinstance(e, Num) and e.value == 1


def _s_add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return add(a, b)


def _s_sub(a, b):
    if _is_zero(b):
        return a
    if _is_zero(a):
        return neg(b)
    return Sub(a, b)


def _s_mul(*fs):
    if any(_is_zero(f) for f in fs):
        return ZERO
    fs = [f for f in fs if not _is_one(f)]
    if not fs:
        return ONE
    return mul(*fs)


def differentiate(e: Node) -> Node:
    """Symbolic d/dx.

    ``d|u|/dx = sign(u) u'`` and ``d sign(u)/dx = 0``: the delta at the
    kink is dropped, every numerical path samples away from it.
    """
    if isinstance(e, (Num, Param, Sign)):
        return ZERO
    if isinstance(e, Sym):
        return ONE
    if isinstance(e, Neg):
        d = differentiate(e.arg)
        return ZERO if _is_zero(d) else neg(d)
    if isinstance(e, Add):
        out = ZERO
        for t in e.terms:
            out = _s_add(out, differentiate(t))
        return out
    if isinstance(e, Sub):
        return _s_sub(differentiate(e.left), differentiate(e.right))
    if isinstance(e, Mul):
        out = ZERO
        for k, f in enumerate(e.factors):
            d = differentiate(f)
            if _is_zero(d):
                continue
            rest = e.factors[:k] + (d,) + e.factors[k + 1:]
            out = _s_add(out, _s_mul(*rest))
        return out
    if isinstance(e, Div):
        du, dv = differentiate(e.num), differentiate(e.den)
        top = _s_sub(_s_mul(du, e.den), _s_mul(e.num, dv))
        if _is_zero(top):
            return ZERO
        return Div(top, Pow(e.den, 2))
    if isinstance(e, Pow):
        d = differentiate(e.base)
        if e.exp == 0 or _is_zero(d):
            return ZERO
        lowered = {1: ONE, 2: e.base}.get(e.exp, Pow(e.base, e.exp - 1))
        if e.exp - 1 < 0 and e.base != X:
            lowered = Div(ONE, Pow(e.base, 1 - e.exp))
        return _s_mul(Num(e.exp) if e.exp > 0 else Neg(Num(-e.exp)), lowered, d)
    if isinstance(e, Abs):
        return _s_mul(Sign(e.arg), differentiate(e.arg))
    raise TypeError(f"not an expression node: {e!r}")


def canonical(e: Node) -> Node:
    """Flatten sums/products and cancel double negations throughout."""
    if isinstance(e, Neg):
        inner = canonical(e.arg)
        return inner.arg if isinstance(inner, Neg) else Neg(inner)
    if isinstance(e, Add):
        return add(*(canonical(t) for t in e.terms))
    if isinstance(e, Mul):
        return mul(*(canonical(f) for f in e.factors))
    if isinstance(e, Sub):
        return Sub(canonical(e.left), canonical(e.right))
    if isinstance(e, Div):
        return Div(canonical(e.num), canonical(e.den))
    if isinstance(e, Pow):
        return Pow(canonical(e.base), e.exp)
    if isinstance(e, Abs):
        return Abs(canonical(e.arg))
    if isinstance(e, Sign):
        return Sign(canonical(e.arg))
    return e


def equivalent(a: Node, b: Node) -> bool:
    """Structural equality up to :func:`canonical`."""
    return canonical(a) == canonical(b)


def _reflect(e):
    if isinstance(e, Num):
        v = complex(e.value)
        if v.imag == 0:
            return e
        if v.real == 0:
            return Neg(e)
        return Num(v.conjugate())
    if isinstance(e, Sym):
        return Neg(X)
    if isinstance(e, Param):
        return e
    if isinstance(e, Neg):
        return Neg(_reflect(e.arg))
    if isinstance(e, Add):
        return Add(tuple(_reflect(t) for t in e.terms))
    if isinstance(e, Sub):
        return Sub(_reflect(e.left), _reflect(e.right))
    if isinstance(e, Mul):
        return Mul(tuple(_reflect(f) for f in e.factors))
    if isinstance(e, Div):
        return Div(_reflect(e.num), _reflect(e.den))
    if isinstance(e, Pow):
        return Pow(_reflect(e.base), e.exp)
    if isinstance(e, Abs):
        return Abs(_reflect(e.arg))
    if isinstance(e, Sign):
        return Sign(_reflect(e.arg))
    raise TypeError(f"not an expression node: {e!r}")


def conj_reflect(e: Node, env: ParamEnv | None = None) -> Node:
    """The map ``W(x) -> W*(-x)``, returned in :func:`canonical` form.

    Parameters are real, so conjugation only flips the literal ``i``.
    ``conj_reflect(conj_reflect(e)) == canonical(e)``.
    """
    return canonical(_reflect(e))


PT_SAMPLES = np.array([-2.9, -2.35, -1.8, -1.3, -0.95, -0.6, -0.33, -0.11,
                       0.13, 0.37, 0.64, 0.99, 1.41, 1.77, 2.23, 2.71])


def is_pt_invariant(e: Node, env: ParamEnv | None = None, rtol: float = 1e-12) -> bool:
    """True iff ``W*(-x)`` and ``W(x)`` coincide.

    Equality is decided on the monomial normal form when ``e`` lowers to
    one (structural AST equality otherwise) and then confirmed at 16 real
    sample points away from x = 0.
    """
    from .coeff import lower  # coeff depends on this module

    env = check_env(env)
    r = conj_reflect(e)
    try:
        same = lower(r, env).almost_equal(lower(e, env), rtol=rtol)
    except Exception:
        same = r == canonical(e)
    if not same:
        return False
    lhs = evaluate(r, PT_SAMPLES, env)
    rhs = evaluate(e, PT_SAMPLES, env)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    return bool(np.all(np.abs(lhs - rhs) <= 1e-10 * scale))


def as_expr(w: Union[str, Node]) -> Node:
    return parse(w) if isinstance(w, str) else w
