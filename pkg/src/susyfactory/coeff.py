"""Coefficient functions: finite sums of signed monomials.

A monomial is stored under the key ``(c, t)`` and stands for
``|x|^c * sign(x)^t`` with integer ``c`` and ``t`` in {0, 1}.  This is a
normal form for products of ``x^a``, ``|x|^b`` and ``sign(x)^s`` under
the rewrites ``|x|^2 -> x^2``, ``sign(x)^2 -> 1``, ``x sign(x) -> |x|``
and ``|x| sign(x) -> x``: the smooth monomial ``x^a`` is ``(a, a mod 2)``,
anything with ``t != c mod 2`` carries a kink at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .errors import NonMonomial, UnboundParameter


def _clean(z, tol=0.0):
    z = complex(z)
    re = 0.0 if abs(z.real) <= tol else z.real
    im = 0.0 if abs(z.imag) <= tol else z.imag
    return complex(re, im)


@dataclass(frozen=True)
class CoeffFn:
    """Immutable sum of monomials; ``terms`` maps ``(c, t)`` to a coefficient."""

    terms: tuple = field(default=())

    @classmethod
    def from_dict(cls, d):
        items = [(k, complex(v)) for k, v in d.items() if complex(v) != 0]
        return cls(tuple(sorted(items)))

    @classmethod
    def const(cls, v):
        return cls.from_dict({(0, 0): v})

    @classmethod
    def monomial(cls, coef, a, b=0, s=0):
        """``coef * x^a * |x|^b * sign(x)^s`` in normal form."""
        c = a + b
        t = (a + s) % 2
        return cls.from_dict({(c, t): coef})

    @property
    def dict(self):
        return dict(self.terms)

    # -- algebra ----------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        d = self.dict
        for k, v in other.terms:
            d[k] = d.get(k, 0) + v
        return CoeffFn.from_dict(d)

    __radd__ = __add__

    def __neg__(self):
        return CoeffFn(tuple((k, -v) for k, v in self.terms))

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        d = {}
        for (c1, t1), v1 in self.terms:
            for (c2, t2), v2 in other.terms:
                k = (c1 + c2, t1 ^ t2)
                d[k] = d.get(k, 0) + v1 * v2
        return CoeffFn.from_dict(d)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = CoeffFn.const(1)
        for _ in range(n):
            out = out * self
        return out

    def inverse(self):
        if len(self.terms) != 1:
            raise NonMonomial("only a single monomial can be inverted")
        (c, t), v = self.terms[0]
        return CoeffFn.from_dict({(-c, t): 1 / v})

    def scale(self, s):
        return CoeffFn.from_dict({k: v * s for k, v in self.terms})

    def derivative(self):
        """d/dx with the delta from d sign(x)/dx dropped."""
        d = {}
        for (c, t), v in self.terms:
            if c != 0:
                d[(c - 1, 1 - t)] = d.get((c - 1, 1 - t), 0) + c * v
        return CoeffFn.from_dict(d)

    def conj_reflect(self):
        """``f(x) -> f*(-x)``."""
        return CoeffFn.from_dict({(c, t): np.conj(v) * (-1) ** t for (c, t), v in self.terms})

    def conj(self):
        return CoeffFn.from_dict({k: np.conj(v) for k, v in self.terms})

    def reflect(self):
        """``f(x) -> f(-x)``."""
        return CoeffFn.from_dict({(c, t): v * (-1) ** t for (c, t), v in self.terms})

    def translate(self, a):
        """``f(x) -> f(x + a)``; smooth polynomials only."""
        if not self.is_polynomial():
            raise NonMonomial("only smooth polynomials can be translated")
        d = {}
        for (c, _), v in self.terms:
            for j in range(c + 1):
                k = (j, j % 2)
                d[k] = d.get(k, 0) + v * math.comb(c, j) * a ** (c - j)
        return CoeffFn.from_dict(d)

    # -- predicates ---------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def is_even(self):
        return all(t == 0 for (_, t), _ in self.terms)

    def is_odd(self):
        return all(t == 1 for (_, t), _ in self.terms)

    def is_smooth(self):
        return all((c - t) % 2 == 0 for (c, t), _ in self.terms)

    def is_polynomial(self):
        return self.is_smooth() and self.min_degree() >= 0

    def is_real(self, tol=0.0):
        return all(abs(v.imag) <= tol for _, v in self.terms)

    def min_degree(self):
        return min((c for (c, _), _ in self.terms), default=0)

    def degree(self):
        return max((c for (c, _), _ in self.terms), default=0)

    def coefficient(self, c, t=None):
        """Coefficient of ``x^c`` (smooth) or of the key ``(c, t)``."""
        t = c % 2 if t is None else t
        return self.dict.get((c, t), 0j)

    def almost_equal(self, other, rtol=1e-12, atol=1e-12):
        a, b = self.dict, _coerce(other).dict
        for k in set(a) | set(b):
            va, vb = a.get(k, 0), b.get(k, 0)
            if abs(va - vb) > atol + rtol * max(abs(va), abs(vb)):
                return False
        return True

    def chop(self, tol=1e-14):
        return CoeffFn.from_dict({k: _clean(v, tol) for k, v in self.terms})

    # -- evaluation -------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        out = np.zeros_like(x)
        for (c, t), v in self.terms:
            if (c - t) % 2 == 0:
                out = out + v * x**c
            else:
                xr = x.real
                out = out + v * np.abs(xr) ** c * np.sign(xr) ** t
        return out if out.ndim else complex(out)

    # -- printing ---------------------------------------------------------
    def __str__(self):
        return format_coeff(self)


def _coerce(v):
    return v if isinstance(v, CoeffFn) else CoeffFn.const(v)


ZERO = CoeffFn()
ONE = CoeffFn.const(1)
X = CoeffFn.monomial(1, 1)


# ---------------------------------------------------------------------------
# lowering from expression trees


def lower(e, env=None) -> CoeffFn:
    """Turn an expression into a :class:`CoeffFn` after binding parameters.

    Raises
    ------
    NonMonomial
        If the expression is not a finite sum of monomials in ``x``,
        ``1/x``, ``|x|`` and ``sign(x)`` (for instance ``1/(x+1)``).
    """
    e = ex.as_expr(e)
    env = ex.check_env(env)
    missing = ex.parameters(e) - set(env)
    if missing:
        raise UnboundParameter(f"unbound parameter(s): {', '.join(sorted(missing))}")
    return _lower(e, env)


def _single(f, what):
    if len(f.terms) != 1:
        raise NonMonomial(f"{what} of a non-monomial is not supported")
    return f.terms[0]


def _lower(e, env):
    if isinstance(e, ex.Num):
        return CoeffFn.const(e.value)
    if isinstance(e, ex.Sym):
        return X
    if isinstance(e, ex.Param):
        return CoeffFn.const(float(env[e.name]))
    if isinstance(e, ex.Neg):
        return -_lower(e.arg, env)
    if isinstance(e, ex.Add):
        out = ZERO
        for t in e.terms:
            out = out + _lower(t, env)
        return out
    if isinstance(e, ex.Sub):
        return _lower(e.left, env) - _lower(e.right, env)
    if isinstance(e, ex.Mul):
        out = ONE
        for f in e.factors:
            out = out * _lower(f, env)
        return out
    if isinstance(e, ex.Div):
        den = _lower(e.den, env)
        if den.is_zero():
            raise NonMonomial("division by zero")
        _single(den, "division")
        return _lower(e.num, env) * den.inverse()
    if isinstance(e, ex.Pow):
        base = _lower(e.base, env)
        if e.exp < 0:
            _single(base, "negative power")
        return base**e.exp
    if isinstance(e, (ex.Abs, ex.Sign)):
        arg = _lower(e.arg, env)
        if arg.is_zero():
            return ZERO
        (c, t), v = _single(arg, type(e).__name__.lower())
        if v.imag != 0:
            raise NonMonomial("abs/sign need a real-coefficient argument")
        if isinstance(e, ex.Abs):
            return CoeffFn.from_dict({(c, 0): abs(v.real)})
        return CoeffFn.from_dict({(0, t): math.copysign(1.0, v.real)})
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# printing


def _fmt_real(r):
    if float(r).is_integer() and abs(r) < 1e15:
        return str(int(r))
    return f"{r:.12g}"


def format_scalar(v):
    """Compact text for a complex coefficient: ``3``, ``-2i``, ``(1+2i)``."""
    v = complex(v)
    if v.imag == 0:
        return _fmt_real(v.real)
    if v.real == 0:
        im = v.imag
        mag = "" if abs(im) == 1 else _fmt_real(abs(im))
        return ("-" if im < 0 else "") + mag + "i"
    sign = "+" if v.imag >= 0 else "-"
    return f"({_fmt_real(v.real)}{sign}{_fmt_real(abs(v.imag))}i)"


def format_monomial(c, t):
    """Text for ``|x|^c sign(x)^t``; empty for the constant."""
    def xpow(n):
        return "" if n == 0 else ("x" if n == 1 else f"x^{n}")

    if (c - t) % 2 == 0:
        return xpow(c)
    if c >= 1:
        return "*".join(p for p in (xpow(c - 1), "|x|") if p)
    return "*".join(p for p in (xpow(c), "sign(x)") if p)


def signed_terms(f: CoeffFn, suffix=""):
    """Yield ``(negative, text)`` for each term, highest power first."""
    for (c, t), v in sorted(f.terms, key=lambda kv: (-kv[0][0], kv[0][1])):
        neg = (v.real < 0) if v.real != 0 else (v.imag < 0)
        mag = -v if neg else v
        mono = format_monomial(c, t)
        tail = "*".join(p for p in (mono, suffix) if p)
        if mag == 1 and tail:
            text = tail
        elif mag == 1j and tail:
            text = "i*" + tail
        else:
            text = "*".join(p for p in (format_scalar(mag), tail) if p)
        yield neg, text


def join_terms(parts):
    out = ""
    for neg, text in parts:
        if not out:
            out = ("-" if neg else "") + text
        else:
            out += (" - " if neg else " + ") + text
    return out or "0"


def format_coeff(f: CoeffFn) -> str:
    return join_terms(signed_terms(f))
