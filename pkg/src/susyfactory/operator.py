"""Second-order differential operators and SUSY generator pairs.

Operators are kept left-normal, ``sum_m f_m(x) D^m`` with ``D = d/dx``
and ``m <= 2``.  Momentum is ``p = -i D`` (hbar = 1), so ``p^2 = -D^2``.

Generator conventions (``Wr`` denotes ``W*(-x)``):

========  ====================  ====================
type      A                     B
========  ====================  ====================
type1     ``-D + i W``          ``D + i Wr``
type2     ``-i p - W1``         ``i p - W2``
type3     ``i D + W``           ``i D + Wr``
========  ====================  ====================

and ``H+ = A B``, ``H- = B A``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import expr as ex
from .coeff import ONE, ZERO, CoeffFn, join_terms, lower, signed_terms
from .errors import EvenProductViolation, InconsistentFactorization, OrderOverflow

MAX_ORDER = 2
CONVENTIONS = ("type1", "type2", "type3")


@dataclass(frozen=True)
class DiffOperator:
    """``sum_m coeffs[m](x) D^m`` (coefficients to the left)."""

    coeffs: tuple = field(default=(ZERO,))

    def __post_init__(self):
        cs = list(self.coeffs)
        while len(cs) > 1 and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_terms(cls, terms):
        """Build from ``{order: CoeffFn}``."""
        n = max(terms, default=0) + 1
        return cls(tuple(terms.get(m, ZERO) for m in range(n)))

    @classmethod
    def from_p_form(cls, p2=ZERO, p1=ZERO, p0=ZERO):
        """Build ``p2 p^2 + p1 p + p0`` with ``p = -i D``."""
        return cls((p0, p1 * (-1j), -p2))

    @property
    def order(self):
        return len(self.coeffs) - 1

    def coeff(self, m):
        return self.coeffs[m] if m < len(self.coeffs) else ZERO

    @property
    def terms(self):
        return {m: f for m, f in enumerate(self.coeffs) if not f.is_zero()}

    def p_coeffs(self):
        """Coefficients ``(c0, c1, c2)`` of ``c2 p^2 + c1 p + c0``."""
        return (self.coeff(0), self.coeff(1) * 1j, -self.coeff(2))

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        return DiffOperator(tuple(self.coeff(m) + other.coeff(m) for m in range(n)))

    def __sub__(self, other):
        return self + other.scale(-1)

    def __matmul__(self, other):
        return multiply(self, other)

    def scale(self, s):
        return DiffOperator(tuple(f.scale(s) for f in self.coeffs))

    def almost_equal(self, other, rtol=1e-12, atol=1e-12):
        n = max(len(self.coeffs), len(other.coeffs))
        return all(self.coeff(m).almost_equal(other.coeff(m), rtol, atol) for m in range(n))

    def chop(self, tol=1e-14):
        return DiffOperator(tuple(f.chop(tol) for f in self.coeffs))

    def adjoint(self):
        """Formal adjoint on L2(R): ``(f D^m)^+ = (-D)^m conj(f)``."""
        out = {}
        for m, f in enumerate(self.coeffs):
            g = f.conj()
            for l in range(m + 1):
                term = g.scale((-1) ** m * math.comb(m, l))
                out[m - l] = out.get(m - l, ZERO) + term
                g = g.derivative()
        return DiffOperator.from_terms(out)

    def pt(self):
        """Image under ``x -> -x``, ``i -> -i`` (so ``D -> -D``)."""
        return DiffOperator(tuple(f.conj_reflect().scale((-1) ** m) for m, f in enumerate(self.coeffs)))

    def translate(self, a):
        """Coefficients re-expressed in ``u`` with ``x = u + a`` (``D`` unchanged)."""
        return DiffOperator(tuple(f.translate(a) for f in self.coeffs))

    def __str__(self):
        return to_p_text(self)


def multiply(left: DiffOperator, right: DiffOperator) -> DiffOperator:
    """Compose two operators with the Leibniz rule.

    ``(f D^j)(g D^k) = sum_l C(j, l) f g^(l) D^(j+k-l)``.
    """
    if left.order + right.order > MAX_ORDER:
        raise OrderOverflow(
            f"product order {left.order + right.order} exceeds {MAX_ORDER}"
        )
    out = {}
    for j, f in enumerate(left.coeffs):
        if f.is_zero():
            continue
        for k, g in enumerate(right.coeffs):
            gl = g
            for l in range(j + 1):
                if gl.is_zero():
                    break
                m = j + k - l
                out[m] = out.get(m, ZERO) + (f * gl).scale(math.comb(j, l))
                gl = gl.derivative()
    return DiffOperator.from_terms(out)


D = DiffOperator((ZERO, ONE))


def mult_op(f: CoeffFn) -> DiffOperator:
    return DiffOperator((f,))


# ---------------------------------------------------------------------------
# printing


def to_p_text(h: DiffOperator) -> str:
    """Operator text in momentum form, e.g. ``p^2 + 2i*x^2*p - 3*x^2``."""
    c0, c1, c2 = h.p_coeffs()
    parts = list(signed_terms(c2, "p^2"))
    parts += list(signed_terms(c1, "p"))
    parts += list(signed_terms(c0))
    return join_terms(parts)


def to_d_text(h: DiffOperator) -> str:
    parts = []
    for m in range(h.order, -1, -1):
        suffix = {0: "", 1: "D", 2: "D^2"}[m]
        parts += list(signed_terms(h.coeff(m), suffix))
    return join_terms(parts)


# ---------------------------------------------------------------------------
# classification


def symmetry_flags(h: DiffOperator, tol=1e-12):
    """``(hermitian, pt_symmetric)`` by exact coefficient comparison."""
    herm = h.adjoint().almost_equal(h, rtol=tol, atol=tol)
    pt = h.pt().almost_equal(h, rtol=tol, atol=tol)
    return herm, pt


def classify(h: DiffOperator) -> str:
    """``"hermitian"``, ``"pt_symmetric"`` or ``"neither"``.

    Hermiticity takes precedence; use :func:`symmetry_flags` for both.
    """
    herm, pt = symmetry_flags(h)
    if herm:
        return "hermitian"
    return "pt_symmetric" if pt else "neither"


def scale(h: DiffOperator, factor: float) -> DiffOperator:
    if factor == 0:
        raise ValueError("scale factor must be nonzero")
    return h.scale(factor)


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class GeneratorPair:
    A: DiffOperator
    B: DiffOperator
    convention: str
    sources: tuple
    w: tuple = ()

    @property
    def is_trivial(self):
        return all(wi.is_zero() for wi in self.w)


@dataclass(frozen=True)
class HamiltonianPair:
    h_plus: DiffOperator
    h_minus: DiffOperator
    symmetry_plus: str
    symmetry_minus: str
    generators: Optional[GeneratorPair] = None

    @property
    def trivial(self):
        return self.h_plus.almost_equal(self.h_minus)


def _lower_w(w, env):
    if isinstance(w, CoeffFn):
        return w, None
    e = ex.as_expr(w)
    return lower(e, env), e


def make_generators(convention: str, w, w2=None, env=None) -> GeneratorPair:
    """Build ``A`` and ``B`` for one of the three conventions.

    Parameters
    ----------
    convention : {"type1", "type2", "type3"}
    w : str, expression or CoeffFn
        ``W`` for type1/type3, ``W1`` for type2.
    w2 : optional
        ``W2`` (type2 only).
    env : mapping of parameter values
    """
    convention = convention.lower().replace("_", "").replace("-", "")
    if convention in ("typei", "i", "1"):
        convention = "type1"
    elif convention in ("typeii", "ii", "2"):
        convention = "type2"
    elif convention in ("typeiii", "iii", "3"):
        convention = "type3"
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")

    W, We = _lower_w(w, env)
    if convention == "type2":
        if w2 is None:
            raise ValueError("type2 needs two superpotentials")
        W2, W2e = _lower_w(w2, env)
        prod = W * W2
        if not prod.is_even():
            raise EvenProductViolation(f"W1*W2 = {prod} is not an even function of x")
        A = DiffOperator((-W, -ONE))
        B = DiffOperator((-W2, ONE))
        return GeneratorPair(A, B, convention, (w, w2), (W, W2))

    if w2 is not None:
        raise ValueError(f"{convention} takes a single superpotential")
    Wr = W.conj_reflect()
    if We is not None:
        # the expression-level map must agree with the monomial-level one
        Wr_expr = lower(ex.conj_reflect(We), env)
        if not Wr_expr.almost_equal(Wr):
            raise InconsistentFactorization("W*(-x) disagrees between expression and monomial forms")
    if convention == "type1":
        A = DiffOperator((W.scale(1j), -ONE))
        B = DiffOperator((Wr.scale(1j), ONE))
    else:
        A = DiffOperator((W, CoeffFn.const(1j)))
        B = DiffOperator((Wr, CoeffFn.const(1j)))
    return GeneratorPair(A, B, convention, (w,), (W,))


def closed_form(gen: GeneratorPair):
    """``(H+, H-)`` from the momentum-form formulas of each convention."""
    if gen.convention == "type2":
        W1, W2 = gen.w
        p1 = (W2 - W1).scale(1j)
        base = W1 * W2
        return (
            DiffOperator.from_p_form(ONE, p1, W2.derivative() + base),
            DiffOperator.from_p_form(ONE, p1, base - W1.derivative()),
        )
    (W,) = gen.w
    Wr = W.conj_reflect()
    if gen.convention == "type1":
        p1 = -(W - Wr)
        base = -(W * Wr)
        return (
            DiffOperator.from_p_form(ONE, p1, base - Wr.derivative().scale(1j)),
            DiffOperator.from_p_form(ONE, p1, base + W.derivative().scale(1j)),
        )
    p1 = -(W + Wr)
    base = W * Wr
    return (
        DiffOperator.from_p_form(ONE, p1, base + Wr.derivative().scale(1j)),
        DiffOperator.from_p_form(ONE, p1, base + W.derivative().scale(1j)),
    )


def hamiltonian_pair(gen: GeneratorPair) -> HamiltonianPair:
    """``H+ = A B`` and ``H- = B A``, cross-checked against :func:`closed_form`."""
    hp = multiply(gen.A, gen.B)
    hm = multiply(gen.B, gen.A)
    cp, cm = closed_form(gen)
    if not (hp.almost_equal(cp) and hm.almost_equal(cm)):
        raise InconsistentFactorization(
            f"Leibniz product and closed form differ for {gen.convention}: "
            f"H+ {hp} vs {cp}; H- {hm} vs {cm}"
        )
    return HamiltonianPair(hp, hm, classify(hp), classify(hm), gen)


def build_pair(convention, w, w2=None, env=None, scale_by=None) -> HamiltonianPair:
    """Generators, products and optional overall scale in one call."""
    hp = hamiltonian_pair(make_generators(convention, w, w2, env))
    if scale_by is None or scale_by == 1:
        return hp
    a, b = scale(hp.h_plus, scale_by), scale(hp.h_minus, scale_by)
    return HamiltonianPair(a, b, classify(a), classify(b), hp.generators)


def parse_operator(p2="1", p1="0", p0="0", env=None) -> DiffOperator:
    """Operator ``p2 p^2 + p1 p + p0`` from three expression strings."""
    return DiffOperator.from_p_form(lower(p2, env), lower(p1, env), lower(p0, env))
