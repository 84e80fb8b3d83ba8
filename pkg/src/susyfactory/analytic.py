"""Closed-form spectra and ground states of the exactly solvable cases."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotQuadraticForm, RadicandNonpositive
from .operator import DiffOperator, build_pair


@dataclass(frozen=True)
class Su11Coefficients:
    """``h11 p^2 + h22 x^2 + i h12 (xp + px) + i h1 p + h2 x + c0``."""

    h11: float
    h22: float
    h12: float = 0.0
    h1: float = 0.0
    h2: float = 0.0
    c0: float = 0.0

    @property
    def radicand(self):
        return self.h11 * self.h22 + self.h12**2


def su11_energy(c: Su11Coefficients, n: int) -> float:
    """Level ``n`` of the SU(1,1) quadratic Hamiltonian (plus ``c0``)."""
    r = c.radicand
    if r <= 0:
        raise RadicandNonpositive(f"h11*h22 + h12^2 = {r} <= 0")
    if n < 0:
        raise ValueError("level index must be >= 0")
    shift = (c.h1**2 * c.h22 - c.h2**2 * c.h11 - 2 * c.h1 * c.h2 * c.h12) / (4 * r)
    return math.sqrt(r) * (2 * n + 1) + shift + c.c0


def decompose_su11(h: DiffOperator, tol: float = 1e-12) -> Su11Coefficients:
    """Read off the SU(1,1) template coefficients of a quadratic operator.

    In D-form the template is ``f2 D^2 + f1 D + f0`` with
    ``f2 = -h11``, ``f1 = h1 + 2 h12 x`` and
    ``f0 = h22 x^2 + h2 x + h12 + c0`` (``i h12 (xp + px) = 2 h12 x D + h12``).
    """
    allowed = {2: {(0, 0)}, 1: {(0, 0), (1, 1)}, 0: {(0, 0), (1, 1), (2, 0)}}
    if h.order > 2:
        raise NotQuadraticForm("order > 2")
    vals = {}
    for m, f in enumerate(h.coeffs):
        for key, v in f.terms:
            if key not in allowed[m]:
                raise NotQuadraticForm(f"term {f} at derivative order {m} is outside the template")
            if abs(v.imag) > tol * max(1.0, abs(v)):
                raise NotQuadraticForm(f"complex coefficient {v} at derivative order {m}")
            vals[(m, key)] = v.real
    g = lambda m, key: vals.get((m, key), 0.0)  # noqa: E731
    h11 = -g(2, (0, 0))
    h12 = g(1, (1, 1)) / 2
    if h11 == 0:
        raise NotQuadraticForm("no p^2 term")
    return Su11Coefficients(
        h11=h11,
        h22=g(0, (2, 0)),
        h12=h12,
        h1=g(1, (0, 0)),
        h2=g(0, (1, 1)),
        c0=g(0, (0, 0)) - h12,
    )


# ---------------------------------------------------------------------------
# shape-invariant family  W = i x -/+ i lam / x

CASES = ("IID_minus", "IID_plus", "IIE_minus", "IIE_plus")

# (superpotential, member, lam*(lam -/+ 1) flavour, energy offset sign)
_CASE_TABLE = {
    "IID_minus": ("i*x - i*lam/x", "minus", -1, -1),
    "IID_plus": ("i*x - i*lam/x", "plus", +1, -1),
    "IIE_minus": ("i*x + i*lam/x", "minus", +1, +1),
    "IIE_plus": ("i*x + i*lam/x", "plus", -1, +1),
}

REFERENCE_LAMBDA_THRESHOLD = 2.0
EXACT_LAMBDA_THRESHOLD = 1.0


@dataclass(frozen=True)
class ShapeInvariantCase:
    case: str
    lam: float

    def __post_init__(self):
        if self.case not in _CASE_TABLE:
            raise ValueError(f"unknown case {self.case!r}; expected one of {CASES}")
        if not self.lam > 0:
            raise ValueError("lam must be positive")

    @property
    def superpotential(self):
        return _CASE_TABLE[self.case][0]

    @property
    def member(self):
        return _CASE_TABLE[self.case][1]

    @property
    def flavour(self):
        """+1 for ``lam(lam+1)``, -1 for ``lam(lam-1)``."""
        return _CASE_TABLE[self.case][2]

    @property
    def coupling(self):
        """``lam (lam +/- 1)``, the strength of the ``1/x^2`` barrier."""
        return self.lam * (self.lam + self.flavour)

    @property
    def exponent(self):
        """Power ``alpha`` of the ground state ``x^alpha exp(-x^2/2)``."""
        rad = 0.25 + self.coupling
        if rad < 0:
            raise RadicandNonpositive(f"0.25 + lam(lam{self.flavour:+d}) = {rad} < 0")
        return 0.5 + math.sqrt(rad)

    def hamiltonian(self, scale_by=0.5) -> DiffOperator:
        """The (by default half-scaled) partner Hamiltonian of this case."""
        pair = build_pair("type1", self.superpotential, env={"lam": self.lam}, scale_by=scale_by)
        return pair.h_plus if self.member == "plus" else pair.h_minus

    def generator_pair(self):
        return build_pair("type1", self.superpotential, env={"lam": self.lam}).generators

    def lambda_regime(self):
        """``"reference"`` (lam > 2), ``"exact"`` (1 < lam <= 2) or ``"outside"``."""
        if self.lam > REFERENCE_LAMBDA_THRESHOLD:
            return "reference"
        if self.lam > EXACT_LAMBDA_THRESHOLD:
            return "exact"
        return "outside"


def shape_invariant_energy(case: ShapeInvariantCase, n: int) -> float:
    """Exact level ``n`` of the half-scaled Hamiltonian of ``case``.

    The ``2n`` spacing (rather than ``n``) reflects the ``x^2/2`` potential
    being the half-scaled form of the radial problem on ``x > 0``.
    """
    if n < 0:
        raise ValueError("level index must be >= 0")
    lam = case.lam
    rad = 1 + 4 * case.coupling
    if rad < 0:
        raise RadicandNonpositive(f"1 + 4 lam(lam{case.flavour:+d}) = {rad} < 0")
    base = 0.5 if case.member == "minus" else 1.5
    offset = -lam if case.case.startswith("IID") else lam
    return 2 * n + base + 0.5 * math.sqrt(rad) + offset


def check_lambda(case: ShapeInvariantCase):
    """Warn when ``lam`` sits in the band where exactness holds but the
    stricter published bound does not."""
    regime = case.lambda_regime()
    if regime == "exact":
        warnings.warn(
            f"lam = {case.lam} satisfies lam > 1 (closed forms simplify exactly) "
            f"but not the stricter lam > 2 bound",
            stacklevel=2,
        )
    return regime


def ground_state_eval(case: ShapeInvariantCase, x):
    """Unnormalized ``psi_0(x) = x^alpha exp(-x^2/2)`` on ``x > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("ground state is defined on x > 0 only")
    out = x**case.exponent * np.exp(-(x**2) / 2)
    return out if out.ndim else float(out)


def ground_state_derivatives(case: ShapeInvariantCase, x):
    """``(psi, psi', psi'')`` from ``psi'/psi = alpha/x - x``."""
    a = case.exponent
    x = np.asarray(x, dtype=float)
    psi = ground_state_eval(case, x)
    g = a / x - x
    return psi, g * psi, (g * g - a / x**2 - 1) * psi


def apply_to_ground_state(op: DiffOperator, case: ShapeInvariantCase, x):
    """Evaluate ``op psi_0`` pointwise from the exact derivatives."""
    derivs = ground_state_derivatives(case, x)
    out = np.zeros(np.shape(x), dtype=complex)
    for m, f in enumerate(op.coeffs):
        out = out + f(x) * derivs[m]
    return out


def annihilation_residual(case: ShapeInvariantCase, x) -> float:
    """``max |A psi_0| / max |psi_0|`` with ``A`` the unscaled generator.

    Only the zero mode of the ``minus`` member of the SUSY family is
    annihilated by ``A``; other cases raise ``ValueError``.
    """
    if case.case != "IID_minus":
        raise ValueError(f"{case.case} has no generator annihilating its ground state")
    A = case.generator_pair().A
    r = apply_to_ground_state(A, case, x)
    return float(np.max(np.abs(r)) / np.max(np.abs(ground_state_eval(case, x))))


def eigen_residual(case: ShapeInvariantCase, x) -> float:
    """``max |(H - E0) psi_0| / max |psi_0|`` for the half-scaled Hamiltonian."""
    H = case.hamiltonian()
    e0 = shape_invariant_energy(case, 0)
    r = apply_to_ground_state(H, case, x) - e0 * ground_state_eval(case, x)
    return float(np.max(np.abs(r)) / np.max(np.abs(ground_state_eval(case, x))))
