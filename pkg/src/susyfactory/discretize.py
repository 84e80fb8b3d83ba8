"""Matrix realizations of a :class:`DiffOperator`.

Two schemes are provided:

* :class:`OscillatorBasis` projects onto harmonic-oscillator eigenfunctions
  of frequency ``omega``.  Position and derivative matrices come from the
  ladder algebra, smooth polynomial coefficients are exact matrix powers,
  and coefficients with a kink (``|x|``, ``sign(x)``) are integrated by
  Gauss-Legendre quadrature on the half line using parity.  Products are
  formed in dimension ``n_build`` and then truncated to ``n_keep``.
* :class:`FiniteDifference` uses three-point formulas on a (possibly
  complex) path ``x(u)`` with Dirichlet ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DiscretizationError,
    KinkOnGrid,
    PoleInCoefficient,
    PoleOnGrid,
    QuadratureBreakdown,
    ThetaOutOfRange,
)
from .operator import DiffOperator


@dataclass(frozen=True)
class OscillatorBasis:
    """Oscillator-basis scheme.

    Parameters
    ----------
    n_keep : int
        Dimension of the returned matrix.
    n_build : int, optional
        Working dimension for operator products; defaults to ``2*n_keep``.
    omega : float
        Basis frequency.
    offset : complex
        Expand about the shifted line ``x = u + offset`` (polynomial
        coefficients only).  A purely imaginary offset moves the basis into
        the complex plane, which is how inverted quartics are handled here.
    """

    n_keep: int
    n_build: Optional[int] = None
    omega: float = 1.0
    offset: complex = 0.0

    def __post_init__(self):
        if self.n_build is None:
            object.__setattr__(self, "n_build", 2 * self.n_keep)
        if self.n_keep < 1:
            raise ValueError("n_keep must be positive")
        if self.n_build < 2 * self.n_keep:
            raise ValueError("n_build must be at least 2*n_keep")
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    @property
    def dimension(self):
        return self.n_keep

    def describe(self):
        d = {"method": "ho", "n_keep": self.n_keep, "n_build": self.n_build, "omega": self.omega}
        if self.offset:
            d["offset"] = [complex(self.offset).real, complex(self.offset).imag]
        return d


CONTOURS = ("rotated", "pt")


@dataclass(frozen=True)
class FiniteDifference:
    """Finite-difference scheme on ``points`` interior nodes.

    The real parameter ``u`` runs over ``linspace(x_min, x_max, points+2)``
    (end nodes carry the Dirichlet condition).  With ``theta != 0`` the
    nodes are moved into the complex plane:

    * ``contour="rotated"``: ``x = exp(i theta) u``;
    * ``contour="pt"``: ``x = u - i tan(theta) sqrt(u^2 + 1)``, a
      hyperbola symmetric under ``x -> -conj(x)``, so PT-symmetric operators
      stay PT-symmetric on the grid.  Positive ``theta`` bends the path
      into the lower half plane.
    """

    x_min: float
    x_max: float
    points: int
    theta: float = 0.0
    domain: str = "full"
    contour: str = "rotated"

    def __post_init__(self):
        if self.points < 3:
            raise ValueError("points must be >= 3")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.domain not in ("full", "half"):
            raise ValueError("domain must be 'full' or 'half'")
        if self.domain == "half" and self.x_min < 0:
            raise ValueError("half-line domain needs x_min >= 0")
        if self.contour not in CONTOURS:
            raise ValueError(f"contour must be one of {CONTOURS}")
        if not -math.pi / 4 < self.theta < math.pi / 4:
            raise ThetaOutOfRange(f"theta = {self.theta} outside (-pi/4, pi/4)")

    @property
    def dimension(self):
        return self.points

    def nodes(self):
        """All ``points + 2`` complex nodes, boundary nodes included."""
        u = np.linspace(self.x_min, self.x_max, self.points + 2)
        if self.theta == 0:
            return u.astype(complex)
        if self.contour == "rotated":
            return np.exp(1j * self.theta) * u
        return u - 1j * math.tan(self.theta) * np.sqrt(u * u + 1)

    def with_points(self, points):
        return FiniteDifference(self.x_min, self.x_max, points, self.theta, self.domain, self.contour)

    def with_theta(self, theta):
        return FiniteDifference(self.x_min, self.x_max, self.points, theta, self.domain, self.contour)

    def describe(self):
        return {
            "method": "fd", "x_min": self.x_min, "x_max": self.x_max, "points": self.points,
            "theta": self.theta, "domain": self.domain, "contour": self.contour,
        }


@dataclass
class OperatorMatrix:
    """A discretized operator.

    Finite-difference matrices are tridiagonal and are kept as three bands
    ``(lower, diag, upper)`` (``lower[0]`` and ``upper[-1]`` unused); the
    dense form is built on first use of :attr:`matrix`.
    """

    scheme: object
    operator: Optional[DiffOperator] = None
    dense: Optional[np.ndarray] = None
    bands: Optional[tuple] = None
    hermitian_hint: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def tridiagonal(self):
        return self.bands is not None

    @property
    def matrix(self):
        if self.dense is None:
            lo, di, up = self.bands
            self.dense = _tri(lo, di, up)
        return self.dense

    @property
    def shape(self):
        n = len(self.bands[1]) if self.dense is None else self.dense.shape[0]
        return (n, n)


# ---------------------------------------------------------------------------
# oscillator basis


def ladder_matrices(n, omega=1.0):
    """Position ``X`` and derivative ``D`` matrices in the first ``n`` states."""
    s = np.sqrt(np.arange(1, n))
    a = np.diag(s, 1)
    X = (a + a.T) / math.sqrt(2 * omega)
    D = (a - a.T) * math.sqrt(omega / 2)
    return X, D


def hermite_functions(n, x):
    """Normalized oscillator eigenfunctions ``psi_0..psi_{n-1}`` (omega = 1).

    The three-term recurrence is run on rescaled values with a running
    log-scale per node, so large ``n`` and ``x`` do not underflow.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros((n, x.size))
    logs = -0.5 * x * x - 0.25 * math.log(math.pi)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    out[0] = np.exp(logs)
    for k in range(1, n):
        nxt = math.sqrt(2 / k) * x * cur - math.sqrt((k - 1) / k) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if np.any(big):
            sc = np.where(big, np.abs(cur), 1.0)
            cur = cur / sc
            prev = prev / sc
            logs = logs + np.log(sc)
        with np.errstate(under="ignore"):
            out[k] = cur * np.exp(logs)
    return out


def kinked_matrix(n, c, t, omega=1.0, nodes=None):
    """Matrix of ``|x|^c sign(x)^t`` between the first ``n`` oscillator states.

    Elements vanish unless ``m + n + t`` is even, in which case the
    integrand is even and the integral is twice the half-line value.
    """
    if c < 0:
        raise PoleInCoefficient("negative powers of x are not integrable in the oscillator basis")
    length = math.sqrt(2 * n + 1) + 12.0
    m = nodes or 2 * n + 64
    u, w = np.polynomial.legendre.leggauss(m)
    x = (u + 1) * length / 2
    w = w * length / 2
    psi = hermite_functions(n, x)
    F = 2.0 * (psi * (w * x**c)) @ psi.T
    idx = np.arange(n)
    F[(np.add.outer(idx, idx) + t) % 2 == 1] = 0.0
    if not np.all(np.isfinite(F)):
        raise QuadratureBreakdown("non-finite quadrature values")
    return F * omega ** (-c / 2)


def ho_matrix(h: DiffOperator, scheme: OscillatorBasis) -> OperatorMatrix:
    """Project ``h`` onto the oscillator basis.

    Raises
    ------
    PoleInCoefficient
        If any coefficient has a negative power of ``x``.
    """
    nb, nk = scheme.n_build, scheme.n_keep
    for f in h.coeffs:
        if f.min_degree() < 0:
            raise PoleInCoefficient("1/x terms need the half-line finite-difference scheme")
    if scheme.offset:
        if not all(f.is_polynomial() for f in h.coeffs):
            raise DiscretizationError("a shifted basis needs polynomial coefficients")
        h = h.translate(scheme.offset)
    X, Dm = ladder_matrices(nb, scheme.omega)
    xpow = {0: np.eye(nb)}

    def power(a):
        if a not in xpow:
            lo = max(k for k in xpow if k <= a)
            P = xpow[lo]
            for _ in range(a - lo):
                P = P @ X
            xpow[a] = P
        return xpow[a]

    M = np.zeros((nb, nb), dtype=complex)
    dpow = np.eye(nb)
    for m, f in enumerate(h.coeffs):
        if m:
            dpow = dpow @ Dm
        if f.is_zero():
            continue
        F = np.zeros((nb, nb), dtype=complex)
        for (c, t), v in f.terms:
            if (c - t) % 2 == 0:
                F += v * power(c)
            else:
                F += v * kinked_matrix(nb, c, t, scheme.omega)
        M += F @ dpow
    M = M[:nk, :nk]
    if not np.all(np.isfinite(M)):
        raise QuadratureBreakdown("non-finite matrix entries")
    return OperatorMatrix(scheme, h, dense=M)


# ---------------------------------------------------------------------------
# finite differences


def fd_stencils(x):
    """Three-point first/second derivative weights on nodes ``x``.

    Returns ``(lower, diag, upper)`` arrays for ``D`` and ``D^2`` at the
    interior nodes ``x[1:-1]``.
    """
    hm = x[1:-1] - x[:-2]
    hp = x[2:] - x[1:-1]
    s = hm + hp
    d1 = (-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s))
    d2 = (2 / (hm * s), -2 / (hm * hp), 2 / (hp * s))
    return d1, d2


def _tri(lo, di, up):
    return np.diag(di) + np.diag(up[:-1], 1) + np.diag(lo[1:], -1)


def fd_matrix(h: DiffOperator, scheme: FiniteDifference) -> OperatorMatrix:
    """Finite-difference matrix of ``h`` on the nodes of ``scheme``.

    First-order terms use the split ``f D = (f D + D f)/2 - f'/2`` so that
    formally Hermitian operators give Hermitian matrices on real grids.

    Raises
    ------
    PoleOnGrid
        If a coefficient has a pole on or across the grid.
    KinkOnGrid
        If a kinked coefficient meets a node at the origin or a complex path.
    """
    if h.order > 2:
        raise DiscretizationError("order > 2")
    if h.order == 2 and not all(c == 0 for (c, _), _ in h.coeff(2).terms):
        raise DiscretizationError("the D^2 coefficient must be constant")
    x = scheme.nodes()
    xi = x[1:-1]
    has_pole = any(f.min_degree() < 0 for f in h.coeffs)
    has_kink = not all(f.is_smooth() for f in h.coeffs)
    if has_pole and (scheme.domain != "half" or np.any(xi == 0)):
        raise PoleOnGrid("1/x terms need a half-line grid with no interior node at 0")
    if has_kink:
        if scheme.theta != 0:
            raise KinkOnGrid("kinked coefficients cannot be continued to a complex path")
        if np.any(xi == 0):
            raise KinkOnGrid("a node sits on the kink at x = 0; use an even number of points")
    (l1, c1, u1), (l2, c2, u2) = fd_stencils(x)
    n = scheme.points
    lo = np.zeros(n, dtype=complex)
    di = np.zeros(n, dtype=complex)
    up = np.zeros(n, dtype=complex)
    f2 = h.coeff(2)(np.zeros(1))[0] if h.order >= 2 else 0
    if f2:
        lo += f2 * l2
        di += f2 * c2
        up += f2 * u2
    f1 = h.coeff(1)
    if not f1.is_zero():
        F = f1(xi)
        lo[1:] += 0.5 * l1[1:] * (F[1:] + F[:-1])
        up[:-1] += 0.5 * u1[:-1] * (F[:-1] + F[1:])
        di += c1 * F - 0.5 * f1.derivative()(xi)
    di += h.coeff(0)(xi)
    lo[0] = up[-1] = 0
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(di)) and np.all(np.isfinite(up))):
        raise PoleOnGrid("non-finite coefficient values on the grid")
    herm = False
    if scheme.theta == 0:
        scale = max(1.0, float(np.abs(di).max()))
        herm = bool(
            np.allclose(di.imag, 0, atol=1e-12 * scale)
            and np.allclose(lo[1:], np.conj(up[:-1]), rtol=0, atol=1e-12 * scale)
        )
    return OperatorMatrix(scheme, h, bands=(lo, di, up), hermitian_hint=herm)


def discretize(h: DiffOperator, scheme) -> OperatorMatrix:
    if isinstance(scheme, OscillatorBasis):
        return ho_matrix(h, scheme)
    if isinstance(scheme, FiniteDifference):
        return fd_matrix(h, scheme)
    raise TypeError(f"unknown scheme {scheme!r}")


def hermiticity_defect(m: OperatorMatrix) -> float:
    """``||M - M^H|| / ||M||`` (Frobenius)."""
    M = m.matrix
    nrm = np.linalg.norm(M)
    return float(np.linalg.norm(M - M.conj().T) / nrm) if nrm else 0.0
