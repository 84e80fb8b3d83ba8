"""Eigenvalues of discretized operators and convergence orchestration."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .discretize import OperatorMatrix, discretize
from .errors import NoConvergence


TIE_RTOL = 1e-12


def sort_eigenvalues(ev) -> np.ndarray:
    """Ascending by real part, ties broken by imaginary part.

    Real parts closer than ``TIE_RTOL`` times the largest modulus count as
    ties, so rounding noise cannot reorder a conjugate pair.
    """
    ev = np.asarray(ev, dtype=complex).ravel()
    if ev.size < 2:
        return ev.copy()
    ev = ev[np.lexsort((ev.imag, ev.real))]
    tol = TIE_RTOL * float(np.abs(ev).max())
    group = np.concatenate(([0], np.cumsum(np.diff(ev.real) > tol)))
    return ev[np.lexsort((ev.imag, group))]


@dataclass
class Spectrum:
    """Sorted complex eigenvalues with convergence metadata.

    ``converged`` flags individual entries; ``converged_count`` counts the
    leading run of flagged values.
    """

    eigenvalues: np.ndarray
    scheme: dict = field(default_factory=dict)
    converged: Optional[np.ndarray] = None
    stability_digits: float = math.inf
    dropped: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eigenvalues = sort_eigenvalues(self.eigenvalues)
        if self.converged is None:
            self.converged = np.ones(len(self.eigenvalues), dtype=bool)
        self.converged = np.asarray(self.converged, dtype=bool)

    @classmethod
    def from_values(cls, values, **kw):
        return cls(np.asarray(values, dtype=complex), **kw)

    def __len__(self):
        return len(self.eigenvalues)

    def __getitem__(self, i):
        return self.eigenvalues[i]

    @property
    def converged_count(self):
        bad = np.flatnonzero(~self.converged)
        return int(bad[0]) if bad.size else len(self.eigenvalues)

    def converged_values(self):
        return self.eigenvalues[: self.converged_count]

    def lowest(self, k):
        return self.eigenvalues[:k]


# ---------------------------------------------------------------------------
# eigensolvers


def _dense(m):
    return m.matrix if isinstance(m, OperatorMatrix) else np.asarray(m, dtype=complex)


def eigenvalues(m, method: str = "auto") -> Spectrum:
    """All eigenvalues of a matrix or :class:`OperatorMatrix`.

    Parameters
    ----------
    method : {"auto", "lapack", "qr"}
        ``"lapack"`` calls the balanced Hessenberg/QR driver in LAPACK,
        ``"qr"`` runs :func:`hessenberg_qr` (small matrices), ``"auto"``
        additionally uses a real-symmetric tridiagonal solver when the
        matrix is a Hermitian finite-difference band.
    """
    scheme = getattr(getattr(m, "scheme", None), "describe", lambda: {})()
    if method == "auto" and isinstance(m, OperatorMatrix) and m.tridiagonal and m.hermitian_hint:
        lo, di, up = m.bands
        if np.allclose(up[:-1].imag, 0) and np.allclose(di.imag, 0):
            ev = sla.eigvalsh_tridiagonal(di.real, up[:-1].real)
            return Spectrum(ev.astype(complex), scheme)
    M = _dense(m)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if M.shape[0] == 0:
        raise ValueError("empty matrix")
    if method == "qr":
        ev = hessenberg_qr(M)
    else:
        ev = sla.eigvals(M, check_finite=False)
    return Spectrum(ev, scheme)


def hessenberg(A) -> np.ndarray:
    """Upper Hessenberg form by Householder reflections (similarity)."""
    H = np.array(A, dtype=complex)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0
    return H


def _wilkinson(a, b, c, d):
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(tr * tr / 4 - det)
    l1, l2 = tr / 2 + disc, tr / 2 - disc
    return l1 if abs(l1 - d) < abs(l2 - d) else l2


def hessenberg_qr(A, max_iter_per_eig: int = 60) -> np.ndarray:
    """Eigenvalues by balancing, Hessenberg reduction and complex
    Wilkinson-shifted QR sweeps with deflation.

    Raises
    ------
    NoConvergence
        When an eigenvalue fails to deflate within ``max_iter_per_eig``
        sweeps; the eigenvalues found so far are on ``.partial``.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if n == 1:
        return A.diagonal().copy()
    B, _ = sla.matrix_balance(A, permute=False)
    H = hessenberg(B)
    eps = np.finfo(float).eps
    out = []
    hi = n - 1
    its = 0
    while hi >= 0:
        if hi == 0:
            out.append(H[0, 0])
            break
        l = hi
        while l > 0:
            s = abs(H[l, l]) + abs(H[l - 1, l - 1])
            if s == 0:
                s = np.abs(H[: hi + 1, : hi + 1]).max()
            if abs(H[l, l - 1]) <= eps * s:
                H[l, l - 1] = 0
                break
            l -= 1
        if l == hi:
            out.append(H[hi, hi])
            hi -= 1
            its = 0
            continue
        its += 1
        if its > max_iter_per_eig:
            raise NoConvergence(f"QR failed to deflate after {max_iter_per_eig} sweeps",
                                partial=sort_eigenvalues(out))
        if its % 11 == 0:
            mu = H[hi, hi] + abs(H[hi, hi - 1]) * (1 + 1j) * 0.75
        else:
            mu = _wilkinson(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
        _qr_sweep(H, l, hi, mu)
    return np.array(out)


def _qr_sweep(H, lo, hi, mu):
    """One shifted QR step ``H - mu = QR, H <- RQ + mu`` on block ``lo..hi``."""
    idx = np.arange(lo, hi + 1)
    for k in idx:
        H[k, k] -= mu
    rots = []
    for k in range(lo, hi):
        a, b = H[k, k], H[k + 1, k]
        r = math.hypot(abs(a), abs(b))
        if r == 0:
            c, s = 1.0, 0j
        else:
            c, s = a / r, b / r
        G = np.array([[np.conj(c), np.conj(s)], [-s, c]])
        H[k:k + 2, k:hi + 1] = G @ H[k:k + 2, k:hi + 1]
        rots.append(G)
    for k, G in zip(range(lo, hi), rots):
        H[lo:min(k + 2, hi) + 1, k:k + 2] = H[lo:min(k + 2, hi) + 1, k:k + 2] @ G.conj().T
    for k in idx:
        H[k, k] += mu


def inverse_iteration(M, lam, iters: int = 3, seed: int = 0):
    """Right eigenvector for the eigenvalue estimate ``lam``."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    nrm = np.linalg.norm(M, 1)
    shift = lam + (1e-10 * max(1.0, nrm)) * (1 + 1j)
    lu = sla.lu_factor(M - shift * np.eye(n), check_finite=False)
    v = np.random.default_rng(seed).standard_normal(n) + 0j
    for _ in range(iters):
        v = sla.lu_solve(lu, v, check_finite=False)
        v /= np.linalg.norm(v)
    return v


def residuals(m, values, iters: int = 3) -> np.ndarray:
    """``||M v - lam v|| / ||M||`` for each requested eigenvalue."""
    M = _dense(m)
    nrm = np.linalg.norm(M, 2) if M.shape[0] <= 400 else np.linalg.norm(M, 1)
    out = []
    for lam in np.atleast_1d(values):
        v = inverse_iteration(M, lam, iters)
        out.append(np.linalg.norm(M @ v - lam * v) / nrm)
    return np.array(out)


# ---------------------------------------------------------------------------
# convergence driver


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("SUSYFACTORY_THREADS", "1")))
    except ValueError:
        return 1


def filter_physical(s: Spectrum, max_imag: float) -> Spectrum:
    """Keep converged eigenvalues with ``|Im| <= max_imag``."""
    ev = s.eigenvalues[s.converged]
    keep = np.abs(ev.imag) <= max_imag
    return replace(
        s,
        eigenvalues=ev[keep],
        converged=np.ones(int(keep.sum()), dtype=bool),
        dropped=s.dropped + int(len(s.eigenvalues) - keep.sum()),
        meta=dict(s.meta),
    )


def _solve(h, scheme, method, select):
    s = eigenvalues(discretize(h, scheme), method=method)
    return select(s) if select else s


def converge(h, schemes: Sequence, tol: float, k: int, method: str = "auto",
             select: Optional[Callable[[Spectrum], Spectrum]] = None,
             workers: Optional[int] = None) -> Spectrum:
    """Diagonalize ``h`` under increasingly fine schemes.

    The finest spectrum is returned.  Its lowest ``k`` entries are flagged
    converged where the two finest schemes agree within ``tol`` (complex
    modulus); ``stability_digits`` is ``-log10`` of the largest of those
    ``k`` disagreements.  ``select`` (e.g. a :func:`filter_physical`
    partial) is applied to each spectrum before comparison.  Never raises
    on non-convergence: callers inspect ``converged_count``.
    """
    if len(schemes) < 2:
        raise ValueError("converge needs at least two schemes")
    workers = workers or thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(lambda sc: _solve(h, sc, method, select), schemes))
    else:
        spectra = [_solve(h, sc, method, select) for sc in schemes]
    fine, prev = spectra[-1], spectra[-2]
    kk = min(k, len(fine), len(prev))
    diff = np.abs(fine.eigenvalues[:kk] - prev.eigenvalues[:kk])
    conv = np.zeros(len(fine), dtype=bool)
    conv[:kk] = diff <= tol
    worst = float(diff.max()) if kk else math.inf
    digits = math.inf if worst == 0 else -math.log10(worst)
    history = [list(map(complex, s.eigenvalues[:kk])) for s in spectra]
    return replace(fine, converged=conv, stability_digits=digits,
                   meta={**fine.meta, "history": history, "schemes": [getattr(sc, "describe", dict)() for sc in schemes]})


def richardson(values: Sequence[np.ndarray], h: Optional[Sequence[float]] = None,
               ratio: float = 2.0, order: int = 2) -> np.ndarray:
    """Extrapolate results computed at several grid spacings to ``h -> 0``.

    Assumes an error expansion ``c1 h^order + c2 h^(2 order) + ...`` and
    solves for the ``h = 0`` limit exactly through the given points.  When
    ``h`` is omitted the spacings are taken as ``1, 1/ratio, 1/ratio^2, ...``.
    """
    rows = np.array([np.asarray(v, dtype=complex) for v in values])
    n = len(rows)
    if h is None:
        h = [ratio ** (-j) for j in range(n)]
    h = np.asarray(h, dtype=float)
    V = np.column_stack([h ** (order * j) for j in range(n)])
    return np.linalg.solve(V, rows)[0]
