"""Independent reference computations used by the tests."""

import mpmath
import numpy as np
from scipy.linalg import eig
from scipy.optimize import linear_sum_assignment

from susyfactory.coeff import CoeffFn
from susyfactory.discretize import OscillatorBasis, discretize
from susyfactory.operator import make_generators


def mp_eigenvalues(M, dps=30):
    """Eigenvalues of a double matrix in extended precision, sorted by real part.

    Used where the matrix is far from normal and double-precision QR loses
    more digits than the tolerance allows.
    """
    M = np.asarray(M)
    with mpmath.workdps(dps):
        rows = [[mpmath.mpc(complex(v)) for v in row] for row in M]
        ev = mpmath.eig(mpmath.matrix(rows), left=False, right=False)
        out = np.array([complex(e) for e in ev])
    return out[np.lexsort((out.imag, out.real))]


def multiset_distance(a, b):
    """Largest gap after optimally pairing two equal-length value sets."""
    a, b = np.asarray(a), np.asarray(b)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max()) if len(r) else 0.0


EPS = np.finfo(float).eps


def eigen_condition_bound(M):
    """Largest first-order rounding bound ``eps * kappa_i * ||M|| / max(1, |lam_i|)``.

    ``kappa_i`` is the condition number of eigenvalue ``i`` from the left and
    right eigenvectors.  Where this exceeds a tolerance, no double-precision
    eigensolver can certify agreement at that tolerance.
    """
    lam, vl, vr = eig(M, left=True, right=True)
    overlap = np.abs(np.sum(vl.conj() * vr, axis=0))
    with np.errstate(divide="ignore"):
        kappa = 1.0 / overlap
    return float(np.max(EPS * kappa * np.linalg.norm(M, 2) / np.maximum(1.0, np.abs(lam))))


def relative_multiset_distance(a, b):
    """Like :func:`multiset_distance` with each gap divided by ``max(1, |a_i|)``."""
    a, b = np.asarray(a), np.asarray(b)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float((cost[r, c] / np.maximum(1.0, np.abs(a[r]))).max())


def random_superpotential(rng, parity=None, degree=3):
    powers = [j for j in range(degree + 1) if parity is None or j % 2 == parity]
    d = {(j, j % 2): complex(*rng.normal(size=2)) for j in powers if rng.random() < 0.7}
    return CoeffFn.from_dict(d or {(powers[-1], powers[-1] % 2): 1.0})


def random_generator_matrices(rng, index):
    """Oscillator-basis matrices ``A_m, B_m`` of a random generator pair.

    Conventions cycle with ``index``; type2 draws superpotentials of equal
    parity so the even-product rule holds.
    """
    conv = ("type1", "type2", "type3")[index % 3]
    if conv == "type2":
        p = int(rng.integers(2))
        gen = make_generators(conv, random_superpotential(rng, p), random_superpotential(rng, p))
    else:
        gen = make_generators(conv, random_superpotential(rng))
    n = int(rng.integers(8, 61))
    basis = OscillatorBasis(n, omega=float(rng.uniform(0.5, 2.0)))
    return conv, discretize(gen.A, basis).matrix, discretize(gen.B, basis).matrix
