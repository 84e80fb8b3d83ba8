import numpy as np
import pytest

from oracles import (
    eigen_condition_bound, multiset_distance, random_generator_matrices, relative_multiset_distance,
)
from susyfactory.discretize import OscillatorBasis, discretize
from susyfactory.errors import NoConvergence
from susyfactory.presets import PUBLISHED
from susyfactory.operator import build_pair, parse_operator
from susyfactory.spectra import (
    Spectrum, converge, eigenvalues, filter_physical, hessenberg, hessenberg_qr, residuals,
    richardson, sort_eigenvalues, thread_cap,
)


# -- small exact cases -------------------------------------------------------------------

@pytest.mark.parametrize("method", ["lapack", "qr"])
def test_two_by_two(method):
    ev = eigenvalues(np.array([[0, 1], [1, 0]]), method=method).eigenvalues
    np.testing.assert_allclose(ev, [-1, 1], atol=1e-12)
    ev = eigenvalues(np.array([[0, 1], [-1, 0]]), method=method).eigenvalues
    np.testing.assert_allclose(ev, [-1j, 1j], atol=1e-12)


@pytest.mark.parametrize("method", ["lapack", "qr"])
def test_diagonal_exact(method):
    d = np.array([3.0, -1.0, 2.5 + 1j, 0.0])
    ev = eigenvalues(np.diag(d), method=method).eigenvalues
    np.testing.assert_allclose(ev, sort_eigenvalues(d), atol=1e-12)


def test_harmonic_minus_member():
    h = build_pair("type1", "i*x").h_minus
    ev = eigenvalues(discretize(h, OscillatorBasis(64))).eigenvalues[:6]
    np.testing.assert_allclose(ev, [0, 2, 4, 6, 8, 10], atol=1e-10)


def test_input_validation():
    with pytest.raises(ValueError):
        eigenvalues(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        eigenvalues(np.zeros((0, 0)))


# -- own QR against LAPACK -------------------------------------------------------------

def test_hessenberg_is_similarity(rng):
    A = rng.normal(size=(20, 20)) + 1j * rng.normal(size=(20, 20))
    H = hessenberg(A)
    assert np.allclose(np.tril(H, -2), 0)
    assert np.trace(H) == pytest.approx(np.trace(A))
    assert np.linalg.norm(H) == pytest.approx(np.linalg.norm(A))


@pytest.mark.parametrize("n", [5, 20, 60])
def test_qr_matches_lapack(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    ours = eigenvalues(A, method="qr").eigenvalues
    ref = eigenvalues(A, method="lapack").eigenvalues
    assert multiset_distance(ours, ref) <= 1e-10 * np.linalg.norm(A)


def test_qr_on_operator_matrix():
    h = build_pair("type1", "i*k*x^3 - i*g*x^2", env={"k": 1, "g": 1}).h_minus
    m = discretize(h, OscillatorBasis(40, omega=2.0))
    ours = eigenvalues(m, method="qr").eigenvalues
    ref = eigenvalues(m, method="lapack").eigenvalues
    assert multiset_distance(ours, ref) <= 1e-8 * np.linalg.norm(m.matrix)


def test_qr_iteration_cap_reports_partial(rng):
    A = rng.normal(size=(30, 30))
    with pytest.raises(NoConvergence) as info:
        hessenberg_qr(A, max_iter_per_eig=1)
    assert info.value.partial is not None


# -- invariants -----------------------------------------------------------------------

def test_residuals_small(rng):
    h = build_pair("type2", "x^2", "x^4").h_plus
    m = discretize(h, OscillatorBasis(60, omega=2.0))
    ev = eigenvalues(m).eigenvalues
    sample = ev[rng.choice(len(ev), 10, replace=False)]
    assert np.all(residuals(m, sample) <= 1e-8)


def test_similarity_invariance(rng):
    for n in (10, 30, 50):
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        S = np.eye(n) + 0.3 * rng.normal(size=(n, n)) / np.sqrt(n)
        assert np.linalg.cond(S) < 100
        a = eigenvalues(M).eigenvalues
        b = eigenvalues(np.linalg.solve(S, M @ S)).eigenvalues
        assert multiset_distance(a, b) <= 1e-8 * max(1.0, np.linalg.norm(M))


def test_trace(rng):
    for n in (10, 40):
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        for method in ("lapack", "qr"):
            ev = eigenvalues(M, method=method).eigenvalues
            assert abs(ev.sum() - np.trace(M)) <= 1e-9 * np.linalg.norm(M) * n


def test_ab_ba_share_spectra(rng):
    checked = 0
    for i in range(60):
        _, A, B = random_generator_matrices(rng, i)
        ab, ba = A @ B, B @ A
        bound = max(eigen_condition_bound(ab), eigen_condition_bound(ba))
        gap = relative_multiset_distance(eigenvalues(ab).eigenvalues, eigenvalues(ba).eigenvalues)
        if bound <= 1e-9:
            assert gap <= 1e-8
            checked += 1
        else:
            # ill-conditioned draw: the gap is still bounded by rounding
            assert gap <= 10 * bound
    assert checked >= 20


def test_sorting_total_and_deterministic(rng):
    vals = np.array([1 + 1j, 1 - 1j, 0.5, 1 + 0j, -2 + 3j])
    expected = np.array([-2 + 3j, 0.5, 1 - 1j, 1 + 0j, 1 + 1j])
    for _ in range(10):
        np.testing.assert_array_equal(sort_eigenvalues(rng.permutation(vals)), expected)


# -- filtering and convergence -------------------------------------------------------

def test_filter_physical():
    s = Spectrum.from_values([0, 2, 4])
    assert np.array_equal(filter_physical(s, 1e-6).eigenvalues, s.eigenvalues)
    s = Spectrum.from_values([1 + 0.5j, 1 - 0.5j, 3 + 1e-9j])
    f = filter_physical(s, 1e-6)
    assert f.eigenvalues.tolist() == [3 + 1e-9j] and f.dropped == 2
    assert len(filter_physical(Spectrum.from_values([]), 1e-6)) == 0


def test_filter_physical_keeps_real_branch_of_rotated_quartic():
    from susyfactory.discretize import FiniteDifference
    h = build_pair("type1", "x^2").h_plus
    kept = []
    for theta in (0.5, 0.55):
        s = eigenvalues(discretize(h, FiniteDifference(-4, 4, 400, theta, contour="pt")))
        kept.append(filter_physical(s, 1e-2).eigenvalues[:4])
    np.testing.assert_allclose(kept[0], kept[1], atol=1e-3)
    assert np.all(np.abs(kept[0].imag) < 1e-6)


def test_converge_harmonic():
    h = parse_operator("1", "0", "x^2")
    s = converge(h, [OscillatorBasis(32), OscillatorBasis(64)], tol=1e-8, k=5)
    assert s.converged_count >= 5 and s.stability_digits >= 8
    assert len(s.meta["history"]) == 2


def test_converge_flags_unconverged():
    h = build_pair("type1", "i*k*x^3 - i*g*x^2", env={"k": 1, "g": 1}).h_minus
    s = converge(h, [OscillatorBasis(8), OscillatorBasis(10)], tol=1e-10, k=5)
    assert s.converged_count < 5


def test_converge_sextic_minus_member():
    h = build_pair("type1", "i*k*x^3 - i*g*x^2", env={"k": 1, "g": 1}).h_minus
    schemes = [OscillatorBasis(n, omega=2.0) for n in (150, 250, 400)]
    s = converge(h, schemes, tol=5e-6, k=5)
    assert s.converged_count >= 5
    np.testing.assert_allclose(s.eigenvalues[:5], PUBLISHED["table1"][(1, 1)]["E-"], atol=5e-6)


def test_converge_quadruplet_member():
    h = build_pair("type2", "x^2", "x^4").h_plus
    s = converge(h, [OscillatorBasis(n, omega=2.0) for n in (120, 200)], tol=1e-6, k=4)
    np.testing.assert_allclose(s.eigenvalues[:4], PUBLISHED["table4"]["H3+"], atol=1e-6)


def test_converge_needs_two_schemes():
    with pytest.raises(ValueError):
        converge(parse_operator("1", "0", "x^2"), [OscillatorBasis(8)], tol=1e-8, k=2)


def test_converge_parallel_is_deterministic(monkeypatch):
    h = parse_operator("1", "0", "x^4")
    schemes = [OscillatorBasis(n, omega=2.0) for n in (30, 40, 50)]
    serial = converge(h, schemes, tol=1e-6, k=4, workers=1)
    parallel = converge(h, schemes, tol=1e-6, k=4, workers=3)
    np.testing.assert_array_equal(serial.eigenvalues, parallel.eigenvalues)
    monkeypatch.setenv("SUSYFACTORY_THREADS", "4")
    assert thread_cap() == 4
    monkeypatch.setenv("SUSYFACTORY_THREADS", "junk")
    assert thread_cap() == 1


def test_richardson_removes_h2_error():
    hs = [0.4, 0.2, 0.1]
    rows = [np.array([1 + 3 * h**2 - 2 * h**4]) for h in hs]
    assert richardson(rows, h=hs)[0] == pytest.approx(1.0, abs=1e-12)
    rows = [np.array([5 + 3 * (2.0 ** -j) ** 2]) for j in range(2)]
    assert richardson(rows)[0] == pytest.approx(5.0, abs=1e-12)
