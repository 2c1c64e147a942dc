import numpy as np
import pytest

from ontd.linalg import IndefiniteMatrixError, SPDFactor, jacobi_eig, spd_solve, sym_eig
from ontd.synth import gen_factor

METHODS = ["lapack", "jacobi"]


@pytest.mark.parametrize("method", METHODS)
def test_diagonal_spectrum_sorted_with_axis_vectors(method):
    w, V = sym_eig(np.diag([3.0, 1.0, 2.0]), method=method)
    np.testing.assert_allclose(w, [3.0, 2.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(np.abs(V), np.eye(3)[:, [0, 2, 1]], atol=1e-14)


@pytest.mark.parametrize("method", METHODS)
def test_identity_spectrum(method):
    w, V = sym_eig(np.eye(4), method=method)
    np.testing.assert_allclose(w, np.ones(4), atol=1e-14)
    np.testing.assert_allclose(V.T @ V, np.eye(4), atol=1e-14)


@pytest.mark.parametrize("method", METHODS)
def test_random_symmetric_reconstruction(method):
    rng = np.random.default_rng(0)
    R = rng.standard_normal((8, 8))
    S = R + R.T
    w, V = sym_eig(S, method=method)
    assert np.all(np.diff(w) <= 0)
    scale = max(1.0, np.linalg.norm(S))
    assert np.linalg.norm(V @ np.diag(w) @ V.T - S) <= 1e-10 * scale
    assert np.abs(V.T @ V - np.eye(8)).max() <= 1e-10
    for k in range(8):
        assert np.linalg.norm(S @ V[:, k] - w[k] * V[:, k]) <= 1e-10 * scale


def test_jacobi_agrees_with_lapack():
    rng = np.random.default_rng(1)
    R = rng.standard_normal((12, 12))
    S = R @ R.T
    wl, Vl = sym_eig(S, "lapack")
    wj, Vj = sym_eig(S, "jacobi")
    np.testing.assert_allclose(wj, wl, atol=1e-10 * np.abs(wl).max())
    # distinct eigenvalues + sign convention => identical vectors
    np.testing.assert_allclose(Vj, Vl, atol=1e-8)


def test_jacobi_raw_output_is_a_decomposition():
    S = np.array([[2.0, 1.0], [1.0, 2.0]])
    w, V = jacobi_eig(S)
    np.testing.assert_allclose(sorted(w), [1.0, 3.0], atol=1e-14)
    np.testing.assert_allclose(V @ np.diag(w) @ V.T, S, atol=1e-14)


def test_sign_convention_largest_entry_nonnegative():
    rng = np.random.default_rng(2)
    R = rng.standard_normal((6, 6))
    _, V = sym_eig(R + R.T)
    lead = V[np.argmax(np.abs(V), axis=0), np.arange(6)]
    assert np.all(lead >= 0)


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        sym_eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))


@pytest.mark.parametrize("seed", range(5))
def test_projector_spectrum(seed):
    U = gen_factor(9, 3, seed)
    w, _ = sym_eig(U @ U.T)
    np.testing.assert_allclose(w[:3], 1.0, atol=1e-8)
    np.testing.assert_allclose(w[3:], 0.0, atol=1e-8)


def test_spd_solve_examples():
    B = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(spd_solve(np.eye(2), B), B)
    np.testing.assert_allclose(spd_solve(np.diag([2.0, 4.0]), np.array([2.0, 4.0])), [1.0, 1.0])


def test_spd_solve_residual_and_reuse():
    rng = np.random.default_rng(3)
    R = rng.standard_normal((10, 10))
    A = R @ R.T + np.eye(10)
    F = SPDFactor(A)
    for _ in range(3):
        B = rng.standard_normal((10, 4))
        X = spd_solve(F, B)
        assert np.linalg.norm(A @ X - B) <= 1e-9 * max(1.0, np.linalg.norm(B))


def test_indefinite_reported():
    with pytest.raises(IndefiniteMatrixError):
        SPDFactor(np.diag([1.0, -1.0]))
