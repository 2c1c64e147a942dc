"""Symmetric eigendecomposition and SPD solves used by the ADMM updates."""

from typing import NamedTuple

import numpy as np
import scipy.linalg

__all__ = [
    "EigenPair",
    "IndefiniteMatrixError",
    "SPDFactor",
    "jacobi_eig",
    "spd_factor",
    "spd_solve",
    "sym_eig",
]


class IndefiniteMatrixError(np.linalg.LinAlgError):
    """Raised when a Cholesky factorisation meets a non-positive pivot."""


class EigenPair(NamedTuple):
    values: np.ndarray  # descending
    vectors: np.ndarray  # column k pairs with values[k]


def jacobi_eig(S, tol=1e-12, max_sweeps=100):
    """Cyclic Jacobi eigenvalue iteration for a symmetric matrix.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||S||_F)``. Returns unsorted ``(values, vectors)``.
    """
    A = np.array(S, dtype=np.float64)
    n = A.shape[0]
    V = np.eye(n)
    thresh = tol * max(1.0, np.linalg.norm(A))
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                # Rutishauser's stable form of the rotation angle
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau)) if tau != 0 else 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    else:
        raise np.linalg.LinAlgError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.diag(A).copy(), V


def sym_eig(S, method="lapack"):
    """Full eigendecomposition of a symmetric matrix.

    The input is symmetrised first. Eigenvalues come back in descending
    order (ties keep solver order) and each eigenvector is signed so its
    largest-magnitude entry is nonnegative.

    Parameters
    ----------
    S : (n, n) array_like
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls ``numpy.linalg.eigh``; ``"jacobi"`` uses
        :func:`jacobi_eig`, which is slower but self-contained.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ValueError("matrix contains non-finite entries")
    S = 0.5 * (S + S.T)
    if method == "lapack":
        w, V = np.linalg.eigh(S)
    elif method == "jacobi":
        w, V = jacobi_eig(S)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    if V.size:
        lead = V[np.argmax(np.abs(V), axis=0), np.arange(V.shape[1])]
        V = V * np.where(lead < 0, -1.0, 1.0)
    return EigenPair(w, V)


class SPDFactor:
    """Cholesky factorisation of an SPD matrix, reusable across solves."""

    def __init__(self, A):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("matrix contains non-finite entries")
        try:
            self._cho = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise IndefiniteMatrixError(f"matrix is not positive definite: {exc}") from None
        self.shape = A.shape

    def solve(self, B):
        return scipy.linalg.cho_solve(self._cho, np.asarray(B, dtype=np.float64), check_finite=False)


def spd_factor(A):
    return SPDFactor(A)


def spd_solve(A, B):
    """Solve ``A X = B`` for symmetric positive-definite ``A``.

    ``A`` may be a matrix or an already computed :class:`SPDFactor`.
    """
    factor = A if isinstance(A, SPDFactor) else SPDFactor(A)
    return factor.solve(B)
