"""Closed-form proximal maps and projections used by the ADMM block updates."""

import numpy as np

from .linalg import sym_eig

__all__ = [
    "shrinkage",
    "project_nonneg",
    "project_sym_box_psd",
    "project_sym_box_psd_literal",
    "trace_shift",
]


def shrinkage(X, tau):
    """Soft thresholding ``sign(x) * max(|x| - tau, 0)``, the prox of ``tau * ||.||_1``."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    X = np.asarray(X, dtype=np.float64)
    return np.sign(X) * np.maximum(np.abs(X) - tau, 0.0)


def project_nonneg(X):
    return np.maximum(np.asarray(X, dtype=np.float64), 0.0)


def project_sym_box_psd(B, method="lapack"):
    """Euclidean projection onto ``{M = M^T, 0 <= M <= I}`` (spectral box).

    Symmetrise, eigendecompose, clip the spectrum to ``[0, 1]`` and
    reassemble.
    """
    B = np.asarray(B, dtype=np.float64)
    w, V = sym_eig(0.5 * (B + B.T), method=method)
    M = (V * np.clip(w, 0.0, 1.0)) @ V.T
    return 0.5 * (M + M.T)


def project_sym_box_psd_literal(B, method="lapack"):
    """Variant that clips the spectrum of ``B + B^T`` to ``[0, 1]`` and halves it.

    The spectrum of the result lies in ``[0, 1/2]``, so this is not the
    projection onto the spectral box. Kept for A/B comparison only.
    """
    B = np.asarray(B, dtype=np.float64)
    w, V = sym_eig(B + B.T, method=method)
    M = 0.5 * (V * np.clip(w, 0.0, 1.0)) @ V.T
    return 0.5 * (M + M.T)


def trace_shift(B, J):
    """Shift the diagonal of ``B`` so that its trace equals ``J``."""
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {B.shape}")
    n = B.shape[0]
    return B - ((np.trace(B) - J) / n) * np.eye(n)
