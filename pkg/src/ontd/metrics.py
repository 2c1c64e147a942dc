"""Evaluation metrics: reconstruction error, storage accounting, feature similarity."""

import numpy as np

from .recovery import greedy_match

__all__ = [
    "relative_error",
    "avg_error",
    "compression_ratio",
    "space_savings",
    "similarity",
]


def relative_error(original, recon):
    original = np.asarray(original, dtype=np.float64)
    denom = np.linalg.norm(original.ravel())
    if denom == 0:
        raise ValueError("original has zero norm")
    return float(np.linalg.norm((original - np.asarray(recon)).ravel()) / denom)


def avg_error(originals, recons, relative=True):
    """Mean (relative) Frobenius reconstruction error over paired items."""
    if len(originals) != len(recons):
        raise ValueError(f"{len(originals)} originals vs {len(recons)} reconstructions")
    if not originals:
        raise ValueError("avg_error needs at least one pair")
    errs = []
    for a, b in zip(originals, recons):
        a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
        errs.append(relative_error(a, b) if relative else float(np.linalg.norm((a - b).ravel())))
    return float(np.mean(errs))


def compression_ratio(dims, ranks):
    """Stored numbers ``prod(J) + sum(I_n J_n)`` over the dense size ``prod(I)``."""
    dims = [int(i) for i in dims]
    ranks = [int(j) for j in ranks]
    if len(dims) != len(ranks):
        raise ValueError("dims and ranks must have the same length")
    if any(not 1 <= j <= i for i, j in zip(dims, ranks)):
        raise ValueError(f"ranks {ranks} must satisfy 1 <= J_n <= I_n for dims {dims}")
    stored = int(np.prod(ranks)) + sum(i * j for i, j in zip(dims, ranks))
    return stored / int(np.prod(dims))


def space_savings(dims, ranks):
    return 1.0 - compression_ratio(dims, ranks)


def similarity(extracted, truth):
    """Mean cosine between extracted features and their greedily matched truths.

    Invariant to positive rescaling of any feature; 1 iff every matched
    pair is positively proportional.
    """
    H = np.array([np.ravel(h) for h in extracted], dtype=np.float64)
    G = np.array([np.ravel(g) for g in truth], dtype=np.float64)
    if H.shape != G.shape:
        raise ValueError(f"{H.shape} extracted features vs {G.shape} ground truth")
    hn, gn = np.linalg.norm(H, axis=1), np.linalg.norm(G, axis=1)
    if np.any(hn == 0) or np.any(gn == 0):
        raise ValueError("similarity is undefined for zero-norm features")
    C = (H / hn[:, None]) @ (G / gn[:, None]).T
    perm = greedy_match(C)
    return float(np.mean(C[np.arange(len(perm)), perm]))
