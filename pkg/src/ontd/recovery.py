"""Turn projector matrices into nonnegative orthonormal factor matrices.

A nonnegative matrix with orthonormal columns has at most one nonzero per
row, so it is fully described by a hard clustering of its rows plus one
unit vector per cluster. :func:`recover_factor` gets the clustering from
the top eigenvectors of an (approximate) projector ``K``;
:func:`exact_factor_from_unfolding` reads it directly off an exactly
decomposable unfolding, whose rows in the same cluster are proportional.
"""

from dataclasses import dataclass
import warnings

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from .linalg import sym_eig

__all__ = [
    "ClusterAssignment",
    "RecoveryError",
    "check_factor",
    "cluster_projector",
    "exact_factor_from_unfolding",
    "factor_from_assignment",
    "greedy_match",
    "kmeans",
    "match_factors",
    "recover_factor",
]

UNASSIGNED = -1


class RecoveryError(RuntimeError):
    pass


@dataclass(frozen=True)
class ClusterAssignment:
    """Row -> cluster map. ``labels[i] == -1`` marks an unassigned (zero) row."""

    labels: np.ndarray
    k: int

    @property
    def index_sets(self):
        return [np.flatnonzero(self.labels == j) for j in range(self.k)]

    @property
    def sizes(self):
        return np.bincount(self.labels[self.labels >= 0], minlength=self.k)

    @property
    def n_unassigned(self):
        return int(np.sum(self.labels == UNASSIGNED))

    @classmethod
    def from_factor(cls, U, tol=1e-10):
        U = np.asarray(U)
        labels = np.where(U.max(axis=1) > tol, U.argmax(axis=1), UNASSIGNED)
        return cls(labels=labels, k=U.shape[1])


def check_factor(U, orth_tol=1e-8, support_tol=1e-10):
    """Raise ``ValueError`` unless ``U`` is nonnegative, column-orthonormal, one nonzero per row."""
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2:
        raise ValueError(f"factor must be a matrix, got shape {U.shape}")
    if U.min(initial=0.0) < 0:
        raise ValueError(f"factor has negative entries (min={U.min():g})")
    gram_err = np.abs(U.T @ U - np.eye(U.shape[1])).max(initial=0.0)
    if gram_err > orth_tol:
        raise ValueError(f"factor columns are not orthonormal (max |U^T U - I| = {gram_err:.2e})")
    if np.any(np.sum(U > support_tol, axis=1) > 1):
        raise ValueError("factor has a row with more than one nonzero")
    return U


def kmeans(points, k, seed=0, n_init=10):
    """Lloyd's k-means with k-means++ seeding, keeping the best of ``n_init`` restarts."""
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k={k} out of range for {X.shape[0]} points")
    km = KMeans(n_clusters=k, init="k-means++", n_init=n_init, random_state=int(seed))
    with warnings.catch_warnings():
        # duplicate points are handled below as empty clusters
        warnings.simplefilter("ignore", ConvergenceWarning)
        labels = km.fit_predict(X)
    return ClusterAssignment(labels=labels.astype(np.int64), k=k)


def cluster_projector(K, J, seed=0):
    """Cluster the rows of the top-``J`` eigenvectors of ``(K + K^T)/2``."""
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"projector must be square, got shape {K.shape}")
    if not 1 <= J <= K.shape[0]:
        raise ValueError(f"rank J={J} must be in [1, {K.shape[0]}]")
    _, V = sym_eig(K)
    return kmeans(V[:, :J], J, seed=seed)


def factor_from_assignment(K, assignment):
    """Column ``j`` is the leading eigenvector of ``K[T_j, T_j]`` (absolute, unit norm)."""
    K = np.asarray(K, dtype=np.float64)
    S = 0.5 * (K + K.T)
    U = np.zeros((K.shape[0], assignment.k))
    for j, T in enumerate(assignment.index_sets):
        if T.size == 0:
            raise RecoveryError(f"cluster {j} is empty; K does not support rank {assignment.k}")
        _, V = sym_eig(S[np.ix_(T, T)])
        u = np.abs(V[:, 0])
        nrm = np.linalg.norm(u)
        if nrm == 0:
            raise RecoveryError(f"cluster {j} has a zero leading eigenvector")
        U[T, j] = u / nrm
    return U


def recover_factor(K, J, seed=0, return_assignment=False):
    """Nonnegative orthonormal ``I x J`` factor from an approximate projector ``K``.

    Disjoint column supports make the result exactly orthonormal and
    one-nonzero-per-row regardless of how accurate ``K`` is.
    """
    assignment = cluster_projector(K, J, seed=seed)
    U = factor_from_assignment(K, assignment)
    return (U, assignment) if return_assignment else U


def exact_factor_from_unfolding(Afold, J, tol=1e-8):
    """Read the factor off an exactly orthogonally decomposable unfolding.

    Rows are grouped by proportionality (cosine >= 1 - tol against the
    group's first row); within a group the entry for row ``t`` is
    ``||A[t]|| / sqrt(sum of squared row norms in the group)``. Rows whose
    norm is below ``1e-12 * max row norm`` become zero rows of the factor.
    Columns follow the order in which groups are first met.
    """
    A = np.asarray(Afold, dtype=np.float64)
    norms = np.linalg.norm(A, axis=1)
    live = norms > 1e-12 * norms.max(initial=0.0)
    reps = []  # unit representative of each group
    labels = np.full(A.shape[0], UNASSIGNED)
    for t in np.flatnonzero(live):
        a = A[t] / norms[t]
        for g, r in enumerate(reps):
            if a @ r >= 1.0 - tol:
                labels[t] = g
                break
        else:
            labels[t] = len(reps)
            reps.append(a)
    if len(reps) != J:
        raise RecoveryError(
            f"found {len(reps)} proportional row groups, expected {J}: "
            "input is not orthogonally decomposable at this tolerance"
        )
    U = np.zeros((A.shape[0], J))
    for g in range(J):
        T = labels == g
        U[T, g] = norms[T] / np.linalg.norm(norms[T])
    return U


def greedy_match(C):
    """Greedy maximum matching on a score matrix.

    Returns ``perm`` with ``perm[i]`` the column of ``C`` paired to row ``i``.
    Ties go to the lowest (row, column) index.
    """
    C = np.array(C, dtype=np.float64)
    n, m = C.shape
    if n > m:
        raise ValueError("need at least as many columns as rows to match")
    perm = np.full(n, -1)
    for _ in range(n):
        i, j = np.unravel_index(np.argmax(C), C.shape)
        perm[i] = j
        C[i, :] = -np.inf
        C[:, j] = -np.inf
    return perm


def match_factors(U, V):
    """Align the columns of ``V`` to those of ``U``.

    Returns ``(perm, max_error)`` where ``V[:, perm]`` is the aligned factor
    and ``max_error = max |U - V[:, perm]|``.
    """
    U = np.asarray(U, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    if U.shape != V.shape:
        raise ValueError(f"shape mismatch: {U.shape} vs {V.shape}")
    perm = greedy_match(np.abs(U.T @ V))
    return perm, float(np.abs(U - V[:, perm]).max(initial=0.0))
