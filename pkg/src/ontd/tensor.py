"""Dense tensors: unfolding, folding, mode-n products and norms.

Tensors are plain ``float64`` numpy arrays in C order, so the last index
varies fastest in memory. The mode-``n`` unfolding orders its columns
cyclically as ``(i_{n+1}, ..., i_d, i_1, ..., i_{n-1})`` with ``i_{n-1}``
varying fastest, which makes

    unfold(S x_1 U1 ... x_d Ud, n)
        == Un @ unfold(S, n) @ kron(U_{n+1}, ..., U_d, U_1, ..., U_{n-1}).T

hold exactly. Modes are 0-based throughout the Python API.
"""

import numpy as np

__all__ = [
    "as_tensor",
    "unfold",
    "fold",
    "mode_product",
    "multi_mode_product",
    "frob_norm",
    "kron",
    "vec",
    "unvec",
]


def as_tensor(values, nonneg=False, name="tensor"):
    """Return ``values`` as a finite float64 array (copying only if needed)."""
    T = np.asarray(values, dtype=np.float64)
    if T.ndim < 1:
        raise ValueError(f"{name} must have at least one mode")
    if any(s < 1 for s in T.shape):
        raise ValueError(f"{name} has an empty dimension: {T.shape}")
    if not np.all(np.isfinite(T)):
        raise ValueError(f"{name} contains non-finite values")
    if nonneg and T.min() < 0:
        raise ValueError(f"{name} must be nonnegative (min={T.min():g})")
    return T


def _check_mode(n, d):
    if not (0 <= n < d):
        raise IndexError(f"mode {n} out of range for a {d}-way tensor")


def _cyclic_axes(n, d):
    return [n] + list(range(n + 1, d)) + list(range(n))


def unfold(T, n):
    """Mode-``n`` unfolding with the cyclic column order described above."""
    T = np.asarray(T, dtype=np.float64)
    _check_mode(n, T.ndim)
    return np.ascontiguousarray(np.transpose(T, _cyclic_axes(n, T.ndim))).reshape(
        T.shape[n], -1
    )


def fold(M, n, dims):
    """Inverse of :func:`unfold` for a tensor of shape ``dims``."""
    M = np.asarray(M, dtype=np.float64)
    dims = tuple(int(s) for s in dims)
    _check_mode(n, len(dims))
    if M.ndim != 2 or M.shape[0] != dims[n] or M.size != int(np.prod(dims)):
        raise ValueError(
            f"cannot fold a {M.shape} matrix at mode {n} into dims {dims}"
        )
    axes = _cyclic_axes(n, len(dims))
    T = M.reshape([dims[a] for a in axes])
    return np.ascontiguousarray(np.transpose(T, np.argsort(axes)))


def mode_product(T, M, n):
    """Mode-``n`` product ``T x_n M``: contracts mode ``n`` with the columns of ``M``."""
    T = np.asarray(T, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    _check_mode(n, T.ndim)
    if M.ndim != 2 or M.shape[1] != T.shape[n]:
        raise ValueError(
            f"matrix of shape {M.shape} does not match mode {n} of size {T.shape[n]}"
        )
    return np.ascontiguousarray(np.moveaxis(np.tensordot(M, T, axes=(1, n)), 0, n))


def multi_mode_product(T, matrices, transpose=False):
    """Apply ``T x_1 M1 x_2 M2 ...``; ``None`` entries are skipped (identity)."""
    out = np.asarray(T, dtype=np.float64)
    for n, M in enumerate(matrices):
        if M is None:
            continue
        out = mode_product(out, M.T if transpose else M, n)
    return out


def frob_norm(T):
    return float(np.linalg.norm(np.asarray(T, dtype=np.float64).ravel()))


def kron(*mats):
    """Kronecker product of one or more matrices (first factor varies slowest).

    Only meant for small test oracles; the library never materialises the
    Kronecker chain of the factor matrices.
    """
    out = np.ones((1, 1))
    for M in mats:
        out = np.kron(out, np.asarray(M, dtype=np.float64))
    return out


def vec(M):
    """Column-stacking vectorisation, so ``kron(A, B) @ vec(X) == vec(B @ X @ A.T)``."""
    return np.asarray(M, dtype=np.float64).ravel(order="F")


def unvec(v, shape):
    return np.asarray(v, dtype=np.float64).reshape(shape, order="F")
