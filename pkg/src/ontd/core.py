"""Core tensor solve and reconstruction for (partial) ONTD models."""

from dataclasses import dataclass
import logging

import numpy as np

from .recovery import check_factor
from .tensor import frob_norm, multi_mode_product, unfold

__all__ = ["OntdModel", "solve_core", "reconstruct", "rowwise_norm_check"]

log = logging.getLogger(__name__)


@dataclass
class OntdModel:
    """Core tensor plus one factor per mode; ``None`` marks an identity factor."""

    core: np.ndarray
    factors: list

    def __post_init__(self):
        self.core = np.asarray(self.core, dtype=np.float64)
        self.factors = list(self.factors)
        if len(self.factors) != self.core.ndim:
            raise ValueError(
                f"{len(self.factors)} factors given for a {self.core.ndim}-way core"
            )
        for n, U in enumerate(self.factors):
            if U is not None and U.shape[1] != self.core.shape[n]:
                raise ValueError(
                    f"factor {n} has {U.shape[1]} columns, core mode has {self.core.shape[n]}"
                )

    @property
    def dims(self):
        return tuple(
            self.core.shape[n] if U is None else U.shape[0]
            for n, U in enumerate(self.factors)
        )

    @property
    def ranks(self):
        return self.core.shape

    @property
    def identity_modes(self):
        return tuple(n for n, U in enumerate(self.factors) if U is None)

    def validate(self, orth_tol=1e-8):
        if self.core.min(initial=0.0) < 0:
            raise ValueError("core tensor has negative entries")
        for U in self.factors:
            if U is not None:
                check_factor(U, orth_tol=orth_tol)
        return self


def _check_factors(A, factors):
    if len(factors) != A.ndim:
        raise ValueError(f"{len(factors)} factors given for a {A.ndim}-way tensor")
    for n, U in enumerate(factors):
        if U is None:
            continue
        if U.ndim != 2 or U.shape[0] != A.shape[n]:
            raise ValueError(f"factor {n} has shape {U.shape}, tensor mode has size {A.shape[n]}")
        err = np.abs(U.T @ U - np.eye(U.shape[1])).max(initial=0.0)
        if err > 1e-6:
            log.warning(
                "factor %d is not column-orthonormal (max |U^T U - I| = %.2e); "
                "the core is still computed by transposed mode products", n, err,
            )


def solve_core(A, factors, return_clamped=False):
    """Nonnegative core ``max(A x_1 U1^T ... x_d Ud^T, 0)``.

    With column-orthonormal factors this is the projected least-squares
    solution, computed without forming the Kronecker product of the factors.
    Negative round-off entries are clamped to zero; pass
    ``return_clamped=True`` to also get how many were clamped.
    """
    A = np.asarray(A, dtype=np.float64)
    _check_factors(A, factors)
    S = multi_mode_product(A, factors, transpose=True)
    neg = S < 0
    n_clamped = int(neg.sum())
    if n_clamped:
        S = np.where(neg, 0.0, S)
    return (S, n_clamped) if return_clamped else S


def reconstruct(model):
    return multi_mode_product(model.core, model.factors)


def rowwise_norm_check(A, model, n):
    """Per class ``j`` of mode ``n``: ``(||S_(n)[j, :]||, ||A_(n)[T_j, :]||)``.

    ``T_j`` is the row support of column ``j`` of the mode-``n`` factor; an
    identity mode has singleton classes.
    """
    A = np.asarray(A, dtype=np.float64)
    Sn = unfold(model.core, n)
    An = unfold(A, n)
    U = model.factors[n]
    pairs = []
    for j in range(Sn.shape[0]):
        T = [j] if U is None else np.flatnonzero(U[:, j] > 0)
        pairs.append((float(np.linalg.norm(Sn[j])), frob_norm(An[T])))
    return np.array(pairs)
