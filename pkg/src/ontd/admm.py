"""Per-mode ADMM for the convex projector relaxation.

For one unfolding ``A`` (``I x N``) and target rank ``J`` this solves

    min_K  1/2 ||A - K A||_F^2 + theta ||K||_1
    s.t.   tr(K) = J,  K = K^T,  0 <= K <= I (spectrally),  K >= 0 (entrywise)

by splitting ``K = X = Z = M`` and alternating a ``K`` block, a joint
``(X, Z, M)`` block and a dual step of length ``gamma`` on the three
multipliers.
"""

from dataclasses import dataclass, field, replace
import logging

import numpy as np

from .linalg import SPDFactor
from .prox import (
    project_nonneg,
    project_sym_box_psd,
    project_sym_box_psd_literal,
    shrinkage,
    trace_shift,
)

__all__ = [
    "AdmmParams",
    "AdmmState",
    "AdmmResult",
    "init_state",
    "update_k",
    "update_blocks",
    "update_multipliers",
    "objective",
    "run",
]

log = logging.getLogger(__name__)

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class AdmmParams:
    """Parameters of the mode solver.

    ``dual_stop`` additionally requires the change in the split variables
    (scaled by the penalties) to fall below the tolerance before stopping.
    ``literal_m_step`` swaps in :func:`project_sym_box_psd_literal` for the
    M update (diagnostic use only).
    """

    theta: float = 0.1
    rho1: float = 1.0
    rho2: float = 1.0
    rho3: float = 1.0
    gamma: float = 1.6
    eps: float = 1e-5
    max_iter: int = 1000
    dual_stop: bool = False
    literal_m_step: bool = False

    def __post_init__(self):
        if not self.theta >= 0:
            raise ValueError(f"theta must be >= 0, got {self.theta}")
        for name in ("rho1", "rho2", "rho3"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0 < self.gamma < GOLDEN:
            raise ValueError(f"gamma must lie in (0, {GOLDEN:.6f}), got {self.gamma}")
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")

    @property
    def rho_sum(self):
        return self.rho1 + self.rho2 + self.rho3

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass
class AdmmState:
    """Iterates of one mode solve plus the cached Gram matrix factorisation."""

    K: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    M: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    L3: np.ndarray
    J: int
    gram: np.ndarray
    factor: SPDFactor
    iter: int = 0
    residual_history: list = field(default_factory=list)
    dual_history: list = field(default_factory=list)
    objective_history: list = field(default_factory=list)
    trace_history: list = field(default_factory=list)


@dataclass
class AdmmResult:
    K: np.ndarray
    converged: bool
    iterations: int
    residuals: np.ndarray  # (iterations, 3): ||K-X||, ||K-Z||, ||K-M||
    dual_residuals: np.ndarray  # (iterations, 3)
    objective: np.ndarray
    trace: np.ndarray
    asymmetry: float
    state: AdmmState

    @property
    def final_residual(self):
        return float(self.residuals[-1].max()) if len(self.residuals) else np.inf


def init_state(Afold, J, p):
    """Feasible start ``K = X = Z = M = (J/I) Id`` with zero multipliers."""
    A = np.asarray(Afold, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"unfolding must be a matrix, got shape {A.shape}")
    I = A.shape[0]
    if int(J) != J or not 1 <= J <= I:
        raise ValueError(f"rank J={J} must be an integer in [1, {I}]")
    J = int(J)
    gram = A @ A.T
    factor = SPDFactor(gram + p.rho_sum * np.eye(I))
    K0 = (J / I) * np.eye(I)
    zeros = np.zeros((I, I))
    return AdmmState(
        K=K0, X=K0.copy(), Z=K0.copy(), M=K0.copy(),
        L1=zeros, L2=zeros.copy(), L3=zeros.copy(),
        J=J, gram=gram, factor=factor,
    )


def update_k(state, p):
    """K step: ``B = (P + Q)(A A^T + rho I)^{-1}`` followed by a trace shift."""
    s = state
    P = s.gram + s.L1 + s.L2 + s.L3
    Q = p.rho1 * s.X + p.rho2 * s.Z + p.rho3 * s.M
    # B H = P + Q with H symmetric  <=>  H B^T = (P + Q)^T
    B = s.factor.solve((P + Q).T).T
    return trace_shift(B, s.J)


def update_blocks(state, p):
    """Joint (X, Z, M) step from the freshly updated K."""
    s = state
    X = shrinkage(s.K - s.L1 / p.rho1, p.theta / p.rho1)
    Z = project_nonneg(s.K - s.L2 / p.rho2)
    project = project_sym_box_psd_literal if p.literal_m_step else project_sym_box_psd
    M = project(s.K - s.L3 / p.rho3)
    return X, Z, M


def update_multipliers(state, p):
    s = state
    g = p.gamma
    return (
        s.L1 - g * p.rho1 * (s.K - s.X),
        s.L2 - g * p.rho2 * (s.K - s.Z),
        s.L3 - g * p.rho3 * (s.K - s.M),
    )


def objective(K, X, Afold, theta):
    """``1/2 ||A - K A||_F^2 + theta ||X||_1`` with ``X`` standing in for ``K`` in the l1 term."""
    A = np.asarray(Afold, dtype=np.float64)
    R = A - np.asarray(K) @ A
    return 0.5 * float(np.sum(R * R)) + theta * float(np.sum(np.abs(X)))


def step(state, p):
    """One full ADMM iteration, in place. Returns the primal residual triple."""
    s = state
    X_old, Z_old, M_old = s.X, s.Z, s.M
    s.K = update_k(s, p)
    s.X, s.Z, s.M = update_blocks(s, p)
    s.L1, s.L2, s.L3 = update_multipliers(s, p)
    s.iter += 1
    r = (
        float(np.linalg.norm(s.K - s.X)),
        float(np.linalg.norm(s.K - s.Z)),
        float(np.linalg.norm(s.K - s.M)),
    )
    s.residual_history.append(r)
    s.dual_history.append((
        p.rho1 * float(np.linalg.norm(s.X - X_old)),
        p.rho2 * float(np.linalg.norm(s.Z - Z_old)),
        p.rho3 * float(np.linalg.norm(s.M - M_old)),
    ))
    s.trace_history.append(float(np.trace(s.K)))
    return r


def run(Afold, J, p=None, state=None):
    """Iterate until the relative primal residual falls below ``p.eps``.

    The stop test is ``max(||K-X||, ||K-Z||, ||K-M||) <= eps * max(1, ||K||_F)``.
    Hitting ``max_iter`` is not an error: the result carries
    ``converged=False`` and the caller decides.

    Parameters
    ----------
    Afold : (I, N) array_like
        Nonnegative mode unfolding.
    J : int
        Target rank for this mode.
    p : AdmmParams, optional
    state : AdmmState, optional
        Warm start; defaults to :func:`init_state`.

    Returns
    -------
    AdmmResult
    """
    p = AdmmParams() if p is None else p
    A = np.asarray(Afold, dtype=np.float64)
    if A.min(initial=0.0) < 0:
        raise ValueError("unfolding must be nonnegative")
    s = init_state(A, J, p) if state is None else state
    converged = False
    while s.iter < p.max_iter:
        r = step(s, p)
        s.objective_history.append(objective(s.K, s.X, A, p.theta))
        tol = p.eps * max(1.0, float(np.linalg.norm(s.K)))
        if max(r) <= tol and (not p.dual_stop or max(s.dual_history[-1]) <= tol):
            converged = True
            break
    asym = float(np.linalg.norm(s.K - s.K.T))
    if not converged:
        log.warning(
            "ADMM hit max_iter=%d with residual %.3e (rank %d)",
            p.max_iter, max(s.residual_history[-1]) if s.residual_history else np.nan, s.J,
        )
    log.debug("ADMM: %d iterations, asymmetry %.3e", s.iter, asym)
    return AdmmResult(
        K=s.K.copy(),
        converged=converged,
        iterations=s.iter,
        residuals=np.array(s.residual_history).reshape(-1, 3),
        dual_residuals=np.array(s.dual_history).reshape(-1, 3),
        objective=np.array(s.objective_history),
        trace=np.array(s.trace_history),
        asymmetry=asym,
        state=s,
    )
