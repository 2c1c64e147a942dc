"""Full and partial ONTD: per-mode ADMM, factor recovery, core solve, metrics."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import time

import numpy as np

from .admm import AdmmParams, run
from .core import OntdModel, reconstruct, solve_core
from .metrics import compression_ratio, relative_error
from .recovery import exact_factor_from_unfolding, recover_factor
from .tensor import as_tensor, unfold

__all__ = [
    "ModeDiagnostics",
    "DecomposeReport",
    "decompose",
    "decompose_exact",
    "extract_features",
    "mode_seeds",
]

log = logging.getLogger(__name__)


@dataclass
class ModeDiagnostics:
    mode: int
    rank: int
    identity: bool = False
    converged: bool = True
    iterations: int = 0
    final_residual: float = 0.0
    asymmetry: float = 0.0
    idempotency: float = 0.0  # ||K^2 - K||_F
    residuals: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    dual_residuals: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    objective: np.ndarray = field(default_factory=lambda: np.zeros(0))
    trace: np.ndarray = field(default_factory=lambda: np.zeros(0))
    K: np.ndarray = None


@dataclass
class DecomposeReport:
    model: OntdModel
    modes: list
    relative_error: float
    compression_ratio: float
    space_savings: float
    clamped: int = 0
    timings: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def converged(self):
        return all(m.converged for m in self.modes)


def mode_seeds(seed, d):
    """Independent per-mode integer seeds derived from one master seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(d)]


def _validate_ranks(dims, ranks, partial):
    if len(ranks) != len(dims):
        raise ValueError(f"{len(ranks)} ranks given for a {len(dims)}-way tensor")
    for n in partial:
        if not 0 <= n < len(dims):
            raise ValueError(f"identity mode {n} out of range")
    for n, (I, J) in enumerate(zip(dims, ranks)):
        if int(J) != J or not 1 <= J <= I:
            raise ValueError(f"rank {J} for mode {n} must be an integer in [1, {I}]")
        if n in partial and J != I:
            raise ValueError(f"identity mode {n} needs rank {I}, got {J}")


def _solve_mode(A, n, J, params, seed):
    t0 = time.perf_counter()
    res = run(unfold(A, n), J, params)
    U = recover_factor(res.K, J, seed=seed)
    diag = ModeDiagnostics(
        mode=n, rank=J,
        converged=res.converged,
        iterations=res.iterations,
        final_residual=res.final_residual,
        asymmetry=res.asymmetry,
        idempotency=float(np.linalg.norm(res.K @ res.K - res.K)),
        residuals=res.residuals,
        dual_residuals=res.dual_residuals,
        objective=res.objective,
        trace=res.trace,
        K=res.K,
    )
    return U, diag, time.perf_counter() - t0


def decompose(A, ranks, partial=(), params=None, seed=0, parallel=False):
    """Orthogonal nonnegative Tucker decomposition of ``A``.

    Each non-identity mode is solved independently: unfold, run the ADMM
    mode solver, recover the factor by clustering. The core is then the
    nonnegative projection of ``A`` onto the factors.

    Parameters
    ----------
    A : array_like
        Nonnegative d-way tensor.
    ranks : sequence of int
        Multilinear rank; identity modes must use their full dimension.
    partial : iterable of int
        0-based modes whose factor is fixed to the identity.
    params : AdmmParams, optional
    seed : int
        Master seed for the clustering restarts.
    parallel : bool
        Solve modes concurrently in a thread pool.

    Returns
    -------
    DecomposeReport
    """
    A = as_tensor(A, nonneg=True, name="input tensor")
    params = AdmmParams() if params is None else params
    ranks = [int(J) for J in ranks]
    partial = frozenset(int(n) for n in partial)
    _validate_ranks(A.shape, ranks, partial)

    seeds = mode_seeds(seed, A.ndim)
    todo = [n for n in range(A.ndim) if n not in partial]
    timings = {}
    t_start = time.perf_counter()
    if parallel and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=len(todo)) as pool:
            futures = {n: pool.submit(_solve_mode, A, n, ranks[n], params, seeds[n]) for n in todo}
            solved = {n: f.result() for n, f in futures.items()}
    else:
        solved = {n: _solve_mode(A, n, ranks[n], params, seeds[n]) for n in todo}

    factors, modes, warns = [], [], []
    for n in range(A.ndim):
        if n in partial:
            factors.append(None)
            modes.append(ModeDiagnostics(mode=n, rank=ranks[n], identity=True))
            continue
        U, diag, dt = solved[n]
        factors.append(U)
        modes.append(diag)
        timings[f"mode{n}"] = dt
        if not diag.converged:
            warns.append(
                f"mode {n}: ADMM stopped at max_iter={params.max_iter} "
                f"with residual {diag.final_residual:.3e}"
            )
    timings["modes_total"] = time.perf_counter() - t_start

    t0 = time.perf_counter()
    core, clamped = solve_core(A, factors, return_clamped=True)
    model = OntdModel(core=core, factors=factors)
    timings["core"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    err = relative_error(A, reconstruct(model))
    ratio = compression_ratio(A.shape, ranks)
    timings["metrics"] = time.perf_counter() - t0
    for w in warns:
        log.warning(w)
    return DecomposeReport(
        model=model,
        modes=modes,
        relative_error=err,
        compression_ratio=ratio,
        space_savings=1.0 - ratio,
        clamped=clamped,
        timings=timings,
        warnings=warns,
    )


def decompose_exact(A, ranks, partial=(), tol=1e-8):
    """ONTD of an exactly decomposable tensor, read directly off its unfoldings."""
    A = as_tensor(A, nonneg=True, name="input tensor")
    partial = frozenset(int(n) for n in partial)
    _validate_ranks(A.shape, list(ranks), partial)
    factors = [
        None if n in partial else exact_factor_from_unfolding(unfold(A, n), ranks[n], tol=tol)
        for n in range(A.ndim)
    ]
    return OntdModel(core=solve_core(A, factors), factors=factors)


def extract_features(model):
    """Hard-cluster indicator maps from a partial model with a factor on mode 0 only.

    Every position of the remaining modes is assigned to the mode-0 core
    slice with the largest value (lowest slice index on ties); feature ``i``
    is the 0/1 indicator map of slice ``i``.
    """
    if model.factors[0] is None or any(U is not None for U in model.factors[1:]):
        raise ValueError("feature extraction needs a factor on mode 0 and identities elsewhere")
    labels = np.argmax(model.core, axis=0)
    return [(labels == i).astype(np.float64) for i in range(model.core.shape[0])]
