"""Orthogonal nonnegative Tucker decomposition (ONTD) for dense tensors."""

__version__ = "0.1.0"

from .admm import AdmmParams, AdmmResult, run
from .core import OntdModel, reconstruct, rowwise_norm_check, solve_core
from .metrics import avg_error, compression_ratio, relative_error, similarity, space_savings
from .pipeline import DecomposeReport, decompose, decompose_exact, extract_features
from .recovery import (
    ClusterAssignment,
    exact_factor_from_unfolding,
    kmeans,
    match_factors,
    recover_factor,
)
from .synth import SynthSpec, gen_factor, gen_tensor, gen_unmixing
from .tensor import fold, frob_norm, mode_product, unfold

__all__ = [
    "AdmmParams", "AdmmResult", "run",
    "OntdModel", "reconstruct", "rowwise_norm_check", "solve_core",
    "avg_error", "compression_ratio", "relative_error", "similarity", "space_savings",
    "DecomposeReport", "decompose", "decompose_exact", "extract_features",
    "ClusterAssignment", "exact_factor_from_unfolding", "kmeans", "match_factors",
    "recover_factor",
    "SynthSpec", "gen_factor", "gen_tensor", "gen_unmixing",
    "fold", "frob_norm", "mode_product", "unfold",
]
