"""Finding k approximately rank-one blocks with the dual Ky Fan 2-k-norm."""

from .norms import (
    NormParams,
    combined_norm,
    dual_2k_norm,
    dual_combined_norm,
    dual_gauge_2k,
    dual_kyfan_k_norm,
    gauge_2k,
    kyfan_2k_norm,
    kyfan_k_norm,
)
from .solver import ProblemSpec, SolverOptions, certify, solve, solve_kyfan_k_baseline

__version__ = "0.1.0"

__all__ = [
    "NormParams",
    "ProblemSpec",
    "SolverOptions",
    "certify",
    "combined_norm",
    "dual_2k_norm",
    "dual_combined_norm",
    "dual_gauge_2k",
    "dual_kyfan_k_norm",
    "gauge_2k",
    "kyfan_2k_norm",
    "kyfan_k_norm",
    "solve",
    "solve_kyfan_k_baseline",
]
