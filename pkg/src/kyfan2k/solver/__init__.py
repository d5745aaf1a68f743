"""Splitting solver, optimality certificates and SDP export."""

from .certificate import Certificate, CertificateReport, build_certificate, certificate_check, certify
from .prox import (
    project_gauge2k_ball,
    project_halfspace,
    project_kyfan_2k_ball,
    project_topk_ball,
    prox_dual_2k,
    prox_dual_kyfan_k,
    prox_l1,
)
from .sdp import SdpProblem, build_sdp, export_sdpa, mapping_text, read_sdpa, sdpa_hash, sdpa_text
from .splitting import (
    InfeasibleProblemError,
    ProblemSpec,
    SolveOutcome,
    SolverOptions,
    solve,
    solve_kyfan_k_baseline,
)

__all__ = [
    "Certificate",
    "CertificateReport",
    "InfeasibleProblemError",
    "ProblemSpec",
    "SdpProblem",
    "SolveOutcome",
    "SolverOptions",
    "build_certificate",
    "build_sdp",
    "certificate_check",
    "certify",
    "export_sdpa",
    "mapping_text",
    "project_gauge2k_ball",
    "project_halfspace",
    "project_kyfan_2k_ball",
    "project_topk_ball",
    "prox_dual_2k",
    "prox_dual_kyfan_k",
    "prox_l1",
    "read_sdpa",
    "sdpa_hash",
    "sdpa_text",
    "solve",
    "solve_kyfan_k_baseline",
]
