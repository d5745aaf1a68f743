"""Subdifferential membership for the Ky Fan 2-k-norm.

For a nonzero matrix with singular values

    s_1 >= ... > s_{k-t+1} = ... = s_k = ... = s_{k+s} > ... >= s_p

a subgradient keeps the leading ``k - t`` singular triples, scaled by the norm,
and puts ``s_k * T`` on the tied block with ``T`` symmetric PSD, ``||T|| <= 1``
and ``trace(T) = t``. Ties are detected numerically with ``tie_tol``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, svd

DEFAULT_TIE_TOL = 1e-8


@dataclass(frozen=True)
class SpectrumPartition:
    t: int
    s: int
    k: int
    sigma_k: float

    @property
    def lead(self) -> int:
        """Number of singular values strictly above the tied block."""
        return self.k - self.t

    @property
    def stop(self) -> int:
        """One past the last index of the tied block (0-based)."""
        return self.k + self.s


def partition_spectrum(S, k: int, tie_tol: float = DEFAULT_TIE_TOL) -> SpectrumPartition:
    """Locate the block of singular values tied with ``S[k-1]``.

    Two values are tied when they differ by at most ``tie_tol * max(s_k, 1)``.
    """
    S = np.asarray(S, dtype=np.float64)
    p = S.size
    if not 1 <= k <= p:
        raise ValueError(f"k must lie in [1, {p}], got {k}")
    sk = float(S[k - 1])
    band = tie_tol * max(sk, 1.0)
    t = 1
    while k - t - 1 >= 0 and abs(S[k - t - 1] - sk) <= band:
        t += 1
    s = 0
    while k + s < p and abs(S[k + s] - sk) <= band:
        s += 1
    return SpectrumPartition(t=t, s=s, k=k, sigma_k=sk)


def _gauge(sigma: np.ndarray, k: int) -> float:
    return float(np.sqrt(np.sum(sigma[:k] ** 2)))


def vector_subgrad_check(sigma, v, k: int, tol: float = 1e-8, tie_tol: float = DEFAULT_TIE_TOL) -> bool:
    """Is ``v`` a subgradient of the top-k l2 gauge at sorted ``sigma``?"""
    sigma = np.asarray(sigma, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if sigma.shape != v.shape:
        raise ValueError("sigma and v must have the same length")
    if np.any(np.diff(sigma) > 0) or np.any(sigma < 0):
        raise ValueError("sigma must be nonincreasing and nonnegative")
    if not np.any(sigma > 0):
        raise ValueError("sigma must be nonzero")
    part = partition_spectrum(sigma, k, tie_tol)
    norm = _gauge(sigma, k)
    a, b = part.lead, part.stop

    if np.any(np.abs(v[:a] - sigma[:a] / norm) > tol):
        return False
    if np.any(np.abs(v[b:]) > tol):
        return False
    tie = v[a:b]
    cap = part.sigma_k / norm
    if np.any(tie < -tol) or np.any(tie > cap + tol):
        return False
    return abs(tie.sum() - part.t * cap) <= tol * max(1, b - a)


def _spectral_zero(S: np.ndarray, k: int, tie_tol: float) -> bool:
    return S[k - 1] <= tie_tol * max(S[0], 1e-300)


def subgradient(A, k: int, tie_tol: float = DEFAULT_TIE_TOL) -> np.ndarray:
    """One element of the subdifferential (the gradient where it exists).

    On a tied block the choice ``T = t/(s+t) * I`` is used.
    """
    A = as_matrix(A)
    F = svd(A)
    if F.S[0] == 0:
        raise ValueError("subdifferential requested at the zero matrix")
    norm = _gauge(F.S, k)
    if _spectral_zero(F.S, k, tie_tol):
        r = int(np.count_nonzero(F.S > tie_tol * F.S[0]))
        return (F.U[:, :r] * F.S[:r]) @ F.V[:, :r].T / norm
    part = partition_spectrum(F.S, k, tie_tol)
    a, b = part.lead, part.stop
    G = (F.U[:, :a] * F.S[:a]) @ F.V[:, :a].T
    G += part.sigma_k * part.t / (b - a) * F.U[:, a:b] @ F.V[:, a:b].T
    return G / norm


@dataclass
class SubgradReport:
    ok: bool
    outside: float
    asymmetry: float = 0.0
    min_eig: float = 0.0
    spectral: float = 0.0
    trace_gap: float = 0.0


def matrix_subgrad_report(A, G, k: int, tol: float = 1e-8, tie_tol: float = DEFAULT_TIE_TOL) -> SubgradReport:
    """Residuals of the membership test behind :func:`matrix_subgrad_check`.

    ``outside`` is the Frobenius norm of the part of ``G`` that is neither the
    fixed leading part nor inside the tied singular subspaces. The remaining
    fields describe the recovered tied-block matrix ``T``.
    """
    A = as_matrix(A, "A")
    G = as_matrix(G, "G")
    if A.shape != G.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {G.shape}")
    F = svd(A)
    if F.S[0] == 0:
        raise ValueError("subdifferential requested at the zero matrix")
    norm = _gauge(F.S, k)

    if _spectral_zero(F.S, k, tie_tol):
        r = int(np.count_nonzero(F.S > tie_tol * F.S[0]))
        lead = (F.U[:, :r] * F.S[:r]) @ F.V[:, :r].T / norm
        outside = float(np.linalg.norm(G - lead))
        return SubgradReport(ok=outside <= tol, outside=outside)

    part = partition_spectrum(F.S, k, tie_tol)
    a, b = part.lead, part.stop
    lead = (F.U[:, :a] * F.S[:a]) @ F.V[:, :a].T / norm
    R = G - lead
    Ut, Vt = F.U[:, a:b], F.V[:, a:b]
    M = Ut.T @ R @ Vt
    outside = float(np.linalg.norm(R - Ut @ M @ Vt.T))

    # T lives on the scale of s_k / norm; compare it with a matching tolerance.
    T = M * norm / part.sigma_k
    ttol = tol * norm / part.sigma_k
    asym = float(np.abs(T - T.T).max())
    Ts = 0.5 * (T + T.T)
    eig = np.linalg.eigvalsh(Ts)
    spectral = float(np.linalg.norm(T, 2))
    trace_gap = float(abs(np.trace(T) - part.t))
    ok = (
        outside <= tol
        and asym <= ttol
        and eig[0] >= -ttol
        and spectral <= 1.0 + ttol
        and trace_gap <= ttol * max(1, b - a)
    )
    return SubgradReport(ok, outside, asym, float(eig[0]), spectral, trace_gap)


def matrix_subgrad_check(A, G, k: int, tol: float = 1e-8, tie_tol: float = DEFAULT_TIE_TOL) -> bool:
    """Is ``G`` a subgradient of the Ky Fan 2-k-norm at ``A``?

    The test works in the computed singular subspaces and only looks at
    rotation-invariant quantities of the tied block, so any SVD of ``A`` gives
    the same verdict.
    """
    return matrix_subgrad_report(A, G, k, tol, tie_tol).ok


def is_differentiable(A, k: int, tie_tol: float = DEFAULT_TIE_TOL) -> bool:
    """Differentiable iff ``s_k > s_{k+1}`` (with ``s_{p+1} = 0``) or ``s_k = 0``."""
    A = as_matrix(A)
    S = np.linalg.svd(A, compute_uv=False)
    if S[0] == 0:
        raise ValueError("differentiability requested at the zero matrix")
    if S[k - 1] <= tie_tol * max(S[k - 1], 1.0):
        return True
    return partition_spectrum(S, k, tie_tol).s == 0
