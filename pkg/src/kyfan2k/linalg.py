"""Dense matrix helpers: validation, SVD with a fixed sign convention, the
entrywise norms, and the plain-text matrix format."""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

import numpy as np


class SvdFactors(NamedTuple):
    """Thin SVD ``A = U @ diag(S) @ V.T`` with ``p = min(m, n)`` columns."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray


def as_matrix(A, name: str = "A") -> np.ndarray:
    """Return ``A`` as a 2-D float64 array, rejecting NaN/Inf."""
    M = np.asarray(A, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {M.shape}")
    if M.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def _check_same_shape(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")


def svd(A) -> SvdFactors:
    """Thin singular value decomposition.

    Singular values come back nonincreasing. Each singular pair is signed so
    that the first nonzero entry of the corresponding column of ``U`` is
    nonnegative; the matching column of ``V`` is flipped with it, so the
    product is unchanged.
    """
    A = as_matrix(A)
    U, S, Vt = np.linalg.svd(A, full_matrices=False)
    V = Vt.T.copy()
    for j in range(U.shape[1]):
        col = U[:, j]
        nz = np.flatnonzero(col)
        if nz.size and col[nz[0]] < 0:
            U[:, j] = -col
            V[:, j] = -V[:, j]
    return SvdFactors(U, S, V)


def singular_values(A) -> np.ndarray:
    return np.linalg.svd(as_matrix(A), compute_uv=False)


def frobenius_norm(A) -> float:
    return float(np.linalg.norm(as_matrix(A)))


def l1_norm(A) -> float:
    """Sum of absolute values of all entries."""
    return float(np.abs(as_matrix(A)).sum())


def linf_norm(A) -> float:
    """Largest absolute entry."""
    return float(np.abs(as_matrix(A)).max())


def inner(A, B) -> float:
    """Trace inner product ``trace(A.T @ B)``."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    _check_same_shape(A, B)
    return float(np.vdot(A, B))


def write_matrix(path, A) -> None:
    """Write ``A`` as ``"rows cols"`` followed by one line per row.

    Values use 17 significant digits, which round-trips float64 exactly.
    """
    A = as_matrix(A)
    rows, cols = A.shape
    lines = [f"{rows} {cols}"]
    lines.extend(" ".join(f"{v:.17g}" for v in row) for row in A)
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`write_matrix`."""
    text = Path(path).read_text().split("\n")
    lines = [ln for ln in text if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"{path}: bad header {lines[0]!r}") from exc
    if len(lines) - 1 != rows:
        raise ValueError(f"{path}: expected {rows} rows, found {len(lines) - 1}")
    data = np.array([[float(t) for t in ln.split()] for ln in lines[1:]], dtype=np.float64)
    if data.shape != (rows, cols):
        raise ValueError(f"{path}: expected {rows}x{cols} entries")
    return as_matrix(data)
