"""Proximal maps and projections used by the splitting solver."""

from __future__ import annotations

import numpy as np

from ..norms import _ball_sorted, _check_k


def prox_l1(X, step: float) -> np.ndarray:
    """Entrywise soft-thresholding, the prox of ``step * ||.||_1``."""
    if step < 0:
        raise ValueError("step must be nonnegative")
    X = np.asarray(X, dtype=np.float64)
    return np.sign(X) * np.maximum(np.abs(X) - step, 0.0)


def _project_vector(x, k: int, family: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    shape = x.shape
    x = x.ravel()
    k = _check_k(k, x.size)
    a = np.abs(x)
    order = np.argsort(-a, kind="stable")
    y = np.empty_like(a)
    y[order] = _ball_sorted(a[order], k, family)
    return (np.sign(x) * y).reshape(shape)


def project_gauge2k_ball(x, k: int) -> np.ndarray:
    """Euclidean projection onto ``{y : gauge_2k(y, k) <= 1}``."""
    return _project_vector(x, k, "2k")


def project_topk_ball(x, k: int) -> np.ndarray:
    """Euclidean projection onto ``{y : sum of k largest |y_i| <= 1}``."""
    return _project_vector(x, k, "k")


def _spectral_moreau(X, step: float, k: int, family: str) -> np.ndarray:
    # prox_{t f}(X) = X - t * P_ball(X / t), with the ball projection acting on
    # singular values.
    if step <= 0:
        raise ValueError("step must be positive")
    X = np.asarray(X, dtype=np.float64)
    U, S, Vt = np.linalg.svd(X, full_matrices=False)
    k = _check_k(k, S.size)
    shrunk = S - step * _ball_sorted(S / step, k, family)
    return (U * np.maximum(shrunk, 0.0)) @ Vt


def prox_dual_2k(X, step: float, k: int) -> np.ndarray:
    """Prox of ``step * dual_2k_norm(., k)``."""
    return _spectral_moreau(X, step, k, "2k")


def prox_dual_kyfan_k(X, step: float, k: int) -> np.ndarray:
    """Prox of ``step * dual_kyfan_k_norm(., k)``."""
    return _spectral_moreau(X, step, k, "k")


def project_kyfan_2k_ball(X, k: int) -> np.ndarray:
    """Projection onto the unit ball of the Ky Fan 2-k-norm."""
    X = np.asarray(X, dtype=np.float64)
    U, S, Vt = np.linalg.svd(X, full_matrices=False)
    k = _check_k(k, S.size)
    return (U * _ball_sorted(S, k, "2k")) @ Vt


def project_halfspace(X, A) -> np.ndarray:
    """Projection onto ``{X : <A, X> >= 1}``."""
    X = np.asarray(X, dtype=np.float64)
    v = float(np.vdot(A, X))
    if v >= 1.0:
        return X.copy()
    return X + (1.0 - v) / float(np.vdot(A, A)) * A
