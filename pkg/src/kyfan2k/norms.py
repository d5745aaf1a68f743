"""Ky Fan 2-k-norm, its dual, the theta-weighted combination with the entrywise
l1 norm, and the Ky Fan k-norm used as a baseline.

Every matrix norm here is unitarily invariant, so it is evaluated as a vector
gauge of the singular values. The vector routines prefixed with an underscore
work on a magnitude vector ``z`` sorted in nonincreasing order; they are shared
with :mod:`kyfan2k.solver.prox`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .linalg import as_matrix, singular_values

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class NormParams:
    """Number of blocks ``k`` and sparsity weight ``theta``."""

    k: int
    theta: float = 0.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if not np.isfinite(self.theta) or self.theta < 0:
            raise ValueError(f"theta must be finite and nonnegative, got {self.theta!r}")

    def check_shape(self, shape) -> None:
        if self.k > min(shape):
            raise ValueError(f"k={self.k} exceeds min(m, n)={min(shape)}")


def _check_k(k, length: int) -> int:
    if int(k) != k or not 1 <= k <= length:
        raise ValueError(f"k must lie in [1, {length}], got {k!r}")
    return int(k)


def _sorted_magnitudes(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("vector contains non-finite entries")
    return np.sort(np.abs(x))[::-1]


# ---------------------------------------------------------------------------
# vector gauges


def gauge_2k(x, k: int) -> float:
    """l2 norm of the k largest-magnitude entries of ``x``."""
    z = _sorted_magnitudes(x)
    k = _check_k(k, z.size)
    return float(np.sqrt(np.sum(z[:k] ** 2)))


def _dual_gauge_2k_sorted(z: np.ndarray, k: int) -> float:
    # Two regimes: the leading k-r-1 entries keep their squares, the tail from
    # index k-r on is pooled into one averaged block.
    tails = np.cumsum(z[::-1])[::-1]  # tails[i] = sum(z[i:])
    best_r, best_viol = 0, np.inf
    for r in range(k):
        head = k - r - 1
        avg = tails[head] / (r + 1)
        upper = np.inf if head == 0 else z[head - 1]
        lower = z[head]
        slack = 1e-12 * max(avg, 1e-300)
        if upper + slack > avg and avg + slack >= lower:
            best_r = r
            break
        viol = max(avg - upper, lower - avg, 0.0)
        if viol < best_viol:
            best_r, best_viol = r, viol
    head = k - best_r - 1
    value = np.sum(z[:head] ** 2) + tails[head] ** 2 / (best_r + 1)
    return float(np.sqrt(value))


def dual_gauge_2k(x, k: int) -> float:
    """Dual of :func:`gauge_2k`, i.e. ``max <x, y>`` over ``gauge_2k(y, k) <= 1``.

    This is the k-support norm. For ``k = 1`` it is the l1 norm and for
    ``k = len(x)`` the l2 norm.
    """
    z = _sorted_magnitudes(x)
    k = _check_k(k, z.size)
    return _dual_gauge_2k_sorted(z, k)


def topk_sum(x, k: int) -> float:
    """Sum of the k largest magnitudes."""
    z = _sorted_magnitudes(x)
    k = _check_k(k, z.size)
    return float(z[:k].sum())


def dual_topk_sum(x, k: int) -> float:
    """Dual of :func:`topk_sum`: ``max(||x||_inf, ||x||_1 / k)``."""
    z = _sorted_magnitudes(x)
    k = _check_k(k, z.size)
    return float(max(z[0], z.sum() / k))


# ---------------------------------------------------------------------------
# parametric shrinkage families on sorted magnitudes
#
# _shrink_2k(z, lam, k) = argmin_y 1/2||y - z||^2 + lam/2 * (sum of k largest y_i^2)
# _shrink_k(z, lam, k)  = argmin_y 1/2||y - z||^2 + lam * (sum of k largest y_i)
#
# Ball projections, the prox of the gauge and the epigraph (cone) projection
# all reduce to one scalar equation in lam over these families.


def _shrink_2k(z: np.ndarray, lam: float, k: int) -> np.ndarray:
    if lam <= 0:
        return z.copy()
    pos = z > 0
    if np.count_nonzero(pos) <= k:
        return z / (1.0 + lam)
    zp = z[pos]
    # count(w) = sum_i clip((z_i w - 1) / lam, 0, 1) is piecewise linear and
    # nondecreasing in w = 1/level; solve count(w) = k exactly.
    # Subnormal entries give infinite breakpoints; they sort last and clip to 1.
    with np.errstate(over="ignore"):
        bps = np.sort(np.concatenate([1.0 / zp, (1.0 + lam) / zp]))
        F = np.clip((np.outer(bps, zp) - 1.0) / lam, 0.0, 1.0).sum(axis=1)
    j = int(np.searchsorted(F, k, side="left"))
    j = min(j, bps.size - 1)
    if j == 0 or F[j] == k:
        w = bps[j]
    else:
        w0, w1, F0, F1 = bps[j - 1], bps[j], F[j - 1], F[j]
        w = w0 + (k - F0) * (w1 - w0) / (F1 - F0)
    if not np.isfinite(w):
        # Level 0 in the limit: every positive entry is on the scaled branch.
        return z / (1.0 + lam)
    with np.errstate(over="ignore"):
        zw = z * w
    return np.where(zw > 1.0 + lam, z / (1.0 + lam), np.where(zw >= 1.0, 1.0 / w, z))


def _shrink_k(z: np.ndarray, lam: float, k: int) -> np.ndarray:
    if lam <= 0:
        return z.copy()
    if np.clip(z / lam, 0.0, 1.0).sum() <= k:
        return np.maximum(z - lam, 0.0)
    # count(c) = sum_i clip((z_i - c) / lam, 0, 1) is nonincreasing in the
    # level c >= 0; solve count(c) = k exactly.
    bps = np.unique(np.concatenate([z, z - lam, [0.0]]))
    bps = bps[bps >= 0]
    F = np.clip((z[None, :] - bps[:, None]) / lam, 0.0, 1.0).sum(axis=1)
    j = int(np.searchsorted(-F, -k, side="left"))
    j = min(j, bps.size - 1)
    if j == 0 or F[j] == k:
        c = bps[j]
    else:
        c0, c1, F0, F1 = bps[j - 1], bps[j], F[j - 1], F[j]
        c = c0 + (k - F0) * (c1 - c0) / (F1 - F0)
    return np.where(z - c > lam, z - lam, np.where(z >= c, c, z))


def _g2k(y: np.ndarray, k: int) -> float:
    return float(np.sqrt(np.sum(y[:k] ** 2)))


def _gk(y: np.ndarray, k: int) -> float:
    return float(np.sum(y[:k]))


_FAMILIES = {
    "2k": (_shrink_2k, _g2k),
    "k": (_shrink_k, _gk),
}


def _solve_lam(fn, start: float = 1.0) -> float:
    """Root of a function that is positive at 0 and eventually nonpositive."""
    hi = start
    for _ in range(2000):
        if fn(hi) <= 0:
            break
        hi *= 2.0
    else:  # pragma: no cover - shrinkage always drives the gauge to zero
        raise RuntimeError("failed to bracket shrinkage parameter")
    if fn(hi) == 0:
        return hi
    return brentq(fn, 0.0, hi, xtol=1e-300, rtol=4 * _EPS, maxiter=500)


def _ball_sorted(z: np.ndarray, k: int, family: str = "2k") -> np.ndarray:
    """Projection of sorted magnitudes onto the unit ball of the family gauge."""
    shrink, g = _FAMILIES[family]
    if g(z, k) <= 1.0:
        return z.copy()
    lam = _solve_lam(lambda t: g(shrink(z, t, k), k) - 1.0)
    y = shrink(z, lam, k)
    return y / max(1.0, g(y, k))


def _cone_2k_sorted(z: np.ndarray, s0: float, k: int) -> tuple[np.ndarray, float]:
    """Projection of ``(z, s0)`` onto ``{(y, s): gauge_2k(y, k) <= s}``."""
    if _g2k(z, k) <= s0:
        return z.copy(), float(s0)
    if _dual_gauge_2k_sorted(z, k) <= -s0:
        return np.zeros_like(z), 0.0
    # With y = _shrink_2k(z, lam), optimality reads gauge(y) * (1 - lam) = s0.
    lam = _solve_lam(lambda t: _g2k(_shrink_2k(z, t, k), k) * (1.0 - t) - s0)
    y = _shrink_2k(z, lam, k)
    return y, _g2k(y, k)


# ---------------------------------------------------------------------------
# matrix norms


def kyfan_2k_norm(A, k: int) -> float:
    """l2 norm of the k largest singular values."""
    S = singular_values(A)
    k = _check_k(k, S.size)
    return _g2k(S, k)


def dual_2k_norm(A, k: int) -> float:
    """Dual of the Ky Fan 2-k-norm: the k-support norm of the singular values."""
    S = singular_values(A)
    k = _check_k(k, S.size)
    return _dual_gauge_2k_sorted(S, k)


def kyfan_k_norm(A, k: int) -> float:
    """Sum of the k largest singular values."""
    S = singular_values(A)
    k = _check_k(k, S.size)
    return _gk(S, k)


def dual_kyfan_k_norm(A, k: int) -> float:
    """Dual of the Ky Fan k-norm: ``max(sigma_1, nuclear / k)``."""
    S = singular_values(A)
    k = _check_k(k, S.size)
    return float(max(S[0], S.sum() / k))


def combined_norm(X, params: NormParams) -> float:
    """``dual_2k_norm(X, k) + theta * ||X||_1``, the objective being minimized."""
    X = as_matrix(X, "X")
    params.check_shape(X.shape)
    return dual_2k_norm(X, params.k) + params.theta * float(np.abs(X).sum())


@dataclass
class DualSplit:
    """Value of the dual combined norm and a split ``Y + Z = A`` attaining it."""

    value: float
    Y: np.ndarray
    Z: np.ndarray
    iterations: int
    residual: float
    converged: bool


def _proj_linf_cone(V: np.ndarray, s0: float, A: np.ndarray, theta: float):
    """Projection of ``(V, s0)`` onto ``{(Y, s): ||A - Y||_inf <= theta * s}``."""
    W = A - V
    a = np.sort(np.abs(W).ravel())[::-1]
    if s0 + theta * a.sum() <= 0:
        return A.copy(), 0.0
    # s solves s - s0 = theta * sum_i (a_i - theta s)_+ (piecewise linear).
    S = np.cumsum(a)
    j = np.arange(1, a.size + 1)
    cand = (s0 + theta * S) / (1.0 + j * theta**2)
    nxt = np.append(a[1:], 0.0)
    ok = (theta * cand <= a) & (theta * cand >= nxt)
    if ok.any():
        s = cand[np.argmax(ok)]
    else:  # every entry already inside the box
        s = max(s0, 0.0)
    s = max(float(s), 0.0)
    return A - np.clip(W, -theta * s, theta * s), s


def _split_value(A: np.ndarray, Y: np.ndarray, k: int, theta: float) -> float:
    S = np.linalg.svd(Y, compute_uv=False)
    return max(_g2k(S, k), float(np.abs(A - Y).max()) / theta)


def dual_combined_norm(
    A,
    params: NormParams,
    *,
    tol: float = 1e-9,
    max_iter: int = 50_000,
    step: float = 1.0,
) -> DualSplit:
    """Dual of :func:`combined_norm`, computed as

        min over Y + Z = A of max(||Y||_{k,2}, ||Z||_inf / theta).

    The problem is lifted to its epigraph ``(Y, s)`` and solved by
    Douglas-Rachford splitting between the Ky Fan 2-k cone (with the linear
    objective ``s``) and the shifted l-infinity cone. The matrix is normalized
    to unit Frobenius norm first, so the result is exactly positively
    homogeneous in ``A``. ``step`` is in normalized units.

    The returned value is evaluated at the returned split and is never worse
    than either one-sided split ``(A, 0)`` or ``(0, A)``.
    """
    A = as_matrix(A)
    params.check_shape(A.shape)
    if params.theta <= 0:
        raise ValueError("dual_combined_norm requires theta > 0")
    k, theta = params.k, params.theta
    scale = float(np.linalg.norm(A))
    if scale == 0:
        return DualSplit(0.0, np.zeros_like(A), np.zeros_like(A), 0, 0.0, True)
    An = A / scale

    V = 0.5 * An
    sv = 0.5 * max(_split_value(An, np.zeros_like(An), k, theta), 1e-12)
    converged = False
    residual = np.inf
    it = 0
    Y1 = V
    for it in range(1, max_iter + 1):
        U, S, Vt = np.linalg.svd(V, full_matrices=False)
        y, s1 = _cone_2k_sorted(S, sv - step, k)
        Y1 = (U * y) @ Vt
        Y2, s2 = _proj_linf_cone(2.0 * Y1 - V, 2.0 * s1 - sv, An, theta)
        dV = Y2 - Y1
        ds = s2 - s1
        V = V + dV
        sv = sv + ds
        residual = float(np.sqrt(np.sum(dV * dV) + ds * ds))
        if residual <= tol * max(1.0, float(np.sqrt(np.sum(V * V) + sv * sv))):
            converged = True
            break

    candidates = [Y1, Y2, An, np.zeros_like(An)]
    values = [_split_value(An, C, k, theta) for C in candidates]
    best = int(np.argmin(values))
    Y = candidates[best] * scale
    return DualSplit(
        value=values[best] * scale,
        Y=Y,
        Z=A - Y,
        iterations=it,
        residual=residual,
        converged=converged,
    )
