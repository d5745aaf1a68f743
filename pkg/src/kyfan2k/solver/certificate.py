"""Optimality certificates for the combined-norm problem.

A feasible ``X`` is optimal when a split ``Y + Z = A`` and weights
``alpha, beta >= 0`` satisfy

(i)   ``||Y||_{k,2} = ||Z||_inf / theta``,
(ii)  ``X in alpha * subdiff ||Y||_{k,2}``,
(iii) ``X in beta * subdiff ||Z||_inf``,
(iv)  ``alpha + theta * beta = lambda`` with ``lambda`` the reciprocal of the
      dual combined norm of ``A``.

If in addition (v) either norm is differentiable at its argument, ``X`` is the
unique optimum. These conditions are sufficient only, so a failed check reads
"not certified" rather than "not optimal".
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..linalg import as_matrix
from ..norms import dual_2k_norm, dual_combined_norm, kyfan_2k_norm
from ..subdiff import is_differentiable, matrix_subgrad_report
from .splitting import ProblemSpec


@dataclass(frozen=True)
class Certificate:
    Y: np.ndarray
    Z: np.ndarray
    alpha: float
    beta: float
    lam: float

    @classmethod
    def from_split(cls, A, Y, alpha: float, beta: float, lam: float) -> "Certificate":
        """Build a certificate with ``Z`` stored as ``A - Y``."""
        A = as_matrix(A)
        Y = as_matrix(Y, "Y")
        return cls(Y=Y, Z=A - Y, alpha=float(alpha), beta=float(beta), lam=float(lam))


@dataclass
class ConditionResult:
    name: str
    passed: bool | None
    residual: float
    note: str = ""


@dataclass
class CertificateReport:
    conditions: list[ConditionResult]
    differentiable_Y: bool | None
    differentiable_Z: bool | None
    tol: float
    extras: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return all(c.passed is not False for c in self.conditions)

    @property
    def unique(self) -> bool:
        return self.certified and bool(self.differentiable_Y or self.differentiable_Z)

    @property
    def verdict(self) -> str:
        return "certified" if self.certified else "not certified"

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = []
        for c in self.conditions:
            status = "n/a" if c.passed is None else ("pass" if c.passed else "fail")
            extra = f"  ({c.note})" if c.note else ""
            out.append(f"({c.name}) {status}  residual={c.residual:.3e}{extra}")
        out.append(f"(v) differentiable at Y: {self.differentiable_Y}; at Z: {self.differentiable_Z}")
        out.append(f"verdict: {self.verdict}")
        return out


def build_certificate(spec: ProblemSpec, X, *, dual_tol: float = 1e-10, dual_max_iter: int = 50_000) -> Certificate:
    """Assemble the natural certificate for a candidate solution ``X``.

    The split comes from :func:`dual_combined_norm`; ``alpha`` and ``beta`` are
    the values of the two objective terms at ``X``. For ``theta = 0`` the split
    degenerates to ``Y = A, Z = 0`` and ``lambda = 1 / ||A||_{k,2}``.
    """
    X = as_matrix(X, "X")
    A = spec.A
    if X.shape != A.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {A.shape}")
    k, theta = spec.k, spec.theta
    alpha = dual_2k_norm(X, k)
    if theta == 0:
        return Certificate.from_split(A, A, alpha, 0.0, 1.0 / kyfan_2k_norm(A, k))
    split = dual_combined_norm(A, spec.params, tol=dual_tol, max_iter=dual_max_iter)
    beta = float(np.abs(X).sum())
    return Certificate.from_split(A, split.Y, alpha, beta, 1.0 / split.value)


def _linf_membership(X: np.ndarray, Z: np.ndarray, beta: float, tol: float) -> tuple[float, np.ndarray]:
    # subdiff ||Z||_inf = conv{sign(Z_ij) e_ij : |Z_ij| = ||Z||_inf} for Z != 0.
    zmax = float(np.abs(Z).max())
    active = np.abs(Z) >= zmax * (1.0 - tol)
    mass = float(np.abs(X).sum())
    off = float(np.abs(X[~active]).sum())
    wrong_sign = float(np.abs(X[active & (X * Z < 0)]).sum())
    scale = max(beta, mass, 1e-300)
    resid = max(off / scale, wrong_sign / scale, abs(mass - beta) / scale)
    return resid, active


def certificate_check(spec: ProblemSpec, X, cert: Certificate, tol: float = 1e-6) -> CertificateReport:
    """Evaluate conditions (i)-(iv) and the differentiability flags (v).

    Residuals are relative. The matrix subgradient test in (ii) runs on ``Y``
    normalized to unit Frobenius norm with ``tie_tol = tol``.
    """
    X = as_matrix(X, "X")
    A = spec.A
    Y = as_matrix(cert.Y, "Y")
    Z = as_matrix(cert.Z, "Z")
    if not (X.shape == Y.shape == Z.shape == A.shape):
        raise ValueError("X, Y, Z and A must share one shape")
    if cert.alpha < 0 or cert.beta < 0:
        raise ValueError("alpha and beta must be nonnegative")
    if not cert.lam > 0:
        raise ValueError("lambda must be positive")
    k, theta = spec.k, spec.theta
    conds: list[ConditionResult] = []
    extras: dict = {}

    # (i)
    split_err = float(np.linalg.norm(Y + Z - A)) / max(1.0, float(np.linalg.norm(A)))
    ny = kyfan_2k_norm(Y, k)
    if theta > 0:
        nz = float(np.abs(Z).max()) / theta
        bal = abs(ny - nz) / max(ny, nz, 1e-300)
        conds.append(ConditionResult("i", split_err <= tol and bal <= tol, max(split_err, bal)))
    else:
        zero = float(np.abs(Z).max()) / max(1.0, float(np.abs(A).max()))
        conds.append(
            ConditionResult("i", split_err <= tol and zero <= tol, max(split_err, zero), "theta = 0: Z must vanish")
        )

    # (ii)
    if cert.alpha == 0:
        r = float(np.abs(X).max()) if cert.beta == 0 else 0.0
        conds.append(ConditionResult("ii", r <= tol, r, "alpha = 0"))
    elif ny == 0:
        conds.append(ConditionResult("ii", False, np.inf, "Y = 0"))
    else:
        Yn = Y / float(np.linalg.norm(Y))
        rep = matrix_subgrad_report(Yn, X / cert.alpha, k, tol=tol, tie_tol=tol)
        resid = max(
            rep.outside,
            rep.asymmetry,
            max(-rep.min_eig, 0.0),
            max(rep.spectral - 1.0, 0.0),
            rep.trace_gap,
        )
        conds.append(ConditionResult("ii", rep.ok, resid))
        extras["subgrad"] = rep

    # (iii)
    if theta == 0:
        conds.append(ConditionResult("iii", None, 0.0, "theta = 0: l1 term absent"))
    elif not np.any(Z):
        ok = float(np.abs(X).sum()) <= cert.beta * (1 + tol)
        conds.append(ConditionResult("iii", ok, 0.0, "Z = 0"))
    else:
        resid, active = _linf_membership(X, Z, cert.beta, tol)
        conds.append(ConditionResult("iii", resid <= tol, resid))
        extras["active_entries"] = int(active.sum())

    # (iv)
    total = cert.alpha + theta * cert.beta
    gap = abs(total - cert.lam) / cert.lam
    conds.append(ConditionResult("iv", gap <= tol, gap))

    dY = is_differentiable(Y, k, tie_tol=tol) if np.any(Y) else None
    if theta > 0 and np.any(Z):
        zmax = float(np.abs(Z).max())
        dZ = int(np.count_nonzero(np.abs(Z) >= zmax * (1.0 - tol))) == 1
    else:
        dZ = None
    return CertificateReport(conds, dY, dZ, tol, extras)


def certify(spec: ProblemSpec, X, tol: float = 1e-6) -> CertificateReport:
    """Build the natural certificate for ``X`` and check it."""
    return certificate_check(spec, X, build_certificate(spec, X), tol)
