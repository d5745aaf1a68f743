"""Consensus Douglas-Rachford solver for

    min  dual_2k_norm(X, k) + theta * ||X||_1   s.t.  <A, X> >= 1

and for the same problem with the dual Ky Fan k-norm as the first term.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..linalg import as_matrix
from ..norms import NormParams, combined_norm, dual_kyfan_k_norm
from .prox import project_halfspace, prox_dual_2k, prox_dual_kyfan_k, prox_l1

log = logging.getLogger(__name__)


class InfeasibleProblemError(ValueError):
    """Raised when ``<A, X> >= 1`` has no solution (A has no positive entry)."""


@dataclass(frozen=True)
class ProblemSpec:
    A: np.ndarray
    params: NormParams

    def __post_init__(self):
        A = as_matrix(self.A)
        object.__setattr__(self, "A", A)
        self.params.check_shape(A.shape)
        if not np.any(A > 0):
            raise InfeasibleProblemError("A has no positive entry; <A, X> >= 1 is infeasible")

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def theta(self) -> float:
        return self.params.theta


@dataclass(frozen=True)
class SolverOptions:
    """Solver settings.

    ``step`` is the prox step in the units of ``A``; ``None`` means
    ``1 / ||A||_F``. Iteration stops once both the largest branch-to-consensus
    distance and the consensus change fall below ``tol * max(1, ||X||_F)``,
    measured on the problem normalized to ``||A||_F = 1``.
    """

    step: float | None = None
    relaxation: float = 1.0
    max_iters: int = 200_000
    tol: float = 1e-8
    feas_tol: float = 1e-7
    opt_tol: float = 1e-6

    def __post_init__(self):
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        if not 0 < self.relaxation < 2:
            raise ValueError("relaxation must lie in (0, 2)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


@dataclass
class SolveOutcome:
    X: np.ndarray
    objective: float
    iterations: int
    primal_residual: float
    constraint_value: float
    converged: bool
    model: str = "kyfan2k"
    history: list = field(default_factory=list, repr=False)


def _consensus(
    An: np.ndarray,
    prox_norm: Callable[[np.ndarray, float], np.ndarray],
    theta: float,
    step: float,
    opts: SolverOptions,
    Z0: np.ndarray | None,
):
    Z = An.copy() if Z0 is None else Z0.copy()
    U = [np.zeros_like(An) for _ in range(3)]
    rho = opts.relaxation
    primal = change = np.inf
    it = 0
    converged = False
    for it in range(1, opts.max_iters + 1):
        X1 = prox_norm(Z - U[0], step)
        X2 = prox_l1(Z - U[1], step * theta) if theta > 0 else Z - U[1]
        X3 = project_halfspace(Z - U[2], An)
        Xs = [X1, X2, X3]
        if rho != 1.0:
            Xs = [rho * X + (1.0 - rho) * Z for X in Xs]
        Znew = (Xs[0] + Xs[1] + Xs[2] + U[0] + U[1] + U[2]) / 3.0
        for i in range(3):
            U[i] += Xs[i] - Znew
        primal = max(float(np.linalg.norm(X - Znew)) for X in Xs)
        change = float(np.linalg.norm(Znew - Z))
        Z = Znew
        if max(primal, change) < opts.tol * max(1.0, float(np.linalg.norm(Z))):
            converged = True
            break
    return Z, it, max(primal, change), converged


def _run(spec: ProblemSpec, opts: SolverOptions, prox_norm, objective, model: str, x0) -> SolveOutcome:
    A = spec.A
    scale = float(np.linalg.norm(A))
    An = A / scale
    step = 1.0 if opts.step is None else opts.step * scale
    Z0 = None
    if x0 is not None:
        Z0 = as_matrix(x0, "x0") * scale
    Z, iters, resid, converged = _consensus(An, prox_norm, spec.theta, step, opts, Z0)

    c = float(np.vdot(An, Z))
    if c <= 0:
        Z = project_halfspace(Z, An)
        c = float(np.vdot(An, Z))
    # The objective is positively homogeneous, so rescaling onto <A, X> = 1
    # keeps the point optimal up to solver accuracy and makes it feasible.
    X = Z / c / scale
    if not converged:
        log.warning("%s solve stopped after %d iterations (residual %.3g)", model, iters, resid)
    return SolveOutcome(
        X=X,
        objective=objective(X),
        iterations=iters,
        primal_residual=resid,
        constraint_value=float(np.vdot(A, X)),
        converged=converged,
        model=model,
    )


def solve(spec: ProblemSpec, opts: SolverOptions | None = None, *, x0=None) -> SolveOutcome:
    """Minimize ``dual_2k_norm(X) + theta ||X||_1`` subject to ``<A, X> >= 1``.

    The three terms (dual Ky Fan 2-k-norm, weighted l1 norm, halfspace
    indicator) are split and their prox maps averaged in consensus form. The
    run is deterministic for a given ``spec`` and ``opts``; exhausting
    ``max_iters`` returns the current iterate with ``converged=False``.
    """
    opts = opts or SolverOptions()
    k = spec.k
    return _run(
        spec,
        opts,
        lambda V, t: prox_dual_2k(V, t, k),
        lambda X: combined_norm(X, spec.params),
        "kyfan2k",
        x0,
    )


def solve_kyfan_k_baseline(spec: ProblemSpec, opts: SolverOptions | None = None, *, x0=None) -> SolveOutcome:
    """Same problem with the dual Ky Fan k-norm in place of the dual 2-k norm."""
    opts = opts or SolverOptions()
    k, theta = spec.k, spec.theta
    return _run(
        spec,
        opts,
        lambda V, t: prox_dual_kyfan_k(V, t, k),
        lambda X: dual_kyfan_k_norm(X, k) + theta * float(np.abs(X).sum()),
        "kyfan_k",
        x0,
    )
