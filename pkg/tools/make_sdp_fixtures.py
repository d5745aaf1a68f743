"""Solve exported SDPA files offline and freeze the optima as test fixtures.

Each instance is exported with ``kyfan2k.solver.export_sdpa``, the file is
parsed back with ``read_sdpa`` and handed to ``cvxopt.solvers.sdp``. The
optimum, the sha256 of the exported text and the matrix ``A`` go into
``tests/fixtures/sdp_optima.json``. Requires cvxopt (and cvxpy for the
cross-check).

    python3 tools/make_sdp_fixtures.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

import numpy as np

from kyfan2k.norms import NormParams
from kyfan2k.solver import ProblemSpec, build_sdp, export_sdpa, read_sdpa

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "sdp_optima.json"
SEED = 20240611


def solve_sdpa_cvxopt(path):
    """Solve ``min c^T x s.t. sum_i F_i x_i - F_0 >= 0`` from an SDPA file."""
    import cvxopt
    from cvxopt import solvers

    data = read_sdpa(path)
    nv = data.num_vars
    psd = [(b, s) for b, s in enumerate(data.block_struct, start=1) if s > 0]
    lp = [(b, -s) for b, s in enumerate(data.block_struct, start=1) if s < 0]

    lp_rows = {}
    for b, size in lp:
        lp_rows[b] = np.zeros((size, nv + 1))
    gs = {b: np.zeros((size * size, nv + 1)) for b, size in psd}
    for (mat, blk, i, j), v in data.entries.items():
        if blk in lp_rows:
            lp_rows[blk][i - 1, mat] += v
        else:
            size = dict(psd)[blk]
            gs[blk][(j - 1) * size + (i - 1), mat] += v
            if i != j:
                gs[blk][(i - 1) * size + (j - 1), mat] += v

    # Rows r and r' with opposite coefficients and constants form an equality.
    ineq, eq = [], []
    for rows in lp_rows.values():
        used = set()
        for r in range(rows.shape[0]):
            if r in used:
                continue
            partner = None
            for s in range(r + 1, rows.shape[0]):
                if s not in used and np.array_equal(rows[s], -rows[r]) and np.any(rows[r]):
                    partner = s
                    break
            if partner is None:
                ineq.append(rows[r])
            else:
                used.add(partner)
                eq.append(rows[r])
    ineq = np.array(ineq)
    # sum F_i x_i - F_0 >= 0  <=>  -F x + s = -F_0, s >= 0
    Gl = cvxopt.matrix(-ineq[:, 1:])
    hl = cvxopt.matrix(-ineq[:, 0])
    Gs = [cvxopt.matrix(-g[:, 1:]) for g in gs.values()]
    hs = [cvxopt.matrix(-g[:, 0].reshape(size, size, order="F")) for g, (_, size) in zip(gs.values(), psd)]
    kw = {}
    if eq:
        eq = np.array(eq)
        kw = {"A": cvxopt.matrix(eq[:, 1:]), "b": cvxopt.matrix(eq[:, 0])}
    # Tight tolerances occasionally break down in the scaling update; loosen
    # step by step until a run finishes with an optimal status.
    last = None
    for tol in (1e-11, 1e-10, 1e-9, 1e-8):
        solvers.options.update({"show_progress": False, "abstol": tol, "reltol": tol, "feastol": tol, "maxiters": 200})
        try:
            sol = solvers.sdp(cvxopt.matrix(data.c), Gl, hl, Gs, hs, **kw)
        except (ArithmeticError, ValueError) as exc:
            last = exc
            continue
        if sol["status"] == "optimal":
            return sol["status"], float(sol["primal objective"]), np.array(sol["x"]).ravel()
        last = sol["status"]
    raise RuntimeError(f"cvxopt failed on {path}: {last}")


def cvxpy_value(A, k, theta):
    import cvxpy as cp

    from kyfan2k.norms import kyfan_2k_norm

    m, n = A.shape
    if m < n:
        A = A.T
        m, n = n, m
    X = cp.Variable((m, n))
    p = cp.Variable()
    P = cp.Variable((n, n), symmetric=True)
    R = cp.Variable((m, m), symmetric=True)
    cons = [
        k * p - cp.trace(P) == 0,
        p * np.eye(n) - P >> 0,
        cp.bmat([[P, -0.5 * X.T], [-0.5 * X, R]]) >> 0,
        cp.sum(cp.multiply(A, X)) >= 1,
    ]
    prob = cp.Problem(cp.Minimize(p + cp.trace(R) + theta * cp.sum(cp.abs(X))), cons)
    prob.solve(solver=cp.CLARABEL)
    del kyfan_2k_norm
    return float(prob.value)


def instances():
    rng = np.random.Generator(np.random.Philox(SEED))
    out = []
    ks = [1, 2]
    thetas = [0.0, 0.1, 1.0]
    for t in range(30):
        k = ks[t % 2]
        theta = thetas[(t // 2) % 3]
        m = int(rng.integers(2, 9))
        n = int(rng.integers(2, 9))
        A = rng.random((m, n)).round(6)
        if t % 5 == 4:
            # Sparse, block-like instance.
            A = A * (rng.random((m, n)) < 0.5)
            A[0, 0] = max(A[0, 0], 0.5)
        out.append((A, k, theta))
    return out


def main() -> int:
    records = []
    with tempfile.TemporaryDirectory() as tmp:
        for t, (A, k, theta) in enumerate(instances()):
            spec = ProblemSpec(A, NormParams(k, theta))
            path = Path(tmp) / f"inst{t}.dat-s"
            digest = export_sdpa(build_sdp(spec), path)
            status, value, _ = solve_sdpa_cvxopt(path)
            check = cvxpy_value(A, k, theta)
            print(f"{t:2d} {A.shape} k={k} theta={theta}: {status} {value:.12f} cvxpy {check:.12f}")
            if status != "optimal" or abs(value - check) > 1e-6 * max(1, abs(value)):
                print("  disagreement or failure", file=sys.stderr)
                return 1
            records.append({"A": A.tolist(), "k": k, "theta": theta, "sha256": digest, "optimum": value})
    OUT.write_text(json.dumps({"seed": SEED, "rng": "numpy Philox", "instances": records}, indent=1) + "\n")
    print(f"wrote {OUT}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
