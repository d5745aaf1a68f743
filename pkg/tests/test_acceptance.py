"""One test per acceptance criterion. Each prints a single PASS/FAIL line."""

import json
import math
import time

import numpy as np
import pytest

import oracles
from conftest import FIXTURES
from kyfan2k.datagen import BicliqueConfig, GeneExprConfig, gen_biclique, gen_gene_expression
from kyfan2k.evaluate import apply_threshold, evaluate_biclique, evaluate_genes, level_spread
from kyfan2k.linalg import inner, singular_values
from kyfan2k.norms import NormParams, dual_2k_norm, dual_gauge_2k, kyfan_2k_norm
from kyfan2k.recovery import (
    HeterogeneityParams,
    biclique_model,
    c_tauellbd,
    c_thetarange,
    constants,
    model_constants,
)
from kyfan2k.solver import (
    ProblemSpec,
    SolverOptions,
    build_sdp,
    certify,
    project_gauge2k_ball,
    sdpa_hash,
    solve,
    solve_kyfan_k_baseline,
)
from kyfan2k.subdiff import is_differentiable, matrix_subgrad_check, subgradient, vector_subgrad_check

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def _report(number: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return _report


def test_criterion_1_norm_stack(report):
    rng = np.random.default_rng(1)
    tol = 1e-8
    worst, count, t0 = 0.0, 0, time.perf_counter()
    for _ in range(1000):
        m, n = rng.integers(1, 21, size=2)
        A, B = rng.standard_normal((2, m, n))
        S = singular_values(A)
        a = rng.standard_normal()
        for k in range(1, min(m, n) + 1):
            for f in (kyfan_2k_norm, dual_2k_norm):
                fa, fb = f(A, k), f(B, k)
                scale = 1.0 + fa + fb
                viol = [
                    -fa / scale,
                    (f(A + B, k) - fa - fb) / scale,
                    abs(f(a * A, k) - abs(a) * fa) / scale,
                ]
                worst = max(worst, *viol)
            lhs = inner(A, B)
            rhs = dual_2k_norm(A, k) * kyfan_2k_norm(B, k)
            worst = max(worst, (lhs - rhs) / (1.0 + abs(rhs)))
            count += 1
        fro = np.linalg.norm(A)
        p = min(m, n)
        worst = max(
            worst,
            abs(kyfan_2k_norm(A, 1) - S[0]) / fro,
            abs(dual_2k_norm(A, 1) - S.sum()) / fro,
            abs(kyfan_2k_norm(A, p) - fro) / fro,
            abs(dual_2k_norm(A, p) - fro) / fro,
        )
    elapsed = time.perf_counter() - t0
    report(1, worst <= tol and elapsed < 60, f"{count} (matrix, k) pairs, worst relative violation {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_oracle_equivalence(report):
    rng = np.random.default_rng(2)
    gauge_err = proj_err = 0.0
    t0 = time.perf_counter()
    for _ in range(200):
        d = int(rng.integers(1, 9))
        k = int(rng.integers(1, d + 1))
        x = rng.standard_normal(d) * rng.choice([0.3, 1.0, 3.0])
        ref = max(oracles.slsqp_dual_gauge(x, k), oracles.cvx_dual_gauge(x, k))
        gauge_err = max(gauge_err, abs(dual_gauge_2k(x, k) - ref) / max(1.0, ref))
        y_ref = oracles.slsqp_project_ball(x, k)
        proj_err = max(proj_err, float(np.abs(project_gauge2k_ball(x, k) - y_ref).max()))
    elapsed = time.perf_counter() - t0
    ok = gauge_err <= 1e-5 and proj_err <= 1e-5 and elapsed < 120
    report(2, ok, f"dual gauge error {gauge_err:.2e}, projection error {proj_err:.2e}, {elapsed:.1f}s")


def _numeric_gradient(A, k, h):
    G = np.zeros_like(A)
    for idx in np.ndindex(A.shape):
        E = np.zeros_like(A)
        E[idx] = h
        G[idx] = (kyfan_2k_norm(A + E, k) - kyfan_2k_norm(A - E, k)) / (2 * h)
    return G


def test_criterion_3_subdifferential(report):
    rng = np.random.default_rng(3)
    fd_err, checked = 0.0, 0
    while checked < 200:
        A = rng.standard_normal(tuple(rng.integers(2, 7, size=2)))
        k = int(rng.integers(1, min(A.shape) + 1))
        if not is_differentiable(A, k, tie_tol=1e-3):
            continue
        G = _numeric_gradient(A, k, 1e-6 * np.linalg.norm(A))
        fd_err = max(fd_err, float(np.abs(G - subgradient(A, k)).max()))
        checked += 1

    s5, s13 = math.sqrt(5), math.sqrt(13)
    accepted = [
        vector_subgrad_check((3, 2, 1), np.array([3, 2, 0]) / s13, 2),
        vector_subgrad_check((2, 1, 1), np.array([2, 0.5, 0.5]) / s5, 2),
        vector_subgrad_check((2, 1, 1), np.array([2, 1, 0]) / s5, 2),
        matrix_subgrad_check(np.diag([2.0, 1, 1]), np.diag([2, 0.5, 0.5]) / s5, 2),
        matrix_subgrad_check(np.diag([2.0, 1, 1]), np.diag([2, 0.8, 0.2]) / s5, 2),
    ]
    off = np.diag([2, 0.5, 0.5]) / s5
    off[1, 2] = 0.2 / s5
    rejected = [
        vector_subgrad_check((2, 1, 1), np.array([2, 1.2, -0.2]) / s5, 2),
        vector_subgrad_check((2, 1, 1), np.array([2, 0.5, 0.4]) / s5, 2),
        vector_subgrad_check((2, 1, 1), np.array([2.1, 0.5, 0.5]) / s5, 2),
        vector_subgrad_check((3, 2, 1), np.array([3, 2, 0.1]) / s13, 2),
        matrix_subgrad_check(np.diag([2.0, 1, 1]), np.diag([2, 1.2, -0.2]) / s5, 2),
        matrix_subgrad_check(np.diag([2.0, 1, 1]), off, 2),
    ]
    ok = fd_err <= 1e-5 and all(accepted) and not any(rejected)
    report(3, ok, f"finite-difference error {fd_err:.2e} at {checked} points, "
                  f"ties accepted {sum(accepted)}/{len(accepted)}, violators rejected {len(rejected) - sum(rejected)}/{len(rejected)}")


def test_criterion_4_solver_vs_sdp_fixtures(report):
    data = json.loads((FIXTURES / "sdp_optima.json").read_text())["instances"]
    worst, hashes_ok = 0.0, True
    for inst in data:
        spec = ProblemSpec(np.array(inst["A"]), NormParams(inst["k"], inst["theta"]))
        hashes_ok &= sdpa_hash(build_sdp(spec)) == inst["sha256"]
        out = solve(spec)
        worst = max(worst, abs(out.objective - inst["optimum"]) / max(1.0, abs(inst["optimum"])))
    report(4, worst <= 1e-5 and hashes_ok and len(data) == 30,
           f"{len(data)} fixtures, worst objective gap {worst:.2e}, export hashes match: {hashes_ok}")


def test_criterion_5_certificate_closure(report):
    rng = np.random.default_rng(5)
    opts = SolverOptions(max_iters=20000)
    passed = converged = total = 0
    worst = 0.0
    for _ in range(24):
        m, n = (int(v) for v in rng.integers(2, 21, size=2))
        k = int(rng.integers(1, min(m, n) + 1))
        theta = float(rng.choice([0.0, 0.01, 0.05, 0.1]))
        A = rng.random((m, n)) if rng.random() < 0.5 else rng.standard_normal((m, n))
        spec = ProblemSpec(A, NormParams(k, theta))
        out = solve(spec, opts)
        total += 1
        if not out.converged:
            continue
        converged += 1
        rep = certify(spec, out.X, tol=1e-5)
        conds = [rep.condition(c) for c in ("i", "ii", "iii", "iv")]
        worst = max(worst, max(c.residual for c in conds if c.passed is not None))
        passed += all(c.passed is not False for c in conds)
    ok = converged > 0 and passed == converged
    report(5, ok, f"{passed}/{converged} converged solves certified ({total} run), worst residual {worst:.2e}")


def test_criterion_6_biclique(report):
    t0 = time.perf_counter()
    opts = SolverOptions(max_iters=20000)
    # p = 0.05, m = n = 30, midpoint of the admissible interval
    inst = gen_biclique(BicliqueConfig(30, 30, 0.05, seed=1))
    theta_mid = 0.5 * (0.376 + 0.752) / 30
    rep = evaluate_biclique(solve(ProblemSpec(inst.A, NormParams(2, theta_mid)), opts).X, inst.layout)
    d_low = max(rep.delta0, rep.delta1)
    # p = 0.3, m = n = 50, across the transition
    inst = gen_biclique(BicliqueConfig(50, 50, 0.3, seed=1))
    ds = []
    for theta in (0.03, 0.04):
        r = evaluate_biclique(solve(ProblemSpec(inst.A, NormParams(2, theta)), opts).X, inst.layout)
        ds.append(max(r.delta0, r.delta1))
    ratio = ds[0] / max(ds[1], 1e-300)
    # p = 0.8: no theta in the grid recovers the blocks
    inst = gen_biclique(BicliqueConfig(30, 30, 0.8, seed=1))
    d_high = []
    for theta in (0.01, 0.03, 0.1):
        r = evaluate_biclique(solve(ProblemSpec(inst.A, NormParams(2, theta)), opts).X, inst.layout)
        d_high.append(max(r.delta0, r.delta1))
    elapsed = time.perf_counter() - t0
    ok = d_low <= 1e-4 and ratio >= 1e4 and min(d_high) > 0.1 and elapsed < 300
    report(6, ok, f"p=0.05 max delta {d_low:.1e}; p=0.3 deltas {ds[0]:.1e} -> {ds[1]:.1e} (ratio {ratio:.1e}); "
                  f"p=0.8 min delta {min(d_high):.2f}; {elapsed:.0f}s")


def test_criterion_7_gene_expression(report):
    t0 = time.perf_counter()
    opts = SolverOptions(max_iters=20000)
    inst = gen_gene_expression(GeneExprConfig(sigma=0.0, seed=0))
    exact = evaluate_genes(solve(ProblemSpec(inst.A, NormParams(10, 0.07)), opts).X, inst.A, inst.layout)
    worst = 1.0
    for sigma in (0.0, 0.02, 0.04, 0.06, 0.08, 0.1):
        rel, rec = [], []
        for seed in range(3):
            inst = gen_gene_expression(GeneExprConfig(sigma=sigma, seed=seed))
            r = evaluate_genes(solve(ProblemSpec(inst.A, NormParams(10, 0.07)), opts).X, inst.A, inst.layout)
            rel.append(r.relevance)
            rec.append(r.recovery)
        worst = min(worst, float(np.mean(rel)), float(np.mean(rec)))
    elapsed = time.perf_counter() - t0
    ok = exact.relevance == 1.0 and exact.recovery == 1.0 and worst >= 0.99
    report(7, ok, f"sigma=0 relevance={exact.relevance} recovery={exact.recovery}; "
                  f"worst averaged score over the sigma grid {worst:.4f}; {elapsed:.0f}s")


def test_criterion_8_constants(report):
    _, c = model_constants(biclique_model())
    sig = lambda v: float(f"{v:.3g}")  # noqa: E731
    ok_range = sig(c.c_thetarange) == sig(25 / 94)
    ok_mubd = sig(c.c_mubd) == 0.0473 and round(c.c_mubd, 3) == 0.047

    rng = np.random.default_rng(8)
    ident, mubd_max = 0.0, 0.0
    for _ in range(10_000):
        k = int(rng.integers(1, 21))
        du, dv = rng.uniform(0.01, 1.0, size=2)
        p = HeterogeneityParams(
            k, du, dv, *rng.uniform(1.0, 20.0, size=2), du * rng.uniform(0.01, 1.0), dv * rng.uniform(0.01, 1.0),
            *rng.uniform(1.0, 20.0, size=3),
        )
        ctl, ctr = c_tauellbd(p), c_thetarange(p)
        r = p.rho_m * p.rho_n
        rhs = 25 / 36 * math.sqrt((p.k + r - 1) / (p.k * r)) * math.sqrt(ctr**-2 / 4 - 1)
        ident = max(ident, abs(ctl - rhs) / ctl)
        rel_ctl, rel_ctr = c_tauellbd(p, True), c_thetarange(p, True)
        ident = max(ident, abs(rel_ctl - 25 / 36 * (1 / (2 * rel_ctr) + 1)) / rel_ctl)
        cs = constants(p, rng.uniform(0.0, 10.0), rng.uniform(0.0, 5.0))
        mubd_max = max(mubd_max, cs.c_mubd)
    ok = ok_range and ok_mubd and ident <= 1e-10 and mubd_max < 0.08
    report(8, ok, f"c_thetarange={c.c_thetarange:.6f} (25/94={25 / 94:.6f}), c_mubd={c.c_mubd:.4f}, "
                  f"identity error {ident:.1e}, max c_mubd over 1e4 draws {mubd_max:.4f}")


def test_criterion_9_baseline_contrast(report):
    k, theta = 10, 0.07
    inst = gen_gene_expression(GeneExprConfig(sigma=0.0, seed=0))
    opts = SolverOptions(max_iters=20000)
    spreads, supports = {}, {}
    for label, fn, th in (("kyfan2k", solve, theta), ("kyfan_k", solve_kyfan_k_baseline, theta / math.sqrt(k))):
        X = fn(ProblemSpec(inst.A, NormParams(k, th)), opts).X
        rep = evaluate_genes(X, inst.A, inst.layout)
        spreads[label] = level_spread(apply_threshold(rep.alpha * X, rep.threshold), inst.layout)
        supports[label] = rep.relevance == 1.0 and rep.recovery == 1.0
    ratio = spreads["kyfan2k"] / max(spreads["kyfan_k"], 1e-300)
    ok = ratio >= 5 and all(supports.values())
    report(9, ok, f"level spread kyfan2k={spreads['kyfan2k']:.3g}, baseline={spreads['kyfan_k']:.3g} "
                  f"(ratio {ratio:.3g}); supports recovered {supports}")
