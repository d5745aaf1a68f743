"""Command-line driver: solve single instances, run the two synthetic
experiments, evaluate recovery constants and export SDPs.

Every command writes an output bundle::

    OUT/config.snapshot   effective configuration (INI), re-runnable with --config
    OUT/report.txt        human-readable summary
    OUT/tables/*.csv      machine-readable results
    OUT/plots/*.svg       figures derived from the tables
    OUT/matrices/*.txt    matrices in the plain-text matrix format

Exit codes: 0 success, 1 some solve did not converge (results still
written), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import logging
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import datagen, evaluate, plotting, recovery
from .linalg import read_matrix, write_matrix
from .norms import NormParams
from .solver import (
    InfeasibleProblemError,
    ProblemSpec,
    SolverOptions,
    build_certificate,
    build_sdp,
    certificate_check,
    export_sdpa,
    mapping_text,
    solve,
    solve_kyfan_k_baseline,
)

log = logging.getLogger("kyfan2k")

EXIT_OK, EXIT_NONCONVERGED, EXIT_USAGE = 0, 1, 2

DEFAULTS: dict[str, dict[str, object]] = {
    "solver": {
        "step": "auto",
        "relaxation": 1.0,
        "max_iters": 200000,
        "tol": 1e-8,
        "feas_tol": 1e-7,
        "opt_tol": 1e-6,
    },
    "norms": {"dual_tol": 1e-9, "dual_max_iter": 50000, "certificate_tol": 1e-5},
    "eval": {"min_ratio": 1000.0, "plateau_window": 0.1, "theta_min_cutoff": 1e-4},
    "solve": {"input": "", "demo": False, "k": 2, "theta": 0.1, "model": "kyfan2k"},
    "biclique": {
        "m": 50,
        "n": 50,
        "seed": 1,
        "p_grid": "0.05,0.15,0.25,0.35,0.45,0.55,0.65,0.75,0.85,0.95",
        "theta_lo": 0.005,
        "theta_hi": 1.0,
        "theta_count": 20,
        "theta_spacing": "geometric",
        "focus_p": 0.3,
        "baseline": True,
        "max_iters": 20000,
        "workers": 1,
    },
    "genes": {
        "genes": 100,
        "conditions": 50,
        "modules": 10,
        "genes_per_module": 10,
        "conds_per_module": 5,
        "k": 10,
        "theta": 0.07,
        "sigma_grid": "0,0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.08,0.09,0.1",
        "seeds": 10,
        "seed_base": 1000,
        "sweep": False,
        "theta_lo": 0.005,
        "theta_hi": 1.0,
        "theta_count": 20,
        "reduced_k": 0,
        "reduced_sigma": 0.3,
        "baseline": True,
        "baseline_theta_scale": "auto",
        "max_iters": 20000,
        "workers": 1,
    },
    "constants": {"model": "biclique", "m": 50, "n": 50, "p": 0.05, "relaxed": "auto", "theta": ""},
    "export-sdpa": {"input": "", "demo": False, "k": 2, "theta": 0.1},
}

COMMANDS = ("solve", "biclique", "genes", "constants", "export-sdpa")


class UsageError(Exception):
    """Bad configuration or unreadable input; maps to exit code 2."""


# ---------------------------------------------------------------------------
# configuration


def _parse_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


class Config:
    """Typed view of an INI document layered over :data:`DEFAULTS`."""

    def __init__(self, parser: configparser.ConfigParser):
        self.parser = parser

    @classmethod
    def load(cls, path: str | None, overrides: list[str]) -> "Config":
        cp = configparser.ConfigParser(interpolation=None)
        for section, values in DEFAULTS.items():
            cp[section] = {key: str(val) for key, val in values.items()}
        if path:
            p = Path(path)
            if not p.is_file():
                raise UsageError(f"config file not found: {path}")
            user = configparser.ConfigParser(interpolation=None)
            user.read(p)
            for section in user.sections():
                if section not in DEFAULTS:
                    raise UsageError(f"unknown config section [{section}]")
                for key, val in user[section].items():
                    cls._check_key(section, key)
                    cp[section][key] = val
        for item in overrides:
            if "=" not in item or "." not in item.split("=", 1)[0]:
                raise UsageError(f"override must look like section.key=value, got {item!r}")
            lhs, val = item.split("=", 1)
            section, key = lhs.rsplit(".", 1)
            cls._check_key(section, key)
            cp[section][key] = val
        cfg = cls(cp)
        cfg.validate()
        return cfg

    @staticmethod
    def _check_key(section: str, key: str) -> None:
        if section not in DEFAULTS or key not in DEFAULTS[section]:
            raise UsageError(f"unknown config key {section}.{key}")

    def get(self, section: str, key: str):
        raw = self.parser[section][key]
        default = DEFAULTS[section][key]
        try:
            if isinstance(default, bool):
                return _parse_bool(raw)
            if isinstance(default, int):
                return int(raw)
            if isinstance(default, float):
                return float(raw)
        except ValueError as exc:
            raise UsageError(f"{section}.{key}: {exc}") from exc
        return raw

    def floats(self, section: str, key: str) -> list[float]:
        try:
            return [float(t) for t in str(self.get(section, key)).split(",") if t.strip()]
        except ValueError as exc:
            raise UsageError(f"{section}.{key}: {exc}") from exc

    def validate(self) -> None:
        for section, values in DEFAULTS.items():
            for key in values:
                self.get(section, key)

    def set(self, section: str, key: str, value) -> None:
        self.parser[section][key] = str(value)

    def snapshot(self, command: str) -> str:
        buf = io.StringIO()
        buf.write(f"# kyfan2k {command}\n")
        out = configparser.ConfigParser(interpolation=None)
        for section in ("solver", "norms", "eval", command):
            out[section] = dict(self.parser[section])
        out.write(buf)
        return buf.getvalue()

    def solver_options(self, max_iters: int | None = None) -> SolverOptions:
        step = str(self.get("solver", "step")).strip().lower()
        try:
            return SolverOptions(
                step=None if step in ("auto", "") else float(step),
                relaxation=self.get("solver", "relaxation"),
                max_iters=max_iters or self.get("solver", "max_iters"),
                tol=self.get("solver", "tol"),
                feas_tol=self.get("solver", "feas_tol"),
                opt_tol=self.get("solver", "opt_tol"),
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# bundle helpers


class Bundle:
    def __init__(self, root: Path, cfg: Config, command: str):
        self.root = root
        self.snapshot = cfg.snapshot(command)
        self.hash = hashlib.sha256(self.snapshot.encode()).hexdigest()[:16]
        for sub in ("tables", "plots", "matrices"):
            (root / sub).mkdir(parents=True, exist_ok=True)
        (root / "config.snapshot").write_text(self.snapshot)
        self.report: list[str] = []

    @property
    def provenance(self) -> str:
        return f"kyfan2k config sha256:{self.hash}"

    def table(self, name: str, rows: list[list]) -> Path:
        path = self.root / "tables" / f"{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for row in rows:
                w.writerow([_cell(v) for v in row])
        return path

    def matrix(self, name: str, M) -> None:
        write_matrix(self.root / "matrices" / f"{name}.txt", M)

    def plot_path(self, name: str) -> Path:
        return self.root / "plots" / f"{name}.svg"

    def say(self, line: str = "") -> None:
        self.report.append(line)

    def close(self) -> None:
        (self.root / "report.txt").write_text("\n".join(self.report) + "\n")


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    if v is None:
        return ""
    return str(v)


def _theta_grid(lo: float, hi: float, count: int, spacing: str = "geometric") -> list[float]:
    if not 0 < lo < hi or count < 1:
        raise UsageError("theta grid needs 0 < theta_lo < theta_hi and theta_count >= 1")
    if count == 1:
        return [lo]
    if spacing == "geometric":
        return [float(t) for t in np.geomspace(lo, hi, count)]
    if spacing == "linear":
        return [float(t) for t in np.linspace(lo, hi, count)]
    raise UsageError(f"unknown theta spacing {spacing!r}")


def demo_matrix() -> np.ndarray:
    """Shipped 4 x 4 example: two all-ones 2 x 2 diagonal blocks."""
    ref = resources.files("kyfan2k") / "data" / "demo_two_block.txt"
    with resources.as_file(ref) as path:
        return read_matrix(path)


def _load_input(cfg: Config, section: str) -> np.ndarray:
    if cfg.get(section, "demo"):
        return demo_matrix()
    path = str(cfg.get(section, "input")).strip()
    if not path:
        raise UsageError("no input matrix: pass --input FILE or --demo")
    try:
        return read_matrix(path)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _spec(A, k: int, theta: float) -> ProblemSpec:
    try:
        return ProblemSpec(A, NormParams(k, theta))
    except InfeasibleProblemError as exc:
        raise UsageError(f"infeasible instance: {exc}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# commands


def cmd_solve(cfg: Config, out: Path) -> int:
    A = _load_input(cfg, "solve")
    k, theta = cfg.get("solve", "k"), cfg.get("solve", "theta")
    model = cfg.get("solve", "model")
    if model not in ("kyfan2k", "kyfan_k"):
        raise UsageError("solve.model must be kyfan2k or kyfan_k")
    spec = _spec(A, k, theta)
    opts = cfg.solver_options()
    b = Bundle(out, cfg, "solve")
    runner = solve if model == "kyfan2k" else solve_kyfan_k_baseline
    res = runner(spec, opts)
    b.matrix("input", A)
    b.matrix("solution", res.X)
    b.say(f"model: {model}  k={k}  theta={theta:g}  shape={A.shape[0]}x{A.shape[1]}")
    if theta == 0:
        b.say("note: theta = 0, so the problem finds a k-approximation of A (no sparsity term)")
    b.say(f"objective: {res.objective:.12g}")
    b.say(f"constraint <A,X>: {res.constraint_value:.12g}")
    b.say(f"iterations: {res.iterations}  converged: {res.converged}  residual: {res.primal_residual:.3e}")

    cut = evaluate.threshold_detect(res.X, cfg.get("eval", "min_ratio"))
    support = evaluate.apply_threshold(res.X, cut.value)
    clusters = evaluate.extract_biclusters(support)
    b.say(f"threshold: {cut.value:.3e}  gap found: {cut.gap_found}  ratio: {cut.ratio:.3g}")
    b.say(f"blocks found: {len(clusters)}")
    rows = [["block", "rows", "cols"]]
    for t, (r, c) in enumerate(clusters.clusters, start=1):
        rows.append([t, " ".join(map(str, sorted(r))), " ".join(map(str, sorted(c)))])
        b.say(f"  block {t}: rows {sorted(r)} cols {sorted(c)}")
    b.table("blocks", rows)

    if model == "kyfan2k":
        cert = build_certificate(
            spec, res.X, dual_tol=cfg.get("norms", "dual_tol"), dual_max_iter=cfg.get("norms", "dual_max_iter")
        )
        rep = certificate_check(spec, res.X, cert, cfg.get("norms", "certificate_tol"))
        b.say("certificate:")
        for line in rep.lines():
            b.say("  " + line)
        b.table(
            "certificate",
            [["condition", "status", "residual"]]
            + [[c.name, "n/a" if c.passed is None else int(c.passed), c.residual] for c in rep.conditions],
        )
        b.say(f"duality bound 1/dual norm: {cert.lam:.12g}")
    b.table(
        "summary",
        [
            ["objective", "iterations", "converged", "constraint_value", "primal_residual"],
            [res.objective, res.iterations, res.converged, res.constraint_value, res.primal_residual],
        ],
    )
    b.close()
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def cmd_biclique(cfg: Config, out: Path) -> int:
    s = "biclique"
    m, n, seed = cfg.get(s, "m"), cfg.get(s, "n"), cfg.get(s, "seed")
    p_grid = cfg.floats(s, "p_grid")
    thetas = _theta_grid(cfg.get(s, "theta_lo"), cfg.get(s, "theta_hi"), cfg.get(s, "theta_count"), cfg.get(s, "theta_spacing"))
    focus = cfg.get(s, "focus_p")
    try:
        datagen.BicliqueConfig(m=m, n=n, p=0.0, seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    opts = cfg.solver_options(cfg.get(s, "max_iters"))
    workers = cfg.get(s, "workers")
    cutoff = cfg.get("eval", "theta_min_cutoff")
    b = Bundle(out, cfg, s)
    b.say(f"biclique experiment: m={m} n={n} seed={seed}, {len(thetas)} theta values in [{thetas[0]:g}, {thetas[-1]:g}]")

    all_ok = True
    tmin_rows = [["p", "theta_min", "recovered"]]
    sweeps = {}
    grid = sorted(set(p_grid) | {focus})
    for p in grid:
        inst = datagen.gen_biclique(datagen.BicliqueConfig(m=m, n=n, p=p, seed=seed))
        res = evaluate.theta_sweep(
            inst.A, 2, thetas, layout=inst.layout, protocol="biclique", opts=opts, workers=workers,
            min_ratio=cfg.get("eval", "min_ratio"), window=cfg.get("eval", "plateau_window"),
        )
        sweeps[p] = res
        all_ok &= all(r.converged for r in res.rows)
        b.table(f"sweep_p{p:.2f}", res.table())
        if p in p_grid:
            tm = evaluate.theta_min(res.rows, cutoff)
            tmin_rows.append([p, "" if tm is None else tm, tm is not None])
            b.say(f"p={p:.2f}: theta_min={'none (recovery failed)' if tm is None else f'{tm:.4g}'}")
    b.table("theta_min", tmin_rows)
    rec = [(r[0], r[1]) for r in tmin_rows[1:] if r[2]]
    if rec:
        plotting.line_plot(
            b.plot_path("theta_min_vs_p"), [x for x, _ in rec], {"theta_min": [y for _, y in rec]},
            xlabel="p", ylabel="theta_min", title="Smallest recovering theta", provenance=b.provenance,
        )
    fr = sweeps[focus]
    plotting.line_plot(
        b.plot_path("deltas_vs_theta"), fr.thetas,
        {"delta0": np.maximum(fr.column("delta0"), 1e-16), "delta1": np.maximum(fr.column("delta1"), 1e-16)},
        xlabel="theta", ylabel="max deviation", title=f"Block deviations at p={focus:g}",
        provenance=b.provenance, logx=True, logy=True,
    )
    if cfg.get(s, "baseline"):
        inst = datagen.gen_biclique(datagen.BicliqueConfig(m=m, n=n, p=focus, seed=seed))
        base = evaluate.theta_sweep(
            inst.A, 2, thetas, layout=inst.layout, protocol="biclique", opts=opts, model="kyfan_k",
            workers=workers, min_ratio=cfg.get("eval", "min_ratio"),
        )
        all_ok &= all(r.converged for r in base.rows)
        b.table(f"sweep_baseline_p{focus:.2f}", base.table())
        both = lambda r: np.maximum(np.fmax(r.column("delta0"), r.column("delta1")), 1e-16)  # noqa: E731
        plotting.line_plot(
            b.plot_path("model_comparison"), fr.thetas,
            {"Ky Fan 2-k": both(fr), "Ky Fan k": both(base)},
            xlabel="theta", ylabel="max(delta0, delta1)",
            title=f"Model comparison at p={focus:g} (trace-norm model omitted)",
            provenance=b.provenance, logx=True, logy=True,
        )
        b.say("model comparison: trace-norm series omitted (out of scope)")
    b.close()
    return EXIT_OK if all_ok else EXIT_NONCONVERGED


def _gene_cfg(cfg: Config, sigma: float, seed: int) -> datagen.GeneExprConfig:
    s = "genes"
    try:
        return datagen.GeneExprConfig(
            genes=cfg.get(s, "genes"),
            conditions=cfg.get(s, "conditions"),
            modules=cfg.get(s, "modules"),
            genes_per_module=cfg.get(s, "genes_per_module"),
            conds_per_module=cfg.get(s, "conds_per_module"),
            sigma=sigma,
            seed=seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_genes(cfg: Config, out: Path) -> int:
    s = "genes"
    k, theta = cfg.get(s, "k"), cfg.get(s, "theta")
    sigmas = cfg.floats(s, "sigma_grid")
    seeds, base = cfg.get(s, "seeds"), cfg.get(s, "seed_base")
    if seeds < 1 or not sigmas:
        raise UsageError("genes needs at least one seed and one sigma")
    opts = cfg.solver_options(cfg.get(s, "max_iters"))
    min_ratio = cfg.get("eval", "min_ratio")
    for sg in sigmas:
        _gene_cfg(cfg, sg, base)
    scale_txt = str(cfg.get(s, "baseline_theta_scale")).strip().lower()
    try:
        scale = 1.0 / math.sqrt(k) if scale_txt == "auto" else float(scale_txt)
    except ValueError as exc:
        raise UsageError(f"genes.baseline_theta_scale: {exc}") from exc
    if not scale > 0:
        raise UsageError("genes.baseline_theta_scale must be positive")
    b = Bundle(out, cfg, s)
    all_ok = True
    b.say(f"gene expression experiment: k={k} theta={theta:g} seeds per sigma={seeds}")

    if cfg.get(s, "sweep"):
        inst = datagen.gen_gene_expression(_gene_cfg(cfg, 0.0, base))
        thetas = _theta_grid(cfg.get(s, "theta_lo"), cfg.get(s, "theta_hi"), cfg.get(s, "theta_count"))
        res = evaluate.theta_sweep(
            inst.A, k, thetas, layout=inst.layout, protocol="genes", opts=opts,
            workers=cfg.get(s, "workers"), window=cfg.get("eval", "plateau_window"), min_ratio=min_ratio,
        )
        all_ok &= all(r.converged for r in res.rows)
        b.table("theta_sweep", res.table())
        plotting.line_plot(
            b.plot_path("lcurve"), res.column("fit_residual"), {"magnitude": res.column("magnitude")},
            xlabel="||alpha X - E||_F", ylabel="Ky Fan 2-k norm of alpha X",
            title="Averaging effect vs magnitude", provenance=b.provenance,
        )
        if res.plateau:
            b.say(f"plateau (flat within {cfg.get('eval', 'plateau_window'):g}): theta in [{res.plateau[0]:.4g}, {res.plateau[1]:.4g}]")
        else:
            b.say("plateau: none detected")

    rows = [["sigma", "seed", "relevance", "recovery", "blocks", "iterations", "converged"]]
    means = [["sigma", "relevance_mean", "recovery_mean", "runs", "nonconverged"]]
    for sg in sigmas:
        rel, rec, bad = [], [], 0
        for t in range(seeds):
            inst = datagen.gen_gene_expression(_gene_cfg(cfg, sg, base + t))
            res = solve(ProblemSpec(inst.A, NormParams(k, theta)), opts)
            rep = evaluate.evaluate_genes(res.X, inst.A, inst.layout, min_ratio)
            rel.append(rep.relevance)
            rec.append(rep.recovery)
            bad += not res.converged
            rows.append([sg, base + t, rep.relevance, rep.recovery, len(rep.clusters), res.iterations, res.converged])
            if sg == sigmas[0] and t == 0:
                b.matrix("original", inst.A)
                b.matrix("recovered", rep.alpha * res.X)
                plotting.heatmaps(
                    b.plot_path("recovery_heatmap"),
                    {"original": inst.A, "recovered": evaluate.apply_threshold(rep.alpha * res.X, rep.threshold)},
                    title=f"sigma={sg:g}, theta={theta:g}", provenance=b.provenance,
                )
        all_ok &= bad == 0
        means.append([sg, float(np.mean(rel)), float(np.mean(rec)), seeds, bad])
        b.say(f"sigma={sg:g}: relevance={np.mean(rel):.4f} recovery={np.mean(rec):.4f} nonconverged={bad}")
    b.table("scores_by_seed", rows)
    b.table("scores", means)
    plotting.line_plot(
        b.plot_path("match_scores"), [r[0] for r in means[1:]],
        {"relevance": [r[1] for r in means[1:]], "recovery": [r[2] for r in means[1:]]},
        xlabel="sigma", ylabel="score", title="Match scores vs noise level", provenance=b.provenance,
    )

    if cfg.get(s, "baseline"):
        inst = datagen.gen_gene_expression(_gene_cfg(cfg, sigmas[0], base))
        main_res = solve(ProblemSpec(inst.A, NormParams(k, theta)), opts)
        base_res = solve_kyfan_k_baseline(ProblemSpec(inst.A, NormParams(k, theta * scale)), opts)
        all_ok &= main_res.converged and base_res.converged
        fits = {}
        for label, res in (("kyfan2k", main_res), ("kyfan_k", base_res)):
            rep = evaluate.evaluate_genes(res.X, inst.A, inst.layout, min_ratio)
            fits[label] = (rep, evaluate.apply_threshold(rep.alpha * res.X, rep.threshold))
        planted = evaluate.block_means(inst.A, inst.layout)
        lv = {label: evaluate.block_means(M, inst.layout) for label, (_, M) in fits.items()}
        rows_b = [["module", "planted_mean", "kyfan2k_mean", "kyfan_k_mean"]]
        for t in range(len(planted)):
            rows_b.append([t + 1, planted[t], lv["kyfan2k"][t], lv["kyfan_k"][t]])
        b.table("baseline_levels", rows_b)
        b.say(
            f"level spread (sigma={sigmas[0]:g}): planted={np.ptp(planted):.4g} "
            f"kyfan2k={np.ptp(lv['kyfan2k']):.4g} kyfan_k={np.ptp(lv['kyfan_k']):.4g} "
            f"(baseline theta={theta * scale:.4g})"
        )
        for label, (rep, _) in fits.items():
            b.say(f"  {label}: relevance={rep.relevance:.4f} recovery={rep.recovery:.4f}")
        plotting.heatmaps(
            b.plot_path("baseline_heatmap"),
            {"original": inst.A, "Ky Fan 2-k": fits["kyfan2k"][1], "Ky Fan k": fits["kyfan_k"][1]},
            title="Recovered modules by model (trace-norm model omitted)", provenance=b.provenance,
        )

    rk = cfg.get(s, "reduced_k")
    if rk:
        sg = cfg.get(s, "reduced_sigma")
        inst = datagen.gen_gene_expression(_gene_cfg(cfg, sg, base))
        cmp_rows = [["k", "relevance", "recovery", "blocks", "converged"]]
        for kk in (k, rk):
            res = solve(ProblemSpec(inst.A, NormParams(kk, theta)), opts)
            rep = evaluate.evaluate_genes(res.X, inst.A, inst.layout, min_ratio)
            all_ok &= res.converged
            cmp_rows.append([kk, rep.relevance, rep.recovery, len(rep.clusters), res.converged])
            b.say(f"sigma={sg:g}, k={kk}: relevance={rep.relevance:.4f} recovery={rep.recovery:.4f} blocks={len(rep.clusters)}")
        b.table("reduced_k", cmp_rows)
    b.close()
    return EXIT_OK if all_ok else EXIT_NONCONVERGED


def _load_model(cfg: Config) -> recovery.BlockModel:
    s = "constants"
    name = str(cfg.get(s, "model")).strip()
    try:
        if name == "biclique":
            return recovery.biclique_model(cfg.get(s, "m"), cfg.get(s, "n"), cfg.get(s, "p"))
        if name == "single-block":
            return recovery.single_block_model(cfg.get(s, "m"), cfg.get(s, "n"))
        path = Path(name)
        if not path.is_file():
            raise UsageError(f"unknown model {name!r}: use biclique, single-block or a JSON file")
        return datagen.model_from_dict(json.loads(path.read_text()))
    except (ValueError, KeyError) as exc:
        raise UsageError(f"invalid model: {exc}") from exc


def cmd_constants(cfg: Config, out: Path) -> int:
    s = "constants"
    model = _load_model(cfg)
    relaxed_cfg = str(cfg.get(s, "relaxed")).strip().lower()
    relaxed = None if relaxed_cfg == "auto" else _parse_bool(relaxed_cfg)
    try:
        p, consts = recovery.model_constants(model, relaxed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    theta_txt = str(cfg.get(s, "theta")).strip()
    try:
        theta = float(theta_txt) if theta_txt else None
    except ValueError as exc:
        raise UsageError(f"constants.theta: {exc}") from exc
    rep = recovery.hypothesis_check(model, p, consts, theta)
    b = Bundle(out, cfg, s)
    b.table("heterogeneity", [["name", "value"]] + [[key, val] for key, val in vars(p).items()])
    b.table("constants", [["name", "value"]] + [[key, val] for key, val in consts.as_dict().items()])
    b.table(
        "hypotheses",
        [["name", "lhs", "rhs", "verdict", "note"]] + [[r.name, r.lhs, r.rhs, r.verdict, r.note] for r in rep.records],
    )
    b.say(f"model: k={model.k} k0={model.k0} blocks m={model.m} n={model.n} relaxed={consts.relaxed}")
    b.say("heterogeneity: " + ", ".join(f"{key}={val:g}" for key, val in vars(p).items()))
    for key, val in consts.as_dict().items():
        b.say(f"  {key} = {val}")
    mn = math.sqrt(sum(model.m) * sum(model.n))
    b.say(
        f"admissible theta: [{consts.theta_lo:.6g}, {consts.theta_hi:.6g}]"
        f" = [{consts.c_thetarange:.4g}, {2 * consts.c_thetarange:.4g}] * (sum m_i n_i)^(-1/2)"
        f" = [{consts.theta_lo * mn:.4g}, {consts.theta_hi * mn:.4g}] * (mn)^(-1/2)"
    )
    b.say("hypotheses:")
    for r in rep.records:
        flag = "  <<< FAIL" if r.verdict == "fail" else ""
        b.say(f"  {r.name:14s} {r.verdict:8s} lhs={r.lhs:.6g} rhs={r.rhs:.6g} {r.note}{flag}")
    b.close()
    return EXIT_OK


def cmd_export_sdpa(cfg: Config, out: Path) -> int:
    s = "export-sdpa"
    A = _load_input(cfg, s)
    spec = _spec(A, cfg.get(s, "k"), cfg.get(s, "theta"))
    sdp = build_sdp(spec)
    out.mkdir(parents=True, exist_ok=True)
    digest = export_sdpa(sdp, out / "problem.dat-s")
    (out / "mapping.txt").write_text(mapping_text(sdp))
    (out / "config.snapshot").write_text(cfg.snapshot(s))
    (out / "report.txt").write_text(
        f"wrote problem.dat-s ({sdp.num_vars} variables, blocks {sdp.block_struct})\n"
        f"sha256: {digest}\ntransposed: {sdp.transposed}\n"
    )
    return EXIT_OK


HANDLERS = {
    "solve": cmd_solve,
    "biclique": cmd_biclique,
    "genes": cmd_genes,
    "constants": cmd_constants,
    "export-sdpa": cmd_export_sdpa,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kyfan2k", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} command")
        sp.add_argument("--config", help="INI config file (sections as in config.snapshot)")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override a config key")
        sp.add_argument("--out", required=True, help="output directory")
        if name in ("solve", "export-sdpa"):
            sp.add_argument("--input", help="matrix file")
            sp.add_argument("--demo", action="store_true", help="use the shipped 4x4 two-block matrix")
            sp.add_argument("--k", type=int)
            sp.add_argument("--theta", type=float)
        if name == "constants":
            sp.add_argument("--model", help="biclique, single-block or a JSON model file")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    cmd = args.command
    overrides = list(args.set)
    for key in ("input", "k", "theta", "model"):
        val = getattr(args, key, None)
        if val is not None:
            overrides.append(f"{cmd}.{key}={val}")
    if getattr(args, "demo", False):
        overrides.append(f"{cmd}.demo=true")
    try:
        cfg = Config.load(args.config, overrides)
        return HANDLERS[cmd](cfg, Path(args.out))
    except UsageError as exc:
        print(f"kyfan2k {cmd}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
