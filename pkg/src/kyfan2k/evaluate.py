"""Match scores, block diagnostics, scaling and thresholding of solutions,
and the theta sweep used to pick the sparsity weight."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .linalg import as_matrix
from .norms import NormParams, kyfan_2k_norm
from .solver import ProblemSpec, SolverOptions, solve, solve_kyfan_k_baseline

log = logging.getLogger(__name__)

DEFAULT_MIN_RATIO = 1e3
THETA_MIN_CUTOFF = 1e-4


@dataclass
class Biclustering:
    """A list of ``(rows, cols)`` index-set pairs."""

    clusters: list[tuple[frozenset, frozenset]] = field(default_factory=list)

    @classmethod
    def from_layout(cls, layout) -> "Biclustering":
        return cls([(frozenset(int(i) for i in r), frozenset(int(j) for j in c)) for r, c in layout])

    @property
    def degenerate(self) -> bool:
        return len(self.clusters) == 0 or any(not r or not c for r, c in self.clusters)

    def __len__(self) -> int:
        return len(self.clusters)

    def gene_sets(self) -> list[frozenset]:
        return [r for r, _ in self.clusters]


def _jaccard(a: frozenset, b: frozenset) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def match_score(B: Biclustering, Bp: Biclustering) -> float:
    """Average over clusters of ``B`` of the best gene-set Jaccard index in ``Bp``.

    Not symmetric: ``match_score(found, planted)`` is the bicluster relevance
    and ``match_score(planted, found)`` the module recovery.
    """
    if len(B) == 0 or len(Bp) == 0:
        raise ValueError("match_score needs two nonempty biclusterings")
    G, Gp = B.gene_sets(), Bp.gene_sets()
    return float(np.mean([max(_jaccard(g, h) for h in Gp) for g in G]))


def scale_to_fit(X, E) -> tuple[float, np.ndarray]:
    """Least-squares ``alpha`` minimizing ``||alpha X - E||_F`` and ``alpha X``."""
    X = as_matrix(X, "X")
    E = as_matrix(E, "E")
    if X.shape != E.shape:
        raise ValueError(f"shape mismatch: {X.shape} vs {E.shape}")
    xx = float(np.vdot(X, X))
    if xx == 0:
        raise ValueError("cannot scale the zero matrix")
    alpha = float(np.vdot(X, E)) / xx
    return alpha, alpha * X


def normalize_max(X) -> np.ndarray:
    """Scale ``X`` so that its largest entry equals 1."""
    X = as_matrix(X, "X")
    top = float(X.max())
    if top <= 0:
        top = float(np.abs(X).max())
    if top == 0:
        raise ValueError("cannot normalize the zero matrix")
    return X / top


@dataclass
class Threshold:
    value: float
    gap_found: bool
    ratio: float


def threshold_detect(X, min_ratio: float = DEFAULT_MIN_RATIO) -> Threshold:
    """Cut value separating large from negligible entries.

    The magnitudes are sorted in decreasing order and the largest ratio
    between consecutive nonzero values is located. If it reaches
    ``min_ratio`` the cut is the geometric mean of that pair. Otherwise, if
    some entries are exactly zero, the step from the smallest nonzero value to
    zero counts as an infinite ratio and the cut is 0. With neither, the cut is
    0 and ``gap_found`` is False.
    """
    if min_ratio <= 1:
        raise ValueError("min_ratio must exceed 1")
    v = np.sort(np.abs(np.asarray(X, dtype=np.float64)).ravel())[::-1]
    nz = v[v > 0]
    if nz.size >= 2:
        ratios = nz[:-1] / nz[1:]
        i = int(np.argmax(ratios))
        if ratios[i] >= min_ratio:
            return Threshold(float(math.sqrt(nz[i] * nz[i + 1])), True, float(ratios[i]))
    if 0 < nz.size < v.size:
        return Threshold(0.0, True, math.inf)
    return Threshold(0.0, False, float(ratios.max()) if nz.size >= 2 else 1.0)


def apply_threshold(X, cut: float) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return np.where(np.abs(X) > cut, X, 0.0)


def layout_mask(shape, layout) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    for rows, cols in layout:
        mask[np.ix_(np.asarray(rows, dtype=int), np.asarray(cols, dtype=int))] = True
    return mask


def block_deltas(Xs, layout, reference) -> tuple[float, float]:
    """``(delta1, delta0)``: largest deviation from ``reference`` on and off the blocks."""
    Xs = as_matrix(Xs, "X")
    reference = as_matrix(reference, "reference")
    if Xs.shape != reference.shape:
        raise ValueError("X and reference must have the same shape")
    mask = layout_mask(Xs.shape, layout)
    diff = np.abs(Xs - reference)
    d1 = float(diff[mask].max()) if mask.any() else 0.0
    d0 = float(diff[~mask].max()) if (~mask).any() else 0.0
    return d1, d0


def block_means(Xs, layout) -> np.ndarray:
    """Mean entry of ``Xs`` on each planted block."""
    Xs = as_matrix(Xs, "X")
    return np.array([float(Xs[np.ix_(np.asarray(r, int), np.asarray(c, int))].mean()) for r, c in layout])


def level_spread(Xs, layout) -> float:
    """Spread (max - min) of the per-block mean levels."""
    means = block_means(Xs, layout)
    return float(means.max() - means.min())


def extract_biclusters(Xt) -> Biclustering:
    """Connected components of the bipartite support graph of ``Xt``.

    Rows ``0..m-1`` and columns ``0..n-1`` are the two vertex sides; every
    nonzero entry is an edge. Components are ordered by their first row.
    Stray entries are kept, so they merge blocks rather than being cleaned
    up.
    """
    Xt = as_matrix(Xt, "X")
    m, n = Xt.shape
    r, c = np.nonzero(Xt)
    if r.size == 0:
        return Biclustering([])
    g = coo_matrix((np.ones(r.size), (r, m + c)), shape=(m + n, m + n))
    _, labels = connected_components(g, directed=False)
    touched_r = np.zeros(m, dtype=bool)
    touched_c = np.zeros(n, dtype=bool)
    touched_r[r] = True
    touched_c[c] = True
    groups: dict[int, tuple[list[int], list[int]]] = {}
    for i in np.flatnonzero(touched_r):
        groups.setdefault(int(labels[i]), ([], []))[0].append(int(i))
    for j in np.flatnonzero(touched_c):
        groups.setdefault(int(labels[m + j]), ([], []))[1].append(int(j))
    comps = sorted(groups.values(), key=lambda rc: rc[0][0])
    return Biclustering([(frozenset(rs), frozenset(cs)) for rs, cs in comps])


def scores(found: Biclustering, planted: Biclustering) -> tuple[float, float]:
    """``(relevance, recovery)``; an empty result scores 0."""
    if len(found) == 0:
        return 0.0, 0.0
    return match_score(found, planted), match_score(planted, found)


@dataclass
class EvalReport:
    relevance: float
    recovery: float
    delta1: float
    delta0: float
    alpha: float
    threshold: float
    gap_found: bool = True
    clusters: Biclustering | None = field(default=None, repr=False)


def evaluate_genes(X, E, layout, min_ratio: float = DEFAULT_MIN_RATIO) -> EvalReport:
    """Expression protocol: least-squares scaling, thresholding, components, scores."""
    alpha, Xs = scale_to_fit(X, E)
    cut = threshold_detect(Xs, min_ratio)
    found = extract_biclusters(apply_threshold(Xs, cut.value))
    rel, rec = scores(found, Biclustering.from_layout(layout))
    return EvalReport(rel, rec, math.nan, math.nan, alpha, cut.value, cut.gap_found, found)


def evaluate_biclique(X, layout, reference=None, min_ratio: float = DEFAULT_MIN_RATIO) -> EvalReport:
    """Biclique protocol: max-entry normalization, deltas against the 0/1 pattern."""
    Xn = normalize_max(X)
    if reference is None:
        reference = layout_mask(Xn.shape, layout).astype(np.float64)
    d1, d0 = block_deltas(Xn, layout, reference)
    cut = threshold_detect(Xn, min_ratio)
    found = extract_biclusters(apply_threshold(Xn, cut.value))
    rel, rec = scores(found, Biclustering.from_layout(layout))
    return EvalReport(rel, rec, d1, d0, 1.0 / float(X.max()), cut.value, cut.gap_found, found)


def topk_residual(X, k: int) -> float:
    """``||X - X_k||_F`` for the best rank-k approximation ``X_k``."""
    S = np.linalg.svd(as_matrix(X), compute_uv=False)
    return float(np.sqrt(np.sum(S[k:] ** 2)))


SWEEP_COLUMNS = (
    "theta",
    "objective",
    "iterations",
    "delta0",
    "delta1",
    "relevance",
    "recovery",
    "magnitude",
    "residual",
)


@dataclass
class SweepRow:
    theta: float
    objective: float = math.nan
    iterations: int = 0
    delta0: float = math.nan
    delta1: float = math.nan
    relevance: float = math.nan
    recovery: float = math.nan
    magnitude: float = math.nan
    residual: float = math.nan
    fit_residual: float = math.nan
    converged: bool = False
    error: str = ""


@dataclass
class SweepResult:
    rows: list[SweepRow]
    plateau: tuple[float, float] | None
    protocol: str

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=np.float64)

    @property
    def thetas(self) -> np.ndarray:
        return self.column("theta")

    def table(self, extra: Sequence[str] = ("fit_residual", "converged")) -> list[list]:
        cols = list(SWEEP_COLUMNS) + list(extra)
        return [cols] + [[getattr(r, c) for c in cols] for r in self.rows]


def _sweep_cell(args) -> SweepRow:
    A, k, theta, opts, layout, protocol, model, min_ratio = args
    row = SweepRow(theta=float(theta))
    try:
        spec = ProblemSpec(A, NormParams(k, float(theta)))
        runner = solve_kyfan_k_baseline if model == "kyfan_k" else solve
        out = runner(spec, opts)
        row.objective = out.objective
        row.iterations = out.iterations
        row.converged = out.converged
        alpha, Xs = scale_to_fit(out.X, A)
        row.magnitude = kyfan_2k_norm(Xs, k)
        row.residual = topk_residual(Xs, k)
        row.fit_residual = float(np.linalg.norm(Xs - A))
        if layout is not None:
            if protocol == "biclique":
                rep = evaluate_biclique(out.X, layout, min_ratio=min_ratio)
                row.delta0, row.delta1 = rep.delta0, rep.delta1
            else:
                rep = evaluate_genes(out.X, A, layout, min_ratio=min_ratio)
            row.relevance, row.recovery = rep.relevance, rep.recovery
    except Exception as exc:  # recorded per row; the sweep continues
        row.error = f"{type(exc).__name__}: {exc}"
        log.warning("theta=%g failed: %s", theta, row.error)
    return row


def detect_plateau(thetas, curves, window: float = 0.1) -> tuple[float, float] | None:
    """Widest run of consecutive thetas on which every curve stays flat.

    A run is flat when ``(max - min) <= window * max(|values|)`` for each
    curve. Runs need at least two points; the widest in log-theta wins, the
    earliest on ties.
    """
    t = np.asarray(thetas, dtype=np.float64)
    if t.size < 2:
        return None
    cs = [np.asarray(c, dtype=np.float64) for c in curves]
    best = None
    best_w = -1.0
    for a in range(t.size):
        for b in range(a + 1, t.size):
            seg_ok = True
            for c in cs:
                seg = c[a : b + 1]
                if not np.all(np.isfinite(seg)):
                    seg_ok = False
                    break
                if seg.max() - seg.min() > window * np.abs(seg).max():
                    seg_ok = False
                    break
            if not seg_ok:
                break
            w = math.log(t[b] / t[a])
            if w > best_w + 1e-12:
                best_w, best = w, (float(t[a]), float(t[b]))
    return best


def theta_sweep(
    A,
    k: int,
    thetas,
    *,
    layout=None,
    protocol: str = "genes",
    opts: SolverOptions | None = None,
    model: str = "kyfan2k",
    workers: int = 1,
    window: float = 0.1,
    min_ratio: float = DEFAULT_MIN_RATIO,
) -> SweepResult:
    """Solve for each theta and tabulate objective, diagnostics and scores.

    ``magnitude`` is the Ky Fan 2-k-norm and ``residual`` the distance to the
    best rank-k approximation, both of the least-squares scaled solution;
    ``fit_residual`` is ``||alpha X - A||_F``. The plateau is the widest theta
    range on which ``magnitude`` and ``fit_residual`` both vary by at most
    ``window`` (relative). Rows come back in input order whatever
    ``workers`` is.
    """
    if protocol not in ("genes", "biclique"):
        raise ValueError("protocol must be 'genes' or 'biclique'")
    A = as_matrix(A)
    thetas = [float(t) for t in thetas]
    if any(t <= 0 for t in thetas) or any(b <= a for a, b in zip(thetas, thetas[1:])):
        raise ValueError("thetas must be positive and ascending")
    opts = opts or SolverOptions()
    cells = [(A, k, t, opts, layout, protocol, model, min_ratio) for t in thetas]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    res = SweepResult(rows, None, protocol)
    ok = [r for r in rows if not r.error]
    if len(ok) >= 2:
        res.plateau = detect_plateau(
            [r.theta for r in ok],
            [[r.magnitude for r in ok], [r.fit_residual for r in ok]],
            window,
        )
    return res


def theta_min(rows: Sequence[SweepRow], cutoff: float = THETA_MIN_CUTOFF) -> float | None:
    """Smallest swept theta whose block deviations are both at most ``cutoff``."""
    for r in sorted(rows, key=lambda r: r.theta):
        if not r.error and max(r.delta0, r.delta1) <= cutoff:
            return r.theta
    return None


def rows_as_dicts(rows: Sequence[SweepRow]) -> list[dict]:
    return [asdict(r) for r in rows]
