"""Seeded generators for planted block instances.

All randomness comes from ``numpy.random.Generator(numpy.random.Philox(seed))``,
a counter-based generator whose stream is fixed across platforms. The
generator name is written into every instance bundle.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .linalg import as_matrix, read_matrix, write_matrix
from .recovery import BlockModel, biclique_model

RNG_NAME = "numpy.random.Philox"
GENERATOR_VERSION = "kyfan2k-datagen/1"


def make_rng(seed: int) -> np.random.Generator:
    if not 0 <= int(seed) < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass
class PlantedInstance:
    """A generated matrix with its planted structure.

    ``clean`` and ``noise`` live in block-diagonal coordinates and ``A`` is
    ``(clean + noise)[row_perm][:, col_perm]``. ``layout`` lists the planted
    ``(rows, cols)`` index sets in the coordinates of ``A``.
    """

    A: np.ndarray
    clean: np.ndarray
    noise: np.ndarray
    layout: list[tuple[np.ndarray, np.ndarray]]
    row_perm: np.ndarray
    col_perm: np.ndarray
    model: BlockModel | None = None
    meta: dict = field(default_factory=dict)

    def unpermute(self, M=None) -> np.ndarray:
        """Undo the row/column shuffle of ``M`` (default ``A``)."""
        M = self.A if M is None else np.asarray(M)
        return M[np.argsort(self.row_perm)][:, np.argsort(self.col_perm)]

    def reference(self) -> np.ndarray:
        """0/1 indicator of the planted blocks in the coordinates of ``A``."""
        ref = np.zeros_like(self.A)
        for rows, cols in self.layout:
            ref[np.ix_(rows, cols)] = 1.0
        return ref


def _finish(M_clean, M_noise, blocks, rng, shuffle: bool, model, meta) -> PlantedInstance:
    m, n = M_clean.shape
    if shuffle:
        rp, cp = rng.permutation(m), rng.permutation(n)
    else:
        rp, cp = np.arange(m), np.arange(n)
    A = (M_clean + M_noise)[rp][:, cp]
    rinv, cinv = np.argsort(rp), np.argsort(cp)
    layout = [(np.sort(rinv[r]), np.sort(cinv[c])) for r, c in blocks]
    return PlantedInstance(A, M_clean, M_noise, layout, rp, cp, model, meta)


@dataclass(frozen=True)
class BicliqueConfig:
    m: int = 50
    n: int = 50
    p: float = 0.05
    seed: int = 0
    shuffle: bool = False

    def __post_init__(self):
        if self.m < 2 or self.n < 2 or self.m % 2 or self.n % 2:
            raise ValueError("m and n must be even and positive")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")


def gen_biclique(cfg: BicliqueConfig) -> PlantedInstance:
    """Adjacency matrix of two disjoint bicliques plus random edges.

    The diagonal blocks are all ones; every off-diagonal entry is an
    independent Bernoulli(p) edge.
    """
    rng = make_rng(cfg.seed)
    h, w = cfg.m // 2, cfg.n // 2
    clean = np.zeros((cfg.m, cfg.n))
    clean[:h, :w] = 1.0
    clean[h:, w:] = 1.0
    edges = (rng.random((cfg.m, cfg.n)) < cfg.p).astype(np.float64)
    noise = np.where(clean > 0, 0.0, edges)
    blocks = [(np.arange(h), np.arange(w)), (np.arange(h, cfg.m), np.arange(w, cfg.n))]
    meta = {"kind": "biclique", "config": asdict(cfg)}
    return _finish(clean, noise, blocks, rng, cfg.shuffle, biclique_model(cfg.m, cfg.n, cfg.p), meta)


@dataclass(frozen=True)
class GeneExprConfig:
    """Synthetic expression matrix with implanted additive modules.

    Module ``i`` (1-based) has base level ``55 + 4 i``; an entry is the base
    plus a row offset and a column offset drawn from ``{0, ..., 3}``, capped
    at 100. Background entries are uniform integers in ``[0, 45]``.
    """

    genes: int = 100
    conditions: int = 50
    modules: int = 10
    genes_per_module: int = 10
    conds_per_module: int = 5
    sigma: float = 0.0
    seed: int = 0
    shuffle: bool = False

    def __post_init__(self):
        if min(self.genes, self.conditions, self.modules, self.genes_per_module, self.conds_per_module) < 1:
            raise ValueError("sizes must be positive")
        if self.modules * self.genes_per_module > self.genes:
            raise ValueError("modules do not fit in the gene dimension")
        if self.modules * self.conds_per_module > self.conditions:
            raise ValueError("modules do not fit in the condition dimension")
        if not 0.0 <= self.sigma <= 0.5:
            raise ValueError("sigma must lie in [0, 0.5]")


def module_level(i: int) -> float:
    """Base expression level of module ``i`` (1-based)."""
    return 55.0 + 4.0 * i


def gen_gene_expression(cfg: GeneExprConfig) -> PlantedInstance:
    """Gene expression matrix with graded modules and clamped Gaussian noise.

    Noise is ``N(0, (50 sigma)^2)`` added to every entry, followed by
    ``max(., 0)``. ``noise`` stores the realized change after clamping.
    """
    rng = make_rng(cfg.seed)
    g, c = cfg.genes_per_module, cfg.conds_per_module
    clean = rng.integers(0, 46, size=(cfg.genes, cfg.conditions)).astype(np.float64)
    blocks = []
    for i in range(cfg.modules):
        rows = np.arange(i * g, (i + 1) * g)
        cols = np.arange(i * c, (i + 1) * c)
        ro = rng.integers(0, 4, size=g)
        co = rng.integers(0, 4, size=c)
        vals = module_level(i + 1) + ro[:, None] + co[None, :]
        clean[np.ix_(rows, cols)] = np.minimum(vals, 100.0)
        blocks.append((rows, cols))
    if cfg.sigma > 0:
        noisy = np.maximum(clean + rng.normal(0.0, 50.0 * cfg.sigma, size=clean.shape), 0.0)
    else:
        noisy = clean.copy()
    meta = {"kind": "gene_expression", "config": asdict(cfg)}
    return _finish(clean, noisy - clean, blocks, rng, cfg.shuffle, None, meta)


NOISE_FAMILIES = ("normal", "rademacher", "uniform")


def _unit_subgaussian(rng: np.random.Generator, family: str, shape) -> np.ndarray:
    # Each family is zero-mean and 1-subgaussian.
    if family == "normal":
        return rng.standard_normal(shape)
    if family == "rademacher":
        return rng.choice(np.array([-1.0, 1.0]), size=shape)
    if family == "uniform":
        return rng.uniform(-1.0, 1.0, size=shape)
    raise ValueError(f"unknown noise family {family!r}; choose from {NOISE_FAMILIES}")


def gen_planted(model: BlockModel, seed: int, *, noise: str = "normal", shuffle: bool = False) -> PlantedInstance:
    """Draw ``A = B + R`` for a planted block model.

    ``B`` is block diagonal with blocks ``sigma_bar_i u_bar_i v_bar_i^T``;
    block ``(i, j)`` of ``R`` is ``sqrt(phi_i phi_j) (mu_ij + b * xi)`` with
    ``xi`` i.i.d. from the chosen 1-subgaussian family.
    """
    rng = make_rng(seed)
    mo = np.concatenate([[0], np.cumsum(model.m)])
    no = np.concatenate([[0], np.cumsum(model.n)])
    clean = np.zeros((mo[-1], no[-1]))
    noise_m = np.zeros_like(clean)
    phi = model.phi
    blocks = []
    for i in range(model.k0):
        rs = slice(mo[i], mo[i + 1])
        clean[rs, no[i] : no[i + 1]] = model.block(i)
        blocks.append((np.arange(mo[i], mo[i + 1]), np.arange(no[i], no[i + 1])))
        for j in range(model.k0):
            shape = (model.m[i], model.n[j])
            draw = _unit_subgaussian(rng, noise, shape)
            noise_m[rs, no[j] : no[j + 1]] = math.sqrt(phi[i] * phi[j]) * (model.mu[i, j] + model.b * draw)
    meta = {"kind": "planted", "config": {"seed": int(seed), "noise": noise, "shuffle": shuffle}}
    inst = _finish(clean, noise_m, blocks, rng, shuffle, model, meta)
    inst.layout = inst.layout[: model.k]
    return inst


def _model_to_dict(model: BlockModel) -> dict:
    return {
        "k": model.k,
        "m": model.m,
        "n": model.n,
        "sigma_bar": model.sigma_bar,
        "u_bar": [u.tolist() for u in model.u_bar],
        "v_bar": [v.tolist() for v in model.v_bar],
        "mu": model.mu.tolist(),
        "b": model.b,
        "c_noisephi": model.c_noisephi,
    }


def model_from_dict(d: dict) -> BlockModel:
    return BlockModel(
        k=int(d["k"]),
        m=d["m"],
        n=d["n"],
        sigma_bar=d["sigma_bar"],
        u_bar=[np.array(u) for u in d["u_bar"]],
        v_bar=[np.array(v) for v in d["v_bar"]],
        mu=np.array(d["mu"]),
        b=float(d["b"]),
        c_noisephi=float(d.get("c_noisephi", 0.0)),
    )


def write_instance(directory, inst: PlantedInstance) -> None:
    """Write ``matrix.txt``, ``clean.txt`` and ``meta.json`` into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix(d / "matrix.txt", inst.A)
    write_matrix(d / "clean.txt", inst.clean)
    meta = {
        "generator": GENERATOR_VERSION,
        "rng": RNG_NAME,
        **inst.meta,
        "layout": [[r.tolist(), c.tolist()] for r, c in inst.layout],
        "row_perm": inst.row_perm.tolist(),
        "col_perm": inst.col_perm.tolist(),
        "model": None if inst.model is None else _model_to_dict(inst.model),
    }
    (d / "meta.json").write_text(json.dumps(meta, indent=1) + "\n")


def read_instance(directory) -> PlantedInstance:
    """Read a bundle written by :func:`write_instance`."""
    d = Path(directory)
    A = read_matrix(d / "matrix.txt")
    clean = read_matrix(d / "clean.txt")
    meta = json.loads((d / "meta.json").read_text())
    rp = np.array(meta.pop("row_perm"), dtype=int)
    cp = np.array(meta.pop("col_perm"), dtype=int)
    layout = [(np.array(r, dtype=int), np.array(c, dtype=int)) for r, c in meta.pop("layout")]
    model = meta.pop("model")
    unperm = A[np.argsort(rp)][:, np.argsort(cp)]
    return PlantedInstance(
        A=as_matrix(A),
        clean=clean,
        noise=unperm - clean,
        layout=layout,
        row_perm=rp,
        col_perm=cp,
        model=None if model is None else model_from_dict(model),
        meta=meta,
    )
