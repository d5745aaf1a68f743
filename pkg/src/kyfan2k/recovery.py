"""Constants and hypothesis checks of the block recovery theorem.

A planted model ``A = B + R`` has ``k0`` diagonal blocks
``B_i = sigma_bar_i u_bar_i v_bar_i^T`` of size ``m_i x n_i``; the first ``k``
are the signal blocks. The heterogeneity vector

    p = (k, delta_u, delta_v, pi_u, pi_v, xi_u, xi_v, rho_sigma, rho_m, rho_n)

summarizes how far the signal blocks are from uniform square blocks, and the
scalars below turn it into an admissible range for ``theta`` and bounds on
the noise.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

LOG7 = math.log(7.0)
_SLACK = 1e-12


@dataclass
class BlockModel:
    """Planted block structure.

    ``u_bar`` and ``v_bar`` hold one unit vector per block; ``mu`` is the
    ``k0 x k0`` matrix of noise means and ``b`` the subgaussian parameter.
    """

    k: int
    m: list[int]
    n: list[int]
    sigma_bar: list[float]
    u_bar: list[np.ndarray]
    v_bar: list[np.ndarray]
    mu: np.ndarray
    b: float
    c_noisephi: float = 0.0

    def __post_init__(self):
        self.m = [int(v) for v in self.m]
        self.n = [int(v) for v in self.n]
        self.sigma_bar = [float(v) for v in self.sigma_bar]
        self.u_bar = [np.asarray(u, dtype=np.float64).ravel() for u in self.u_bar]
        self.v_bar = [np.asarray(v, dtype=np.float64).ravel() for v in self.v_bar]
        self.mu = np.asarray(self.mu, dtype=np.float64)
        k0 = len(self.m)
        if not 1 <= self.k <= k0:
            raise ValueError(f"k must lie in [1, {k0}]")
        for name, seq in (("n", self.n), ("sigma_bar", self.sigma_bar), ("u_bar", self.u_bar), ("v_bar", self.v_bar)):
            if len(seq) != k0:
                raise ValueError(f"{name} must have {k0} entries")
        if self.mu.shape != (k0, k0):
            raise ValueError(f"mu must be {k0} x {k0}")
        if np.any(self.mu < 0):
            raise ValueError("noise means must be nonnegative")
        if min(self.m) < 1 or min(self.n) < 1:
            raise ValueError("block sizes must be positive")
        s = np.array(self.sigma_bar)
        if np.any(s <= 0) or np.any(np.diff(s) > 0):
            raise ValueError("sigma_bar must be positive and nonincreasing")
        for i in range(k0):
            u, v = self.u_bar[i], self.v_bar[i]
            if u.size != self.m[i] or v.size != self.n[i]:
                raise ValueError(f"block {i + 1}: singular vector lengths do not match the block size")
            if abs(np.linalg.norm(u) - 1) > _SLACK or abs(np.linalg.norm(v) - 1) > _SLACK:
                raise ValueError(f"block {i + 1}: singular vectors must have unit norm")
            if i < self.k and (np.any(u <= 0) or np.any(v <= 0)):
                raise ValueError(f"block {i + 1}: signal singular vectors must be positive")
        if self.b < 0 or self.c_noisephi < 0:
            raise ValueError("b and c_noisephi must be nonnegative")

    @property
    def k0(self) -> int:
        return len(self.m)

    @property
    def phi(self) -> np.ndarray:
        """Scale factors ``sigma_bar_i / sqrt(m_i n_i)``."""
        return np.array(self.sigma_bar) / np.sqrt(np.array(self.m, dtype=float) * np.array(self.n))

    @property
    def constant_vectors(self) -> bool:
        """True when every signal block is a multiple of an all-ones block."""
        for i in range(self.k):
            for w in (self.u_bar[i], self.v_bar[i]):
                if np.ptp(w) > _SLACK:
                    return False
        return True

    def block(self, i: int) -> np.ndarray:
        """The dense rank-one block ``B_i`` (0-based index)."""
        return self.sigma_bar[i] * np.outer(self.u_bar[i], self.v_bar[i])


@dataclass(frozen=True)
class HeterogeneityParams:
    k: int
    delta_u: float
    delta_v: float
    pi_u: float
    pi_v: float
    xi_u: float
    xi_v: float
    rho_sigma: float
    rho_m: float
    rho_n: float

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        for xi, delta, pi, tag in ((self.xi_u, self.delta_u, self.pi_u, "u"), (self.xi_v, self.delta_v, self.pi_v, "v")):
            if not (0 < xi <= delta + _SLACK and delta <= 1 + _SLACK and pi >= 1 - _SLACK):
                raise ValueError(f"need 0 < xi_{tag} <= delta_{tag} <= 1 <= pi_{tag}")
        for name in ("rho_sigma", "rho_m", "rho_n"):
            if getattr(self, name) < 1 - _SLACK:
                raise ValueError(f"{name} must be at least 1")

    @classmethod
    def uniform(cls, k: int) -> "HeterogeneityParams":
        """All heterogeneity scalars equal to one (identical all-ones blocks)."""
        return cls(k, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)


def heterogeneity_params(model: BlockModel) -> HeterogeneityParams:
    """Tightest admissible heterogeneity vector for the signal blocks.

    Each defining inequality is taken with equality, then clipped to its
    admissible side of 1 to absorb rounding (e.g. ``delta_u`` of a constant
    vector evaluates to ``1 + 2e-16``).
    """
    k = model.k
    m = np.array(model.m[:k], dtype=float)
    n = np.array(model.n[:k], dtype=float)
    us, vs = model.u_bar[:k], model.v_bar[:k]
    delta_u = min(float(np.abs(u).sum()) / math.sqrt(mi) for u, mi in zip(us, m))
    delta_v = min(float(np.abs(v).sum()) / math.sqrt(ni) for v, ni in zip(vs, n))
    xi_u = min(float(u.min()) * math.sqrt(mi) for u, mi in zip(us, m))
    xi_v = min(float(v.min()) * math.sqrt(ni) for v, ni in zip(vs, n))
    pi_u = max(float(u.max()) * math.sqrt(mi) for u, mi in zip(us, m))
    pi_v = max(float(v.max()) * math.sqrt(ni) for v, ni in zip(vs, n))
    delta_u, delta_v = min(delta_u, 1.0), min(delta_v, 1.0)
    return HeterogeneityParams(
        k=k,
        delta_u=delta_u,
        delta_v=delta_v,
        pi_u=max(pi_u, 1.0),
        pi_v=max(pi_v, 1.0),
        xi_u=min(xi_u, delta_u),
        xi_v=min(xi_v, delta_v),
        rho_sigma=max(model.sigma_bar[0] / model.sigma_bar[k - 1], 1.0),
        rho_m=max(float(m.max() / m.min()), 1.0),
        rho_n=max(float(n.max() / n.min()), 1.0),
    )


@dataclass
class RecoveryConstants:
    c_tauellbd: float
    c_thetarange: float
    c_tauubd: float
    c_mubd: float
    c_cdelta: float
    c_qkponej: float
    c_miniNoise: float
    c_probdenom: float
    c_probdenomtwo: float
    relaxed: bool = False
    tau_ell: float | None = None
    tau_u: float | None = None
    theta_lo: float | None = None
    theta_hi: float | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _safe_div(num: float, den: float) -> float:
    return math.inf if den == 0 else num / den


def c_tauellbd(p: HeterogeneityParams, relaxed: bool = False) -> float:
    rs, rmn = p.rho_sigma, math.sqrt(p.rho_m * p.rho_n)
    if relaxed:
        # Rank-one blocks of constant vectors only need tau_ell >= 2 / phi_i.
        return 2.0 * rs * rmn
    return rs * rmn * max(
        6.0 * (p.k + 1) * rmn,
        4.0 / p.xi_u,
        4.0 / p.xi_v,
        2.0 + 2.0 / p.delta_u,
        2.0 + 2.0 / p.delta_v,
    )


def c_thetarange(p: HeterogeneityParams, relaxed: bool = False) -> float:
    c = c_tauellbd(p, relaxed)
    if relaxed:
        return 0.5 / (36.0 / 25.0 * c - 1.0)
    r = p.rho_m * p.rho_n
    return 0.5 * (1.2**4 * c**2 * (p.k * r / (p.k + r - 1.0)) + 1.0) ** -0.5


def c_tauubd(p: HeterogeneityParams, c_range: float) -> float:
    k, rs = p.k, p.rho_sigma
    r = p.rho_m * p.rho_n
    den = 1.0 + (k - 1) / rs**2
    a = (1.0 + (k - 1) * math.sqrt(r)) / den
    return 4.0 / 3.0 * (a + math.sqrt(a * a + (1.0 + (k - 1) * r) * (c_range**-2 - 1.0) / den))


def constants(
    p: HeterogeneityParams,
    c_noisephi: float,
    b: float,
    *,
    relaxed: bool = False,
    phi1: float | None = None,
    block_sizes=None,
) -> RecoveryConstants:
    """Evaluate every scalar of the recovery theorem for ``p``.

    ``c_noisephi = 0`` (no noise blocks) makes the noise-related bounds
    infinite, i.e. vacuous. ``tau_ell``/``tau_u`` need ``phi1`` and the theta
    interval needs the signal block sizes; they stay ``None`` otherwise.
    """
    if c_noisephi < 0 or b < 0:
        raise ValueError("c_noisephi and b must be nonnegative")
    rs, rmn = p.rho_sigma, math.sqrt(p.rho_m * p.rho_n)
    ctl = c_tauellbd(p, relaxed)
    ctr = c_thetarange(p, relaxed)
    ctu = c_tauubd(p, ctr)
    c_mubd = min(
        0.3 / (rs * rmn),
        _safe_div(0.9, math.sqrt(c_noisephi * rs * rmn)),
        _safe_div(0.9, math.sqrt(c_noisephi)),
    ) / ctu
    c_cdelta = max(
        0.5 + 1.0 / (0.3 * p.delta_u),
        0.5 + 1.0 / (0.3 * p.delta_v),
        1.0 / (0.3**2 * p.delta_u * p.delta_v),
    )
    c_q = 0.47 / (rs * (c_cdelta + 0.5) * (p.k + 1))
    den = 81.0 * b**2 * c_noisephi * LOG7
    c_mini = min(_safe_div(4.0 * c_q**2, den), _safe_div(8.0 * 0.23**2, den * (p.k + 1)))
    out = RecoveryConstants(
        c_tauellbd=ctl,
        c_thetarange=ctr,
        c_tauubd=ctu,
        c_mubd=c_mubd,
        c_cdelta=c_cdelta,
        c_qkponej=c_q,
        c_miniNoise=c_mini,
        c_probdenom=ctu**2 * rs**2 * p.rho_m * p.rho_n,
        c_probdenomtwo=ctu**2 * c_noisephi * rs * rmn,
        relaxed=relaxed,
    )
    if phi1 is not None:
        out.tau_ell = ctl / phi1
        out.tau_u = ctu / phi1
    if block_sizes is not None:
        out.theta_lo, out.theta_hi = _interval(ctr, block_sizes)
    return out


def _interval(c_range: float, block_sizes) -> tuple[float, float]:
    area = sum(int(mi) * int(ni) for mi, ni in block_sizes)
    if area <= 0:
        raise ValueError("block sizes must be positive")
    lo = c_range / math.sqrt(area)
    return lo, 2.0 * lo


def theta_range(p: HeterogeneityParams, block_sizes, *, relaxed: bool = False) -> tuple[float, float]:
    """Admissible ``[theta_lo, 2 theta_lo]`` for signal block sizes ``[(m_i, n_i)]``."""
    return _interval(c_thetarange(p, relaxed), block_sizes)


def model_constants(model: BlockModel, relaxed: bool | None = None) -> tuple[HeterogeneityParams, RecoveryConstants]:
    """Heterogeneity vector and constants of a model.

    ``relaxed=None`` uses the relaxed rank-one form exactly when all signal
    singular vectors are constant.
    """
    if relaxed is None:
        relaxed = model.constant_vectors
    elif relaxed and not model.constant_vectors:
        raise ValueError("the relaxed constants need constant singular vectors")
    p = heterogeneity_params(model)
    sizes = list(zip(model.m[: model.k], model.n[: model.k]))
    consts = constants(p, model.c_noisephi, model.b, relaxed=relaxed, phi1=float(model.phi[0]), block_sizes=sizes)
    return p, consts


@dataclass
class HypothesisRecord:
    name: str
    lhs: float
    rhs: float
    verdict: str  # "pass", "fail", "vacuous" or "info"
    note: str = ""


@dataclass
class HypothesisReport:
    records: list[HypothesisRecord] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.verdict != "fail" for r in self.records)

    def failing(self) -> list[HypothesisRecord]:
        return [r for r in self.records if r.verdict == "fail"]

    def as_records(self) -> list[dict]:
        return [asdict(r) for r in self.records]


def _leq(lhs: float, rhs: float) -> str:
    return "pass" if lhs <= rhs * (1.0 + _SLACK) else "fail"


def hypothesis_check(
    model: BlockModel,
    p: HeterogeneityParams,
    consts: RecoveryConstants,
    theta: float | None = None,
) -> HypothesisReport:
    """Evaluate each hypothesis inequality of the recovery theorem.

    Noise-block conditions are vacuous when ``k0 == k``. Squareness is an
    asymptotic condition, so it is reported as the ratios ``m_i / n_j^2`` and
    ``n_i / m_j^2`` with verdict ``info``.
    """
    k, k0 = model.k, model.k0
    phi = model.phi
    rep = HypothesisReport()

    if k0 > k:
        lhs, rhs = model.sigma_bar[k], 0.23 * model.sigma_bar[k - 1] / (k + 1)
        rep.records.append(HypothesisRecord("sigmanoisebd", lhs, rhs, _leq(lhs, rhs)))
        lhs, rhs = float(phi[k:].max()), model.c_noisephi * float(phi[:k].min())
        rep.records.append(HypothesisRecord("noisephi", lhs, rhs, _leq(lhs, rhs)))
        lhs = float(sum(model.m[i] + model.n[i] for i in range(k, k0)))
        rhs = consts.c_miniNoise * min(model.m[i] * model.n[i] for i in range(k))
        rep.records.append(HypothesisRecord("mnp1bd", lhs, rhs, _leq(lhs, rhs)))
    else:
        note = "no noise blocks (k0 = k)"
        rep.records.append(HypothesisRecord("sigmanoisebd", 0.0, 0.0, "vacuous", note))
        rep.records.append(HypothesisRecord("noisephi", 0.0, 0.0, "vacuous", note))
        rep.records.append(HypothesisRecord("mnp1bd", 0.0, 0.0, "vacuous", note))

    i, j = np.unravel_index(int(np.argmax(model.mu)), model.mu.shape)
    lhs = float(model.mu[i, j])
    rep.records.append(
        HypothesisRecord("mubd", lhs, consts.c_mubd, _leq(lhs, consts.c_mubd), f"largest mean at block ({i + 1}, {j + 1})")
    )

    ms, ns = model.m[:k], model.n[:k]
    rep.records.append(
        HypothesisRecord("square_m", max(ms) / min(ns) ** 2, 0.0, "info", "max m_i / n_j^2 (asymptotic condition)")
    )
    rep.records.append(
        HypothesisRecord("square_n", max(ns) / min(ms) ** 2, 0.0, "info", "max n_i / m_j^2 (asymptotic condition)")
    )

    if theta is not None and consts.theta_lo is not None:
        ok = consts.theta_lo * (1 - _SLACK) <= theta <= consts.theta_hi * (1 + _SLACK)
        rep.records.append(
            HypothesisRecord(
                "thetarange", theta, consts.theta_hi, "pass" if ok else "fail", f"need theta >= {consts.theta_lo:.6g}"
            )
        )
    return rep


def biclique_model(m: int = 50, n: int = 50, p: float = 0.05) -> BlockModel:
    """Two equal all-ones blocks with off-diagonal edge density ``p``."""
    if m % 2 or n % 2:
        raise ValueError("m and n must be even")
    h, w = m // 2, n // 2
    u = np.full(h, 1.0 / math.sqrt(h))
    v = np.full(w, 1.0 / math.sqrt(w))
    s = math.sqrt(h * w)
    mu = np.array([[0.0, p], [p, 0.0]])
    return BlockModel(k=2, m=[h, h], n=[w, w], sigma_bar=[s, s], u_bar=[u, u], v_bar=[v, v], mu=mu, b=0.5)


def single_block_model(m: int = 40, n: int = 40) -> BlockModel:
    """One all-ones signal block and no noise."""
    u = np.full(m, 1.0 / math.sqrt(m))
    v = np.full(n, 1.0 / math.sqrt(n))
    return BlockModel(k=1, m=[m], n=[n], sigma_bar=[math.sqrt(m * n)], u_bar=[u], v_bar=[v], mu=np.zeros((1, 1)), b=0.0)


EXAMPLE_MODELS = {
    "biclique": biclique_model,
    "single-block": single_block_model,
}
