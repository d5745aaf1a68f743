"""Semidefinite reformulation of the combined-norm problem and its export in
SDPA sparse format.

For ``A`` of size ``m x n`` with ``m >= n`` the problem is equivalent to

    min   p + trace(R) + theta * <E, Q>
    s.t.  k p - trace(P) = 0
          p I - P                       >= 0  (PSD, n x n)
          [[P, -X^T / 2], [-X / 2, R]]  >= 0  (PSD, (n + m) x (n + m))
          Q - X >= 0,  Q + X >= 0             (entrywise)
          <A, X> >= 1

with ``E`` the all-ones matrix. When ``m < n`` the transpose is encoded
instead; both norms are transpose invariant, so the optimal value is the same
and the solution is the transpose.

SDPA primal form: minimize ``c^T x`` subject to
``F_1 x_1 + ... + F_N x_N - F_0 >= 0``. Variables are, in order, ``p``, the
upper triangle of ``P``, the upper triangle of ``R``, ``Q`` and ``X``
(row-major). Block 3 is diagonal (an LP block) holding the linear
constraints; the equality is written as two opposite inequalities.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .splitting import ProblemSpec


@dataclass
class SdpProblem:
    """Coefficient data of the SDP in SDPA primal form.

    ``entries`` maps ``(matno, block, i, j)`` (1-based, ``i <= j``) to the
    coefficient value; ``matno = 0`` is the constant ``F_0``.
    """

    m: int
    n: int
    k: int
    theta: float
    transposed: bool
    block_struct: list[int]
    c: np.ndarray
    entries: dict[tuple[int, int, int, int], float]
    names: list[str] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return int(self.c.size)

    def var_index(self, name: str) -> int:
        """1-based SDPA index of a named variable, e.g. ``"X[2,3]"``."""
        return self.names.index(name) + 1

    def x_indices(self) -> np.ndarray:
        """1-based indices of ``X`` in the encoded (possibly transposed) shape."""
        start = self.var_index("X[1,1]")
        return start + np.arange(self.m * self.n).reshape(self.m, self.n)


def build_sdp(spec: ProblemSpec) -> SdpProblem:
    """Encode the problem for ``spec`` as an :class:`SdpProblem`."""
    A = spec.A
    transposed = A.shape[0] < A.shape[1]
    if transposed:
        A = A.T
    m, n = A.shape
    k, theta = spec.k, spec.theta

    names = ["p"]
    names += [f"P[{i},{j}]" for i in range(1, n + 1) for j in range(i, n + 1)]
    names += [f"R[{i},{j}]" for i in range(1, m + 1) for j in range(i, m + 1)]
    names += [f"Q[{i},{j}]" for i in range(1, m + 1) for j in range(1, n + 1)]
    names += [f"X[{i},{j}]" for i in range(1, m + 1) for j in range(1, n + 1)]
    idx = {name: t + 1 for t, name in enumerate(names)}

    c = np.zeros(len(names))
    c[idx["p"] - 1] = 1.0
    for i in range(1, m + 1):
        c[idx[f"R[{i},{i}]"] - 1] = 1.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            c[idx[f"Q[{i},{j}]"] - 1] = theta

    mn = m * n
    lp = 2 * mn + 3
    E: dict[tuple[int, int, int, int], float] = {}

    # Block 1: p I - P
    for i in range(1, n + 1):
        E[(idx["p"], 1, i, i)] = 1.0
        for j in range(i, n + 1):
            E[(idx[f"P[{i},{j}]"], 1, i, j)] = -1.0
    # Block 2: [[P, -X^T/2], [-X/2, R]]
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            E[(idx[f"P[{i},{j}]"], 2, i, j)] = 1.0
    for i in range(1, m + 1):
        for j in range(i, m + 1):
            E[(idx[f"R[{i},{j}]"], 2, n + i, n + j)] = 1.0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            E[(idx[f"X[{i},{j}]"], 2, j, n + i)] = -0.5
    # Block 3 (diagonal): Q - X, Q + X, <A, X> - 1, +-(k p - trace P)
    row = 0
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            row += 1
            E[(idx[f"Q[{i},{j}]"], 3, row, row)] = 1.0
            E[(idx[f"X[{i},{j}]"], 3, row, row)] = -1.0
            E[(idx[f"Q[{i},{j}]"], 3, row + mn, row + mn)] = 1.0
            E[(idx[f"X[{i},{j}]"], 3, row + mn, row + mn)] = 1.0
    r_a = 2 * mn + 1
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if A[i - 1, j - 1] != 0:
                E[(idx[f"X[{i},{j}]"], 3, r_a, r_a)] = float(A[i - 1, j - 1])
    E[(0, 3, r_a, r_a)] = 1.0
    r_eq = r_a + 1
    E[(idx["p"], 3, r_eq, r_eq)] = float(k)
    E[(idx["p"], 3, r_eq + 1, r_eq + 1)] = -float(k)
    for i in range(1, n + 1):
        E[(idx[f"P[{i},{i}]"], 3, r_eq, r_eq)] = -1.0
        E[(idx[f"P[{i},{i}]"], 3, r_eq + 1, r_eq + 1)] = 1.0

    return SdpProblem(
        m=m,
        n=n,
        k=k,
        theta=theta,
        transposed=transposed,
        block_struct=[n, n + m, -lp],
        c=c,
        entries=E,
        names=names,
    )


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def sdpa_text(sdp: SdpProblem) -> str:
    """The SDPA sparse (``.dat-s``) representation as a string."""
    lines = [
        f'"kyfan2k combined-norm SDP: m={sdp.m} n={sdp.n} k={sdp.k} '
        f'theta={_fmt(sdp.theta)} transposed={int(sdp.transposed)}"',
        f"{sdp.num_vars} = mDIM",
        f"{len(sdp.block_struct)} = nBLOCK",
        " ".join(str(b) for b in sdp.block_struct) + " = bLOCKsTRUCT",
        " ".join(_fmt(v) for v in sdp.c),
    ]
    for key in sorted(sdp.entries):
        mat, blk, i, j = key
        lines.append(f"{mat} {blk} {i} {j} {_fmt(sdp.entries[key])}")
    return "\n".join(lines) + "\n"


def export_sdpa(sdp: SdpProblem, path) -> str:
    """Write the ``.dat-s`` file and return its sha256 hex digest."""
    text = sdpa_text(sdp)
    Path(path).write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def sdpa_hash(sdp: SdpProblem) -> str:
    return hashlib.sha256(sdpa_text(sdp).encode()).hexdigest()


@dataclass
class SdpaData:
    """Coefficient data parsed back from an SDPA sparse file."""

    num_vars: int
    block_struct: list[int]
    c: np.ndarray
    entries: dict[tuple[int, int, int, int], float]


def read_sdpa(path) -> SdpaData:
    """Parse an SDPA sparse file (comments, ``=`` labels and ``,(){}`` tolerated)."""
    body = []
    for raw in Path(path).read_text().splitlines():
        s = raw.strip()
        if not s or s[0] in '"*':
            continue
        s = s.split("=")[0]
        for ch in ",(){}":
            s = s.replace(ch, " ")
        if s.strip():
            body.append(s.split())
    if len(body) < 4:
        raise ValueError(f"{path}: truncated SDPA file")
    num_vars = int(body[0][0])
    nblock = int(body[1][0])
    block_struct = [int(t) for t in body[2][:nblock]]
    # The cost vector may span several lines.
    c_vals: list[float] = []
    pos = 3
    while len(c_vals) < num_vars:
        c_vals.extend(float(t) for t in body[pos])
        pos += 1
    entries: dict[tuple[int, int, int, int], float] = {}
    for toks in body[pos:]:
        mat, blk, i, j = (int(t) for t in toks[:4])
        entries[(mat, blk, min(i, j), max(i, j))] = float(toks[4])
    return SdpaData(num_vars, block_struct, np.array(c_vals[:num_vars]), entries)


def mapping_text(sdp: SdpProblem) -> str:
    """Human-readable map from SDPA variables and blocks to the SDP symbols."""
    lines = [
        f"shape encoded: {sdp.m} x {sdp.n} (m >= n)",
        f"transposed: {sdp.transposed}" + (" (input had m < n; X in the file is the transpose)" if sdp.transposed else ""),
        f"k = {sdp.k}, theta = {_fmt(sdp.theta)}",
        "",
        "blocks:",
        f"  1: p I - P  (PSD, size {sdp.n})",
        f"  2: [[P, -X^T/2], [-X/2, R]]  (PSD, size {sdp.n + sdp.m}); X[i,j] sits at (j, n+i)",
        f"  3: diagonal, size {-sdp.block_struct[2]}:",
        f"     rows 1..{sdp.m * sdp.n}: Q - X >= 0 (row-major)",
        f"     rows {sdp.m * sdp.n + 1}..{2 * sdp.m * sdp.n}: Q + X >= 0 (row-major)",
        f"     row {2 * sdp.m * sdp.n + 1}: <A, X> - 1 >= 0",
        f"     rows {2 * sdp.m * sdp.n + 2}, {2 * sdp.m * sdp.n + 3}: k p - trace(P) >= 0 and <= 0",
        "",
        "objective: p + trace(R) + theta * sum(Q)",
        "",
        "variables (1-based SDPA index):",
    ]
    lines.extend(f"  {t + 1}: {name}" for t, name in enumerate(sdp.names))
    return "\n".join(lines) + "\n"


def solution_matrix(sdp: SdpProblem, x) -> np.ndarray:
    """Recover ``X`` in the original orientation from an SDPA variable vector."""
    x = np.asarray(x, dtype=np.float64)
    X = x[sdp.x_indices() - 1]
    return X.T if sdp.transposed else X
