"""Static SVG figures. Every file carries a provenance comment with the hash
of the configuration that produced it."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# Fixed metadata keeps SVG output byte-stable across runs.
_SVG_META = {"Date": None, "Creator": None}
matplotlib.rcParams["svg.hashsalt"] = "kyfan2k"


def _save(fig, path, provenance: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    text = path.read_text()
    head, sep, rest = text.partition("?>")
    comment = f"\n<!-- provenance: {provenance} -->"
    path.write_text(head + sep + comment + rest if sep else comment + text)


def line_plot(path, x, series: dict, *, xlabel: str, ylabel: str, title: str, provenance: str,
              logx: bool = False, logy: bool = False) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in series.items():
        ax.plot(x, y, marker="o", ms=3, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path, provenance)


def heatmaps(path, mats: dict, *, title: str, provenance: str) -> None:
    fig, axes = plt.subplots(1, len(mats), figsize=(4 * len(mats), 5))
    axes = np.atleast_1d(axes)
    for ax, (label, M) in zip(axes, mats.items()):
        im = ax.imshow(M, aspect="auto", cmap="viridis", interpolation="nearest")
        ax.set_title(label)
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.suptitle(title)
    fig.tight_layout()
    _save(fig, path, provenance)
