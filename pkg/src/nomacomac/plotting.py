"""Static SVG charts for sweep and benchmark results."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .filters import METHOD_LABELS  # noqa: E402

LINESTYLES = {"a1": "--", "a2": "-", "a3": ":"}
MARKERS = {"a1": "o", "a2": "s", "a3": "^"}


def _finish(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps the SVG bytes reproducible
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return path


def emit_chart(rows: Sequence, path, logy: bool = True) -> Path:
    """MSE vs Eb/N0, one curve per (method, K, N)."""
    if not rows:
        raise ValueError("no result rows to plot")
    curves = defaultdict(list)
    for r in rows:
        curves[(r.method, r.K, r.N)].append((r.ebno_db, r.mse_mean, r.mse_stderr))

    configs = sorted({(k, n) for _, k, n in curves})
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for (method, K, N), pts in sorted(curves.items()):
        pts.sort()
        x, y, se = (np.array(v) for v in zip(*pts))
        color = colors[configs.index((K, N)) % len(colors)]
        ax.errorbar(x, y, yerr=3 * se, color=color, ls=LINESTYLES.get(method, "-"),
                    marker=MARKERS.get(method), ms=4, capsize=2,
                    label=f"{method}, K={K}, N={N}")
    ax.set_xlabel(r"$E_b/N_0$ (dB)")
    ax.set_ylabel("MSE")
    if logy:
        ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="x-small", ncol=2)
    fig.tight_layout()
    return _finish(fig, path)


def emit_bar_chart(rows: Sequence, path, ebno_points=(1.0, 5.0)) -> Path | None:
    """Grouped bars per (K, N): every method at every requested Eb/N0.

    Returns ``None`` when none of ``ebno_points`` is in the results.
    """
    present = sorted({r.ebno_db for r in rows} & set(ebno_points))
    if not present:
        return None
    table = {(r.method, r.K, r.N, r.ebno_db): r.mse_mean for r in rows}
    methods = [m for m in METHOD_LABELS if any(r.method == m for r in rows)]
    groups = sorted({(r.K, r.N) for r in rows})
    series = [(m, e) for e in present for m in methods]

    width = 0.8 / len(series)
    fig, ax = plt.subplots(figsize=(max(6.4, 1.2 * len(groups)), 4.8))
    xs = np.arange(len(groups))
    hatches = ["", "//"]
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for j, (m, e) in enumerate(series):
        heights = [table.get((m, K, N, e), np.nan) for K, N in groups]
        ax.bar(xs + (j - (len(series) - 1) / 2) * width, heights, width,
               color=colors[methods.index(m) % len(colors)],
               hatch=hatches[present.index(e) % len(hatches)], edgecolor="k", lw=0.5,
               label=f"{m} @ {e:g} dB")
    ax.set_xticks(xs)
    ax.set_xticklabels([f"K={K}\nN={N}" for K, N in groups], fontsize="small")
    ax.set_ylabel("MSE")
    ax.set_yscale("log")
    ax.legend(fontsize="x-small", ncol=len(present))
    fig.tight_layout()
    return _finish(fig, path)


def emit_bench_chart(rows: Sequence, path) -> Path:
    """Log-log operation counts vs K per method."""
    if not rows:
        raise ValueError("no benchmark rows to plot")
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    for method in sorted({r.method for r in rows}):
        pts = sorted((r.K, r.unitary_ops) for r in rows if r.method == method)
        ks, ops = zip(*pts)
        ax.loglog(ks, ops, marker=MARKERS.get(method), ls=LINESTYLES.get(method, "-"),
                  label=f"{method} ({METHOD_LABELS.get(method, method)})")
    ax.set_xlabel("K (nodes)")
    ax.set_ylabel("entrywise operations")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    return _finish(fig, path)
