"""Operation-count and wall-time benchmark of filter construction.

For each method the receive-filter direction F is built with the
instrumented diagonal operations and the entrywise arithmetic is tallied.
The shared closed-form part (eta and the transmit filters) is counted
separately as ``design_ops``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelConfig, sample_channels
from .diag import count_ops
from .filters import METHODS, design, unitary

__all__ = ["BenchRow", "bench_complexity", "fit_slopes"]


@dataclass(frozen=True)
class BenchRow:
    method: str
    K: int
    N: int
    unitary_ops: int
    design_ops: int
    seconds: float


def bench_complexity(
    k_list: Sequence[int],
    repetitions: int = 5,
    subcarriers: int = 8,
    methods: Sequence[str] = METHODS,
    seed: int = 0,
) -> list[BenchRow]:
    if not k_list:
        raise ValueError("K list must not be empty")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rows = []
    for K in k_list:
        ch = sample_channels(ChannelConfig(nodes=K, subcarriers=subcarriers, seed=seed))
        for method in methods:
            with count_ops() as c_u:
                unitary(method, ch, 0)
            with count_ops() as c_d:
                design(method, ch, 0, 1.0)
            t0 = time.perf_counter()
            for _ in range(repetitions):
                design(method, ch, 0, 1.0)
            elapsed = (time.perf_counter() - t0) / repetitions
            rows.append(BenchRow(method, K, subcarriers, c_u.total, c_d.total, elapsed))
    return rows


def fit_slopes(rows: Sequence[BenchRow], field: str = "unitary_ops") -> dict[str, float]:
    """Least-squares slope of log(count) against log(K*N), per method.

    Methods benchmarked at a single size get ``nan``.
    """
    out = {}
    for method in dict.fromkeys(r.method for r in rows):
        pts = [(r.K * r.N, getattr(r, field)) for r in rows if r.method == method]
        if len({x for x, _ in pts}) < 2:
            out[method] = float("nan")
            continue
        x, y = np.log(np.array(pts, dtype=float)).T
        out[method] = float(np.polyfit(x, y, 1)[0])
    return out
