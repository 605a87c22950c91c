"""Transmission rounds, MSE evaluation and nomographic function computation."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channel import (
    ChannelConfig,
    ChannelSet,
    NoiseModel,
    draw_cn,
    ebno_to_noise_var,
    sample_noise,
    trial_rng,
)
from .diag import CDiag, DimensionMismatch, dadd, dmul, fro_norm_sq
from .filters import FilterSolution, design, design_arrays, _check_method
from .scheduling import SubfunctionPlan, participation_mask

__all__ = [
    "REDRAW_THRESHOLD",
    "TransmissionRecord",
    "MseEstimate",
    "NomographicSpec",
    "DomainError",
    "transmit_round",
    "analytic_mse",
    "simulate",
    "monte_carlo_mse",
    "arithmetic_mean",
    "geometric_mean",
    "compute_function",
    "compute_function_planned",
    "reconstruct_desired",
]

# channel entries with |h| at or below this are redrawn rather than inverted
REDRAW_THRESHOLD = 1e-6
CHUNK_TRIALS = 2048


class DomainError(ValueError):
    """A sensor reading lies outside the domain of a preprocessing function."""


@dataclass(frozen=True, eq=False)
class TransmissionRecord:
    x_hat: CDiag
    x_target: CDiag
    noise_draw: CDiag

    @property
    def squared_error(self) -> float:
        return float(np.sum(np.abs(self.x_hat.entries - self.x_target.entries) ** 2))


@dataclass(frozen=True)
class MseEstimate:
    mean: float
    trials: int
    std_error: float
    analytic: float
    ebno_db: float = math.nan
    redraws: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.std_error >= 0:
            raise ValueError("std_error must be >= 0")


def transmit_round(
    sol: FilterSolution,
    ch: ChannelSet,
    m: int,
    symbols: Sequence[CDiag],
    noise: NoiseModel,
    rng: np.random.Generator,
) -> TransmissionRecord:
    """One OFDM symbol over the multi-access channel.

    ``x_hat = A^H sum_k H_k B_k X'_k + A^H W`` with a fresh noise draw W;
    the target is ``sum_k X'_k``.
    """
    hs = ch.symbol(m)
    if len(symbols) != len(hs) or len(sol.b) != len(hs):
        raise DimensionMismatch(f"expected {len(hs)} nodes")
    n = ch.subcarriers
    w = sample_noise(n, noise, rng)
    rx = w
    target = CDiag.zeros(n)
    for hk, bk, xk in zip(hs, sol.b, symbols):
        rx = dadd(rx, dmul(dmul(hk, bk), xk))
        target = dadd(target, xk)
    return TransmissionRecord(x_hat=dmul(sol.a.conj(), rx), x_target=target, noise_draw=w)


def analytic_mse(sol: FilterSolution, ch: ChannelSet, m: int, noise: NoiseModel) -> float:
    """Expected squared error for unit-power symbols::

        sum_k tr[(A^H H_k B_k - I)(A^H H_k B_k - I)^H] + sigma^2 tr(A^H A)
    """
    ah = sol.a.conj()
    ident = CDiag.identity(ch.subcarriers)
    bias = 0.0
    for hk, bk in zip(ch.symbol(m), sol.b):
        eff = dmul(dmul(ah, hk), bk)
        bias += fro_norm_sq(dadd(eff, ident.scale(-1.0)))
    return bias + noise.variance * fro_norm_sq(sol.a)


# xxxxxxxxxx Monte-Carlo harness xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
def _draw_trial(rng, K, N, T_s):
    redraws = 0
    h = draw_cn(rng, (T_s, K, N))
    while np.any(np.abs(h) <= REDRAW_THRESHOLD):
        redraws += 1
        h = draw_cn(rng, (T_s, K, N))
    x = np.exp(2j * np.pi * rng.random((T_s, K, N)))
    w = draw_cn(rng, (T_s, N))
    return h, x, w, redraws


def _run_chunk(task):
    seed, start, stop, K, N, T_s, methods, sigma2, p0, T, normalize = task
    n = stop - start
    h = np.empty((n, T_s, K, N), dtype=np.complex128)
    x = np.empty_like(h)
    w = np.empty((n, T_s, N), dtype=np.complex128)
    redraws = 0
    for i, t in enumerate(range(start, stop)):
        h[i], x[i], w[i], r = _draw_trial(trial_rng(seed, t), K, N, T_s)
        redraws += r

    mask = participation_mask(h, T) if T is not None and T < K else None
    if mask is not None:
        x = np.where(mask, x, 0)
    target = x.sum(axis=-2)
    scale = 1.0 / N if normalize else 1.0

    out = {}
    for method in methods:
        _, _, a, b = design_arrays(method, h, p0, mask)
        ah = np.conj(a)
        eff = ah[..., np.newaxis, :] * h * b
        signal = (eff * x).sum(axis=-2)
        resid = eff - 1.0 if mask is None else np.where(mask, eff - 1.0, 0)
        bias = (np.abs(resid) ** 2).sum(axis=(-1, -2))
        a2 = (np.abs(a) ** 2).sum(axis=-1)
        samples = np.empty((n, len(sigma2)))
        analytic = np.empty((n, len(sigma2)))
        for j, s2 in enumerate(sigma2):
            x_hat = signal + ah * (np.sqrt(s2) * w)
            err = (np.abs(x_hat - target) ** 2).sum(axis=-1)
            samples[:, j] = err.mean(axis=-1) * scale
            analytic[:, j] = (bias + s2 * a2).mean(axis=-1) * scale
        out[method] = (samples, analytic)
    return out, redraws


def simulate(
    cfg: ChannelConfig,
    methods: Sequence[str],
    ebno_db: Sequence[float],
    trials: int,
    p0: float = 1.0,
    seed: int | None = None,
    plan: SubfunctionPlan | None = None,
    normalize_by_n: bool = False,
    workers: int = 1,
) -> dict[str, list[MseEstimate]]:
    """Monte-Carlo MSE of several methods on shared random draws.

    Every method sees the same channels, symbols and normalized noise per
    trial; the noise is scaled to each grid point, so the estimates across
    the Eb/N0 grid use common random numbers. Trials are processed in
    fixed chunks and reduced in chunk order, so the result does not depend
    on ``workers``.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    for m in methods:
        _check_method(m)
    if plan is not None and plan.K != cfg.nodes:
        raise ValueError(f"plan is for K={plan.K}, channel has K={cfg.nodes}")
    seed = cfg.seed if seed is None else seed
    sigma2 = [ebno_to_noise_var(e) for e in ebno_db]
    T = plan.T if plan is not None else None
    tasks = [
        (seed, s, min(s + CHUNK_TRIALS, trials), cfg.nodes, cfg.subcarriers, cfg.ofdm_symbols,
         tuple(methods), sigma2, p0, T, normalize_by_n)
        for s in range(0, trials, CHUNK_TRIALS)
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, tasks))
    else:
        results = [_run_chunk(t) for t in tasks]

    redraws = sum(r for _, r in results)
    estimates = {}
    for method in methods:
        samples = np.concatenate([res[method][0] for res, _ in results])
        analytic = np.concatenate([res[method][1] for res, _ in results])
        rows = []
        for j, e in enumerate(ebno_db):
            col = samples[:, j]
            se = float(col.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
            rows.append(MseEstimate(
                mean=float(col.mean()), trials=trials, std_error=se,
                analytic=float(analytic[:, j].mean()), ebno_db=float(e), redraws=redraws,
            ))
        estimates[method] = rows
    return estimates


def monte_carlo_mse(
    method: str,
    cfg: ChannelConfig,
    ebno_db: Sequence[float],
    trials: int,
    p0: float = 1.0,
    seed: int | None = None,
    **kwargs,
) -> list[MseEstimate]:
    """Monte-Carlo MSE of one method, one estimate per Eb/N0 grid point."""
    return simulate(cfg, [method], ebno_db, trials, p0, seed, **kwargs)[method]


# xxxxxxxxxx nomographic functions xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
@dataclass(frozen=True)
class NomographicSpec:
    """``h(s_1..s_K) = post(sum_k pre_k(s_k), K)``.

    ``pre`` is one function shared by all nodes or a sequence with one
    function per node.
    """

    name: str
    pre: Callable[[np.ndarray], np.ndarray] | Sequence[Callable[[np.ndarray], np.ndarray]]
    post: Callable[[np.ndarray, int], np.ndarray]
    params: int = 1

    def preprocess(self, k: int, s):
        fn = self.pre[k] if isinstance(self.pre, (list, tuple)) else self.pre
        return fn(s)

    def exact(self, readings) -> np.ndarray:
        readings = np.asarray(readings, dtype=float)
        total = sum(self.preprocess(k, r) for k, r in enumerate(readings))
        return self.post(total, len(readings))


def arithmetic_mean() -> NomographicSpec:
    return NomographicSpec("arithmetic-mean", pre=lambda s: np.asarray(s, dtype=float),
                           post=lambda x, k: x / k)


def _log_positive(s):
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise DomainError("geometric mean requires positive readings")
    return np.log(s)


def geometric_mean() -> NomographicSpec:
    return NomographicSpec("geometric-mean", pre=_log_positive, post=lambda x, k: np.exp(x / k))


def _encode(spec, readings, nodes):
    g = np.array([np.atleast_1d(spec.preprocess(k, r)) for k, r in zip(nodes, readings)], dtype=float)
    if not np.all(np.isfinite(g)):
        raise DomainError(f"{spec.name}: preprocessed value is not finite")
    return g


def _aggregate(g, sol, ch, m, noise, rng):
    """Send preprocessed values and return the AP's estimate of their sum."""
    K, P = g.shape
    N = ch.subcarriers
    if P > N:
        raise DimensionMismatch(f"{P} parameters do not fit on {N} subcarriers")
    # symbol-power normalization, known to the AP and undone after reception
    c = float(np.sqrt(np.mean(g**2))) or 1.0
    symbols = []
    for k in range(K):
        row = np.zeros(N, dtype=np.complex128)
        row[:P] = g[k] / c
        symbols.append(CDiag(row))
    rec = transmit_round(sol, ch, m, symbols, noise, rng)
    return c * rec.x_hat.entries[:P].real


def compute_function(
    spec: NomographicSpec,
    readings,
    sol: FilterSolution,
    ch: ChannelSet,
    m: int = 0,
    noise: NoiseModel = NoiseModel(0.0),
    rng: np.random.Generator | None = None,
):
    """Compute ``spec`` over the air from per-node readings.

    ``readings`` has shape ``(K,)`` or ``(K, P)``; parameter ``p`` rides on
    subcarrier ``p`` as the real part of the symbol.
    """
    readings = np.asarray(readings, dtype=float)
    if readings.shape[0] != ch.nodes:
        raise DimensionMismatch(f"{readings.shape[0]} readings for {ch.nodes} nodes")
    rng = np.random.default_rng(0) if rng is None else rng
    g = _encode(spec, readings, range(ch.nodes))
    out = spec.post(_aggregate(g, sol, ch, m, noise, rng), ch.nodes)
    return float(out[0]) if readings.ndim == 1 else out


def reconstruct_desired(group_sums, spec: NomographicSpec, groups, n_nodes: int):
    """Recombine subfunction pre-image sums and apply the postprocessing."""
    seen = sorted(i for grp in groups for i in grp)
    if seen != list(range(n_nodes)):
        raise ValueError("subfunction groups do not partition the nodes")
    if len(group_sums) != len(groups):
        raise ValueError(f"{len(group_sums)} sums for {len(groups)} groups")
    return spec.post(np.sum(np.asarray(group_sums, dtype=float), axis=0), n_nodes)


def compute_function_planned(
    spec: NomographicSpec,
    readings,
    plan: SubfunctionPlan,
    ch: ChannelSet,
    method: str = "a2",
    p0: float = 1.0,
    m: int = 0,
    noise: NoiseModel = NoiseModel(0.0),
    rng: np.random.Generator | None = None,
):
    """Compute ``spec`` as B subfunctions of M nodes, then recombine.

    Each subfunction group gets its own filter design over its members'
    channels and its own transmission round.
    """
    readings = np.asarray(readings, dtype=float)
    if plan.K != ch.nodes or readings.shape[0] != ch.nodes:
        raise DimensionMismatch("plan, readings and channel disagree on K")
    rng = np.random.default_rng(0) if rng is None else rng
    groups = plan.groups()
    sums = []
    for grp in groups:
        sub = ChannelSet(ch.h[:, grp, :])
        sol = design(method, sub, m, p0)
        g = _encode(spec, readings[grp], grp)
        sums.append(_aggregate(g, sol, sub, m, noise, rng))
    out = reconstruct_desired(sums, spec, groups, plan.K)
    return float(out[0]) if readings.ndim == 1 else out
