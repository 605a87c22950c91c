"""Random channel realizations, noise and derived channel matrices.

Channels are i.i.d. Rayleigh block fading: each node/subcarrier/OFDM
symbol coefficient is an independent unit-variance circularly-symmetric
complex Gaussian, constant within a symbol.

Random streams are keyed rather than shared. Trial ``t`` under master
seed ``s`` always draws from ``SeedSequence(s, spawn_key=(t,))``, and the
draws inside a trial follow a fixed (symbol, node, subcarrier) layout, so
the value at any index path is reproducible regardless of how trials are
distributed over workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .diag import CDiag, dadd, dmul, min_singular_sq, svd_diag, unit_phase

__all__ = [
    "Fading",
    "ChannelConfig",
    "ChannelSet",
    "NoiseModel",
    "trial_rng",
    "draw_cn",
    "sample_channels",
    "sample_noise",
    "ebno_to_noise_var",
    "sum_channel",
    "effective_channel_g",
    "effective_channel_g_array",
]


class Fading(enum.Enum):
    RAYLEIGH_IID = "rayleigh-iid"


@dataclass(frozen=True)
class ChannelConfig:
    """Dimensions and seed of a channel draw.

    Parameters
    ----------
    nodes : int
        Number of sensor nodes K.
    subcarriers : int
        Number of OFDM subcarriers N.
    ofdm_symbols : int
        Number of OFDM symbols T_s.
    """

    nodes: int
    subcarriers: int
    ofdm_symbols: int = 1
    fading: Fading = Fading.RAYLEIGH_IID
    seed: int = 42

    def __post_init__(self):
        for name in ("nodes", "subcarriers", "ofdm_symbols"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Channel matrices ``H_k[m]`` for every OFDM symbol and node.

    ``h`` has shape ``(T_s, K, N)``; indices ``m`` and ``k`` are 0-based.
    """

    h: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.h, dtype=np.complex128, copy=True)
        if arr.ndim == 2:
            arr = arr[np.newaxis]
        if arr.ndim != 3 or 0 in arr.shape:
            raise ValueError(f"channel array must have shape (T_s, K, N), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("channel entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "h", arr)

    @classmethod
    def from_diags(cls, diags) -> "ChannelSet":
        """Single-symbol channel set from a sequence of per-node diagonals."""
        return cls(np.array([[np.asarray(getattr(d, "entries", d)) for d in diags]]))

    @property
    def ofdm_symbols(self) -> int:
        return self.h.shape[0]

    @property
    def nodes(self) -> int:
        return self.h.shape[1]

    @property
    def subcarriers(self) -> int:
        return self.h.shape[2]

    def check_symbol(self, m: int) -> None:
        if not 0 <= m < self.ofdm_symbols:
            raise IndexError(f"OFDM symbol index {m} out of range [0, {self.ofdm_symbols})")

    def node(self, m: int, k: int) -> CDiag:
        self.check_symbol(m)
        if not 0 <= k < self.nodes:
            raise IndexError(f"node index {k} out of range [0, {self.nodes})")
        return CDiag(self.h[m, k])

    def symbol(self, m: int) -> list[CDiag]:
        self.check_symbol(m)
        return [CDiag(row) for row in self.h[m]]


@dataclass(frozen=True)
class NoiseModel:
    """Complex AWGN with per-entry variance ``variance`` (half per real part)."""

    variance: float

    def __post_init__(self):
        if not self.variance >= 0:
            raise ValueError(f"noise variance must be >= 0, got {self.variance!r}")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def draw_cn(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with the given variance."""
    re_im = rng.standard_normal((2, *np.atleast_1d(shape)))
    return np.sqrt(variance / 2.0) * (re_im[0] + 1j * re_im[1])


def sample_channels(cfg: ChannelConfig, trial: int = 0) -> ChannelSet:
    """Draw a Rayleigh channel set; deterministic in ``(cfg.seed, trial)``."""
    rng = trial_rng(cfg.seed, trial)
    return ChannelSet(draw_cn(rng, (cfg.ofdm_symbols, cfg.nodes, cfg.subcarriers)))


def sample_noise(n_dim: int, noise: NoiseModel, rng: np.random.Generator) -> CDiag:
    # always consume the same number of variates so stream positions do not
    # depend on the noise level
    return CDiag(draw_cn(rng, n_dim, noise.variance))


def ebno_to_noise_var(ebno_db: float) -> float:
    """Noise variance for unit symbol energy: ``10 ** (-ebno_db / 10)``."""
    out = np.power(10.0, -np.asarray(ebno_db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def sum_channel(ch: ChannelSet, m: int) -> CDiag:
    """Sum-channel matrix ``H_s = sum_k H_k[m]``."""
    nodes = ch.symbol(m)
    total = nodes[0]
    for hk in nodes[1:]:
        total = dadd(total, hk)
    return total


def effective_channel_g(ch: ChannelSet, m: int) -> CDiag:
    """Effective channel ``G = sum_k lambda_min(Sigma_k^2) U_k U_k^H``.

    With the phase-into-U SVD convention every ``U_k U_k^H`` is the
    identity, so ``G`` is a nonnegative real multiple of I.
    """
    g = None
    for hk in ch.symbol(m):
        u = svd_diag(hk).u
        term = dmul(u, u.conj()).scale(min_singular_sq(hk))
        g = term if g is None else dadd(g, term)
    return g


def effective_channel_g_array(h: np.ndarray) -> np.ndarray:
    """Batched :func:`effective_channel_g` over ``h[..., K, N]``."""
    lam_min = (np.abs(h) ** 2).min(axis=-1, keepdims=True)
    u = unit_phase(h)
    return (lam_min * (u * np.conj(u))).sum(axis=-2)
