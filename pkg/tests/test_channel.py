import math

import numpy as np
import pytest

from helpers import channels, rand_cn
from nomacomac.channel import (
    ChannelConfig,
    ChannelSet,
    NoiseModel,
    ebno_to_noise_var,
    effective_channel_g,
    effective_channel_g_array,
    sample_channels,
    sample_noise,
    sum_channel,
)
from nomacomac.diag import svd_diag


def test_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig(0, 4)
    with pytest.raises(ValueError):
        ChannelConfig(2, 4, ofdm_symbols=0)
    with pytest.raises(ValueError):
        ChannelConfig(2, 4, seed=-1)


def test_sample_channels_deterministic():
    cfg = ChannelConfig(3, 5, 2, seed=7)
    a, b = sample_channels(cfg), sample_channels(cfg)
    assert a.h.tobytes() == b.h.tobytes()
    assert sample_channels(cfg, trial=1).h.tobytes() != a.h.tobytes()


def test_sample_channels_shape():
    ch = sample_channels(ChannelConfig(nodes=2, subcarriers=4, ofdm_symbols=3))
    diags = [ch.node(m, k) for m in range(3) for k in range(2)]
    assert len(diags) == 6
    assert all(d.n == 4 for d in diags)


def test_sample_channels_unit_power():
    ch = sample_channels(ChannelConfig(nodes=10, subcarriers=100, ofdm_symbols=100, seed=3))
    assert ch.h.size == 10**5
    assert 0.99 <= np.mean(np.abs(ch.h) ** 2) <= 1.01


def test_sample_noise():
    rng = np.random.default_rng(1)
    assert np.array_equal(sample_noise(6, NoiseModel(0.0), rng).entries, np.zeros(6))
    w = sample_noise(10**5, NoiseModel(0.5), np.random.default_rng(2)).entries
    assert np.mean(np.abs(w) ** 2) == pytest.approx(0.5, abs=0.01)
    # real and imaginary parts each carry half
    assert np.var(w.real) == pytest.approx(0.25, abs=0.01)
    a = sample_noise(8, NoiseModel(1.0), np.random.default_rng(5))
    b = sample_noise(8, NoiseModel(1.0), np.random.default_rng(5))
    assert np.array_equal(a.entries, b.entries)


def test_noise_model_rejects_negative():
    with pytest.raises(ValueError):
        NoiseModel(-0.1)


def test_ebno_to_noise_var():
    assert ebno_to_noise_var(0) == 1.0
    assert ebno_to_noise_var(10) == pytest.approx(0.1, rel=1e-15)
    assert ebno_to_noise_var(1) == pytest.approx(math.pow(10.0, -0.1), rel=1e-15)
    assert ebno_to_noise_var(1) == pytest.approx(0.79433, abs=5e-6)
    assert np.allclose(ebno_to_noise_var([0, 10]), [1.0, 0.1])


def test_sum_channel_examples():
    assert np.array_equal(sum_channel(channels([1, 2], [3, 4]), 0).entries, [4, 6])
    assert np.array_equal(sum_channel(channels([1 + 2j, 3]), 0).entries, [1 + 2j, 3])
    assert np.array_equal(sum_channel(channels([1 + 1j], [-1 - 1j]), 0).entries, [0])


def test_sum_channel_scalar_loop_oracle(rng):
    h = rand_cn(rng, (2, 4, 5))
    ch = ChannelSet(h)
    for m in range(2):
        expected = [sum(h[m, k, i] for k in range(4)) for i in range(5)]
        assert np.allclose(sum_channel(ch, m).entries, expected, rtol=0, atol=1e-15)
    with pytest.raises(IndexError):
        sum_channel(ch, 2)


def _g_dense_oracle(ch, m):
    """G built from dense SVDs, independent of the diagonal shortcut."""
    N = ch.subcarriers
    g = np.zeros((N, N), dtype=complex)
    for hk in ch.h[m]:
        u, s, _ = np.linalg.svd(np.diag(hk))
        g += (s.min() ** 2) * (u @ u.conj().T)
    return g


def test_effective_channel_examples():
    assert np.allclose(effective_channel_g(channels([1, 2], [3, 1]), 0).entries, [2, 2], atol=1e-15)
    assert np.allclose(effective_channel_g(channels([1, 1], [1, 1], [1, 1]), 0).entries, [3, 3])
    assert np.allclose(effective_channel_g(channels([2, 3]), 0).entries, [4, 4])


def test_effective_channel_matches_dense_oracle(rng):
    ch = ChannelSet(rand_cn(rng, (3, 4, 6)))
    for m in range(3):
        g = effective_channel_g(ch, m)
        assert np.allclose(g.to_dense(), _g_dense_oracle(ch, m), atol=1e-12)


def test_effective_channel_is_real_scalar_identity(rng):
    for _ in range(200):
        ch = ChannelSet(rand_cn(rng, (1, rng.integers(1, 9), rng.integers(1, 9))))
        g = effective_channel_g(ch, 0).entries
        assert np.max(np.abs(g.imag)) < 1e-12
        assert np.ptp(g.real) < 1e-12
        assert np.all(g.real >= 0)


def test_effective_channel_batch_agrees(rng):
    h = rand_cn(rng, (10, 5, 4))
    batch = effective_channel_g_array(h)
    for t in range(10):
        assert np.allclose(batch[t], effective_channel_g(ChannelSet(h[t]), 0).entries, atol=1e-13)


def test_svd_convention_makes_uu_identity(rng):
    hk = svd_diag(ChannelSet(rand_cn(rng, (1, 1, 6))).node(0, 0))
    assert np.allclose(hk.u.entries * np.conj(hk.u.entries), 1, atol=1e-15)
