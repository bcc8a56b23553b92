import numpy as np
import pytest

from shortblock.channel import (ChannelConfig, ChannelRealization, apply_channel, draw_channel,
                                draw_los_phase, draw_tdlc, load_profile, snr_to_sigma,
                                standard_complex_noise)
from shortblock.errors import ConfigurationError, DimensionError
from shortblock.phy_frame import FrameConfig

FRAME = FrameConfig()


def test_profile_file():
    delays, powers_db = load_profile("tdlc")
    assert delays.size == powers_db.size == 24
    assert delays[0] == 0.0 and np.isclose(delays[-1], 8.6523)
    assert powers_db.max() == 0.0


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ChannelConfig(model="tdla")
    with pytest.raises(ConfigurationError):
        ChannelConfig(antennas=0)
    with pytest.raises(ConfigurationError):
        ChannelConfig(delay_spread=0.0)
    with pytest.raises(ConfigurationError):
        draw_tdlc(np.random.default_rng(0), ChannelConfig(model="los"), FRAME)


def test_los_phase_unit_and_constant(rng):
    ch = draw_los_phase(rng, ChannelConfig("los", 3), FRAME)
    assert ch.gains.shape == (3, 24)
    assert np.allclose(np.abs(ch.gains), 1.0)
    assert np.allclose(ch.gains, ch.gains[:, :1])


def test_los_phase_circular_uniform(rng):
    g = draw_los_phase(rng, ChannelConfig("los", 2), FRAME, size=100_000).gains[..., 0]
    assert abs(g[:, 0].mean()) < 0.02
    # independent antennas: E[g0 conj(g1)] -> 0
    assert abs(np.mean(g[:, 0] * np.conj(g[:, 1]))) < 0.02


def test_tdlc_unit_power(rng):
    g = draw_tdlc(rng, ChannelConfig("tdlc", 1), FRAME, size=100_000).gains
    assert abs(np.mean(np.abs(g) ** 2) - 1.0) < 0.02


def test_tdlc_gaussian_marginal(rng):
    g = draw_tdlc(rng, ChannelConfig("tdlc", 1), FRAME, size=100_000).gains[:, 0, 5]
    x = g.real
    kurt = np.mean((x - x.mean()) ** 4) / np.var(x) ** 2
    assert 2.9 <= kurt <= 3.1


def test_tdlc_zero_delay_is_flat(rng):
    g = draw_tdlc(rng, ChannelConfig("tdlc", 2, delay_spread=1e-15), FRAME).gains
    assert np.max(np.abs(g - g[:, :1])) < 1e-6


def _adjacent_correlation(ds, rng):
    g = draw_tdlc(rng, ChannelConfig("tdlc", 1, delay_spread=ds), FRAME, size=50_000).gains[:, 0]
    return abs(np.mean(g[:, 0] * np.conj(g[:, 12]))) / np.mean(np.abs(g[:, 0]) ** 2)


def test_tdlc_frequency_correlation_falls_with_delay_spread(rng):
    assert _adjacent_correlation(300e-9, rng) < _adjacent_correlation(30e-9, rng)


def test_tdlc_constant_over_symbols(rng):
    fr = FrameConfig(symbols=2)
    g = draw_tdlc(rng, ChannelConfig("tdlc", 2), fr).gains
    assert np.allclose(g[:, :24], g[:, 24:])


def test_tdlc_antennas_independent(rng):
    g = draw_tdlc(rng, ChannelConfig("tdlc", 2), FRAME, size=100_000).gains[:, :, 0]
    assert abs(np.mean(g[:, 0] * np.conj(g[:, 1]))) < 0.02


def test_determinism():
    cfg = ChannelConfig("tdlc", 4)
    a = draw_channel(np.random.default_rng(5), cfg, FRAME, size=3).gains
    b = draw_channel(np.random.default_rng(5), cfg, FRAME, size=3).gains
    assert (a == b).all()


def test_apply_channel_identity():
    x = np.exp(1j * np.arange(24))
    ch = ChannelRealization(np.ones((2, 24), dtype=complex))
    assert (apply_channel(x, ch) == x).all()


def test_apply_channel_noiseless_magnitude(rng):
    x = rng.standard_normal(24) + 1j * rng.standard_normal(24)
    ch = draw_tdlc(rng, ChannelConfig("tdlc", 3), FRAME)
    y = apply_channel(x, ch, rng)
    assert np.allclose(np.abs(y), np.abs(ch.gains) * np.abs(x))


def test_noise_power_and_whiteness(rng):
    ch = ChannelRealization(np.ones((1, 24), dtype=complex)).with_noise(0.3)
    y = apply_channel(np.zeros((100_000, 24)), ch, rng)[:, 0, :]
    assert abs(np.mean(np.abs(y) ** 2) - 0.6) < 0.02 * 0.6
    cross = abs(np.mean(y[:, 0] * np.conj(y[:, 1]))) / 0.6
    assert cross < 0.02


def test_apply_channel_dimension_checks(rng):
    ch = ChannelRealization(np.ones((2, 24), dtype=complex), 1.0)
    with pytest.raises(DimensionError):
        apply_channel(np.zeros(12), ch, rng)
    with pytest.raises(DimensionError):
        apply_channel(np.zeros(24), ch, noise=np.zeros((3, 24)))
    with pytest.raises(ConfigurationError):
        apply_channel(np.zeros(24), ch)


def test_predrawn_noise_is_scaled(rng):
    z = standard_complex_noise(rng, (2, 24))
    ch = ChannelRealization(np.zeros((2, 24), dtype=complex), 0.25)
    assert np.allclose(apply_channel(np.ones(24), ch, noise=z), 0.5 * z)


def test_snr_to_sigma():
    assert snr_to_sigma(0.0, FRAME) == pytest.approx(0.5)
    assert snr_to_sigma(3.0103, FRAME) == pytest.approx(0.25, rel=1e-5)
    fr = FrameConfig(beta=1.75)
    assert fr.mean_symbol_energy == pytest.approx((16 + 1.75**2 * 8) / 24)
    assert snr_to_sigma(0.0, fr) == pytest.approx((16 + 1.75**2 * 8) / 48)
    assert snr_to_sigma(0.0, FrameConfig(beta=1.75, normalize=True)) == pytest.approx(0.5)
    assert snr_to_sigma(float("inf"), FRAME) == 0.0
