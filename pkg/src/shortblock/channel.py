"""SIMO channel realizations and the AWGN observation model y_i = h_i * x + z_i."""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from typing import Tuple

import numpy as np

from .errors import ConfigurationError, DimensionError
from .phy_frame import FrameConfig

LOS_PHASE = "los"
TDL_C = "tdlc"
MODELS = (LOS_PHASE, TDL_C)

_PROFILE_FILES = {TDL_C: "tdl_c.txt"}


@dataclass(frozen=True)
class ChannelConfig:
    model: str = TDL_C
    antennas: int = 2
    delay_spread: float = 300e-9
    subcarrier_spacing: float = 30e3
    normalize_power: bool = True

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigurationError(f"unknown channel model {self.model!r}; use one of {MODELS}")
        if self.antennas < 1:
            raise ConfigurationError(f"need at least one receive antenna, got {self.antennas}")
        if self.model == TDL_C and not self.delay_spread > 0:
            raise ConfigurationError("TDL-C needs a positive delay spread")
        if not self.subcarrier_spacing > 0:
            raise ConfigurationError("subcarrier spacing must be positive")


@dataclass
class ChannelRealization:
    """Per-antenna, per-RE gains (shape ``(..., N_R, N)``) and noise variance.

    ``sigma2`` is the noise variance per real dimension (N0 = 2 sigma2).
    """

    gains: np.ndarray
    sigma2: float = 0.0

    @property
    def n0(self) -> float:
        return 2.0 * self.sigma2

    def with_noise(self, sigma2: float) -> "ChannelRealization":
        return replace(self, sigma2=float(sigma2))


@lru_cache(maxsize=None)
def load_profile(model: str = TDL_C) -> Tuple[np.ndarray, np.ndarray]:
    """(normalized delays, tap powers in dB) of a TDL profile."""
    try:
        name = _PROFILE_FILES[model]
    except KeyError:
        raise ConfigurationError(f"no power-delay profile for model {model!r}") from None
    try:
        text = resources.files("shortblock.data").joinpath(name).read_text()
    except FileNotFoundError:
        raise ConfigurationError(f"profile data file {name} is missing") from None
    rows = [line.split() for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")]
    table = np.array(rows, dtype=np.float64)
    delays, powers_db = table[:, 0].copy(), table[:, 1].copy()
    delays.setflags(write=False)
    powers_db.setflags(write=False)
    return delays, powers_db


def draw_los_phase(rng: np.random.Generator, cfg: ChannelConfig, frame: FrameConfig,
                   size: int | None = None) -> ChannelRealization:
    """One uniform phase per antenna, held over the whole frame."""
    if cfg.model != LOS_PHASE:
        raise ConfigurationError(f"draw_los_phase called with model {cfg.model!r}")
    lead = () if size is None else (size,)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=lead + (cfg.antennas,))
    gains = np.repeat(np.exp(1j * theta)[..., None], frame.n, axis=-1)
    return ChannelRealization(gains)


def tdl_frequency_response(taps: np.ndarray, delays_s: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """sum_t a_t exp(-j 2 pi f tau_t) for every frequency (last axis of taps = tap)."""
    phasor = np.exp(-2j * np.pi * np.outer(delays_s, freqs))
    return taps @ phasor


def draw_tdlc(rng: np.random.Generator, cfg: ChannelConfig, frame: FrameConfig,
              size: int | None = None) -> ChannelRealization:
    """Rayleigh TDL-C taps, independent per antenna, block fading over the frame."""
    if cfg.model != TDL_C:
        raise ConfigurationError(f"draw_tdlc called with model {cfg.model!r}")
    norm_delays, powers_db = load_profile(TDL_C)
    powers = 10.0 ** (powers_db / 10.0)
    if cfg.normalize_power:
        powers = powers / powers.sum()
    lead = () if size is None else (size,)
    shape = lead + (cfg.antennas, powers.size)
    taps = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(powers / 2.0)
    freqs = frame.subcarriers * cfg.subcarrier_spacing
    gains = tdl_frequency_response(taps, norm_delays * cfg.delay_spread, freqs)
    return ChannelRealization(gains)


def draw_channel(rng: np.random.Generator, cfg: ChannelConfig, frame: FrameConfig,
                 size: int | None = None) -> ChannelRealization:
    if cfg.model == LOS_PHASE:
        return draw_los_phase(rng, cfg, frame, size)
    return draw_tdlc(rng, cfg, frame, size)


def standard_complex_noise(rng: np.random.Generator, shape) -> np.ndarray:
    """Complex Gaussian with unit variance per real dimension."""
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def apply_channel(grid, ch: ChannelRealization, rng: np.random.Generator | None = None,
                  noise: np.ndarray | None = None) -> np.ndarray:
    """Observations ``gains * x + z`` of shape ``(..., N_R, N)``.

    ``noise`` may carry pre-drawn unit-variance samples (scaled here by
    sqrt(sigma2)); otherwise they are drawn from ``rng``.
    """
    x = np.asarray(grid)
    gains = ch.gains
    if x.shape[-1] != gains.shape[-1]:
        raise DimensionError(f"grid has {x.shape[-1]} REs, channel has {gains.shape[-1]}")
    y = gains * x[..., None, :]
    if ch.sigma2 > 0:
        if noise is None:
            if rng is None:
                raise ConfigurationError("noisy channel needs an rng or pre-drawn noise")
            noise = standard_complex_noise(rng, y.shape)
        elif noise.shape != y.shape:
            raise DimensionError(f"noise shape {noise.shape} != observation shape {y.shape}")
        y = y + np.sqrt(ch.sigma2) * noise
    return y


def snr_to_sigma(snr_db: float, frame: FrameConfig) -> float:
    """sigma^2 per real dimension for SNR = mean RE energy / N0 (unit-power channel)."""
    return float(10.0 ** (-np.asarray(snr_db, dtype=np.float64) / 10.0) * frame.mean_symbol_energy / 2.0)
