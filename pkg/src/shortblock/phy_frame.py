"""Transmit chain below the encoder: scrambling, QPSK, DMRS, RE mapping.

The frame is a flat vector of N = 12 * prbs * symbols resource elements,
indexed symbol-major (``l * 12 * prbs + 12 * p + k``).  DMRS occupy the
per-PRB subcarriers in ``dmrs_pattern`` and are scaled by ``beta``; data
fills the remaining elements in increasing index order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DimensionError

SC_PER_PRB = 12
DEFAULT_DMRS_PATTERN = (1, 4, 7, 10)


@dataclass(frozen=True)
class FrameConfig:
    prbs: int = 2
    symbols: int = 1
    dmrs_pattern: Tuple[int, ...] = DEFAULT_DMRS_PATTERN
    beta: float = 1.0
    scrambling: bool = False
    c_init: int = 0
    dmrs_c_init: int = 0x1234
    normalize: bool = False
    region_prbs: int = 1

    def __post_init__(self):
        if self.prbs < 1 or self.symbols < 1:
            raise ConfigurationError("prbs and symbols must be >= 1")
        if self.region_prbs < 1 or self.prbs % self.region_prbs:
            raise ConfigurationError(
                f"region_prbs={self.region_prbs} must be >= 1 and divide prbs={self.prbs}")
        pattern = tuple(sorted(int(k) for k in self.dmrs_pattern))
        if len(set(pattern)) != len(pattern) or any(not 0 <= k < SC_PER_PRB for k in pattern):
            raise ConfigurationError(f"invalid DMRS pattern {self.dmrs_pattern}")
        if len(pattern) in (0, SC_PER_PRB):
            raise ConfigurationError("DMRS pattern must leave room for both pilots and data")
        if not self.beta > 0:
            raise ConfigurationError(f"beta must be positive, got {self.beta}")
        if not 0 <= self.c_init < 2**31 or not 0 <= self.dmrs_c_init < 2**31:
            raise ConfigurationError("c_init values must fit in 31 bits")
        object.__setattr__(self, "dmrs_pattern", pattern)

    @property
    def n(self) -> int:
        return SC_PER_PRB * self.prbs * self.symbols

    @property
    def n_p(self) -> int:
        return len(self.dmrs_pattern) * self.prbs * self.symbols

    @property
    def n_d(self) -> int:
        return self.n - self.n_p

    @property
    def e_bits(self) -> int:
        """Coded bits carried by the data REs (QPSK)."""
        return 2 * self.n_d

    @property
    def n_regions(self) -> int:
        return self.prbs * self.symbols // self.region_prbs

    @cached_property
    def dmrs_mask(self) -> np.ndarray:
        k = np.arange(self.n) % SC_PER_PRB
        mask = np.isin(k, self.dmrs_pattern)
        mask.setflags(write=False)
        return mask

    @cached_property
    def data_mask(self) -> np.ndarray:
        mask = ~self.dmrs_mask
        mask.setflags(write=False)
        return mask

    @cached_property
    def data_indices(self) -> np.ndarray:
        return np.flatnonzero(self.data_mask)

    @cached_property
    def dmrs_indices(self) -> np.ndarray:
        return np.flatnonzero(self.dmrs_mask)

    @cached_property
    def regions(self) -> np.ndarray:
        """Flatness-region id of every RE.

        A region is ``region_prbs`` adjacent PRBs within one OFDM symbol; the
        receivers treat the channel as constant inside it.
        """
        return np.arange(self.n) // (SC_PER_PRB * self.region_prbs)

    @cached_property
    def subcarriers(self) -> np.ndarray:
        """Subcarrier index of every RE within the allocation."""
        return np.arange(self.n) % (SC_PER_PRB * self.prbs)

    @property
    def raw_energy(self) -> float:
        """Average symbol energy (N_d + beta^2 N_p) / N before normalization."""
        return (self.n_d + self.beta**2 * self.n_p) / self.n

    @property
    def mean_symbol_energy(self) -> float:
        """Average energy per RE at the mapper output."""
        return 1.0 if self.normalize else self.raw_energy


@dataclass
class ResourceGrid:
    symbols: np.ndarray
    data_mask: np.ndarray = field(repr=False)

    @property
    def data(self) -> np.ndarray:
        return self.symbols[..., self.data_mask]

    @property
    def dmrs(self) -> np.ndarray:
        return self.symbols[..., ~self.data_mask]


def scrambling_sequence(c_init: int, length: int, enabled: bool = True) -> np.ndarray:
    """Gold sequence d(n) = x1(n + 1600) xor x2(n + 1600); zeros if disabled."""
    if length < 1:
        raise ConfigurationError(f"sequence length must be >= 1, got {length}")
    if not enabled:
        return np.zeros(length, dtype=np.uint8)
    return _kernels.gold(int(c_init), int(length))


def scramble(e, d) -> np.ndarray:
    e = np.asarray(e, dtype=np.uint8)
    d = np.asarray(d, dtype=np.uint8)
    if e.shape[-1] != d.shape[-1]:
        raise DimensionError(f"bit vector length {e.shape[-1]} != scrambling length {d.shape[-1]}")
    return e ^ d


def qpsk_modulate(bits) -> np.ndarray:
    """((1 - 2 b_2i) + j (1 - 2 b_2i+1)) / sqrt(2) along the last axis."""
    bits = np.asarray(bits)
    if bits.shape[-1] % 2:
        raise DimensionError(f"QPSK needs an even number of bits, got {bits.shape[-1]}")
    b = 1.0 - 2.0 * bits.astype(np.float64)
    return (b[..., 0::2] + 1j * b[..., 1::2]) / np.sqrt(2.0)


def qpsk_hard_demodulate(symbols) -> np.ndarray:
    s = np.asarray(symbols)
    bits = np.empty(s.shape[:-1] + (2 * s.shape[-1],), dtype=np.uint8)
    bits[..., 0::2] = s.real < 0
    bits[..., 1::2] = s.imag < 0
    return bits


def qpsk_soft_demodulate(symbols) -> np.ndarray:
    """Real soft values, positive favouring bit 0 (unscaled)."""
    s = np.asarray(symbols)
    soft = np.empty(s.shape[:-1] + (2 * s.shape[-1],), dtype=np.float64)
    soft[..., 0::2] = s.real
    soft[..., 1::2] = s.imag
    return soft


def generate_dmrs(cfg: FrameConfig) -> np.ndarray:
    """Unit-modulus QPSK pilots drawn from the Gold sequence at ``dmrs_c_init``."""
    return qpsk_modulate(scrambling_sequence(cfg.dmrs_c_init, 2 * cfg.n_p))


def map_resources(data, dmrs, cfg: FrameConfig) -> ResourceGrid:
    """Build x = x_d + beta * x_p on disjoint supports.

    ``data`` may be batched along leading axes; ``dmrs`` is broadcast.
    """
    data = np.asarray(data)
    dmrs = np.asarray(dmrs)
    if data.shape[-1] != cfg.n_d:
        raise DimensionError(f"expected {cfg.n_d} data symbols, got {data.shape[-1]}")
    if dmrs.shape[-1] != cfg.n_p:
        raise DimensionError(f"expected {cfg.n_p} DMRS symbols, got {dmrs.shape[-1]}")
    grid = np.zeros(data.shape[:-1] + (cfg.n,), dtype=np.complex128)
    grid[..., cfg.data_indices] = data
    grid[..., cfg.dmrs_indices] = cfg.beta * dmrs
    if cfg.normalize:
        grid /= np.sqrt(cfg.raw_energy)
    return ResourceGrid(grid, cfg.data_mask)


def demap_resources(y, cfg: FrameConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Split a received (or transmitted) grid into (data REs, DMRS REs)."""
    y = np.asarray(y)
    if y.shape[-1] != cfg.n:
        raise DimensionError(f"expected a grid of {cfg.n} REs, got {y.shape[-1]}")
    return y[..., cfg.data_indices], y[..., cfg.dmrs_indices]
