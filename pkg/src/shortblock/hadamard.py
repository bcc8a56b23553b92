"""Sylvester-Hadamard correlation and first-order Reed-Muller decoding.

``Delta = U @ H`` is evaluated either by the plain matrix product
(``naive_transform``, 2**(2m) additions) or by m butterfly stages
(``fast_transform``, m * 2**m additions).  Both report the number of
additions/subtractions they performed.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from . import _kernels
from .errors import CapacityError, ConfigurationError, DimensionError

MAX_ORDER = 16
# 2**13 x 2**13 int8 is 64 MiB; larger explicit matrices are refused
MAX_MATRIX_ORDER = 13


@dataclass
class CorrelationVector:
    values: np.ndarray
    ops: int

    @property
    def m(self) -> int:
        return int(self.values.shape[-1]).bit_length() - 1


def hadamard_matrix(m: int) -> np.ndarray:
    """Sylvester matrix H_{2^m} = H_2 kron H_{2^(m-1)}, entries +-1 (int8)."""
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ConfigurationError(f"Hadamard order m must be >= 1, got {m!r}")
    if m > MAX_MATRIX_ORDER:
        raise CapacityError(f"2^{m} x 2^{m} Hadamard matrix exceeds the memory budget")
    return _hadamard(int(m))


@lru_cache(maxsize=None)
def _hadamard(m: int) -> np.ndarray:
    h2 = np.array([[1, 1], [1, -1]], dtype=np.int8)
    h = h2
    for _ in range(m - 1):
        h = np.kron(h2, h)
    h.setflags(write=False)
    return h


def _order(n: int) -> int:
    m = n.bit_length() - 1
    if n < 2 or n != 1 << m:
        raise DimensionError(f"transform length must be a power of two >= 2, got {n}")
    if m > MAX_ORDER:
        raise ConfigurationError(f"transform order m={m} exceeds {MAX_ORDER}")
    return m


def _as_rows(u) -> Tuple[np.ndarray, Tuple[int, ...]]:
    arr = np.asarray(u, dtype=np.float64)
    if arr.ndim == 0:
        raise DimensionError("transform input must be a vector")
    _order(arr.shape[-1])
    shape = arr.shape
    return np.array(arr.reshape(-1, shape[-1]), dtype=np.float64, order="C"), shape


def fast_transform(u) -> CorrelationVector:
    """Butterfly evaluation of ``u @ H``.

    Stage i applies ``I_{2^(m-i)} kron H_2 kron I_{2^(i-1)}``, i.e. sums and
    differences of entries 2**(i-1) apart.  ``u`` may carry leading batch
    axes; ``ops`` is always the count for a single vector.
    """
    rows, shape = _as_rows(u)
    ops = _kernels.fht_rows(rows)
    return CorrelationVector(rows.reshape(shape), int(ops))


def naive_transform(u, recompute: bool = False) -> CorrelationVector:
    """Direct evaluation of ``Delta_j = sum_t u_t H[t, j]``.

    With ``recompute=True`` the signs of H are regenerated from the index
    parity instead of read from a stored matrix.
    """
    rows, shape = _as_rows(u)
    out = np.empty_like(rows)
    if recompute:
        ops = _kernels.naive_parity_rows(rows, out)
    else:
        h = hadamard_matrix(_order(shape[-1]))
        ops = _kernels.naive_rows(rows, h.astype(np.float64), out)
    return CorrelationVector(out.reshape(shape), int(ops))


def decode_correlations(delta) -> Tuple[np.ndarray, np.ndarray]:
    """Message bits and metric from a correlation vector (or a stack of them).

    The largest ``|Delta_j|`` selects the v-bits (binary expansion of j,
    v_m first); the constant bit is 1 when that correlation is negative.
    Ties go to the smallest j and to a constant bit of 0.
    """
    delta = np.asarray(delta, dtype=np.float64)
    m = _order(delta.shape[-1])
    mag = np.abs(delta)
    j = np.argmax(mag, axis=-1)
    peak = np.take_along_axis(delta, j[..., None], axis=-1)[..., 0]
    bits = np.empty(delta.shape[:-1] + (m + 1,), dtype=np.uint8)
    bits[..., 0] = peak < 0
    for pos in range(m):
        bits[..., 1 + pos] = (j >> (m - 1 - pos)) & 1
    return bits, np.abs(peak)


def rm1_fht_decode(u) -> Tuple[np.ndarray, float]:
    """Maximum-correlation decoding of one RM(1, m) block from soft values.

    ``u`` holds bipolar-style reliabilities (positive favours bit 0).
    Returns ``(message, metric)`` with the message ordered like the
    generator rows ``[1, v_m, ..., v_1]``.
    """
    bits, metric = decode_correlations(fast_transform(u).values)
    if bits.ndim == 1:
        return bits, float(metric)
    return bits, metric


def rm1_ht_decode(u) -> Tuple[np.ndarray, float]:
    """Same decision as :func:`rm1_fht_decode` through the direct product."""
    bits, metric = decode_correlations(naive_transform(u).values)
    if bits.ndim == 1:
        return bits, float(metric)
    return bits, metric
