"""Reed-Muller encoders for short control payloads.

Two schemes are provided:

* ``standard32k``: the (32, K) code used for NR PUCCH format 2, built from
  the 32 x 11 basis table shipped in ``data/rm32_basis.txt``.
* ``block-rm1``: the payload is split into sub-blocks, each encoded with a
  first-order code RM(1, m_j) of length 2**m_j, and the codewords are
  concatenated.  For K = 11 the split is 5 bits -> RM(1,4) then 6 bits ->
  RM(1,5), a 48-bit word.

Bit vectors are ``uint8`` numpy arrays holding 0/1.  Message integers map to
bits most-significant first, ``b[0]`` being the MSB.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, DimensionError

STANDARD32K = "standard32k"
BLOCK_RM1 = "block-rm1"
SCHEMES = (STANDARD32K, BLOCK_RM1)

BASIS_TABLE_FILE = "rm32_basis.txt"
# sha256 over the table as 32*11 uint8 values, row-major
BASIS_TABLE_SHA256 = "da68a543958b861a1a8ef06c1790750bda9e5d910ce1a1d8b8a93fdc888ceb52"


@dataclass(frozen=True)
class GeneratorMatrix:
    """Generator of RM(1, m).

    ``rows[0]`` is the all-ones vector and ``rows[1 + k]`` is v_{m-k}, so the
    rows read ``[1, v_m, ..., v_1]``.  Column t of the v-rows spells t in
    binary, v_1 being the least significant bit.
    """

    m: int
    rows: np.ndarray = field(repr=False)

    @property
    def k(self) -> int:
        return self.rows.shape[0]

    @property
    def n(self) -> int:
        return self.rows.shape[1]


def build_rm1_generator(m: int) -> GeneratorMatrix:
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= 16:
        raise ConfigurationError(f"RM(1, m) needs 1 <= m <= 16, got m={m!r}")
    return _rm1_generator(int(m))


@lru_cache(maxsize=None)
def _rm1_generator(m: int) -> GeneratorMatrix:
    t = np.arange(2**m)
    rows = np.empty((m + 1, 2**m), dtype=np.uint8)
    rows[0] = 1
    for j in range(m, 0, -1):
        rows[1 + m - j] = (t >> (j - 1)) & 1
    rows.setflags(write=False)
    return GeneratorMatrix(m=m, rows=rows)


def _as_bits(bits, name="message") -> np.ndarray:
    arr = np.asarray(bits)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise DimensionError(f"{name} must contain only 0/1 values")
    return arr.astype(np.uint8)


def encode_rm1(message, gen: GeneratorMatrix) -> np.ndarray:
    """Codeword ``message @ G`` over GF(2).

    ``message`` may be one vector of length m+1 or a stack of them (rows).
    """
    msg = _as_bits(message)
    if msg.shape[-1] != gen.k:
        raise DimensionError(
            f"message length {msg.shape[-1]} does not match generator with {gen.k} rows")
    return ((msg.astype(np.int64) @ gen.rows) & 1).astype(np.uint8)


@lru_cache(maxsize=1)
def load_basis_table() -> np.ndarray:
    """32 x 11 basis sequences M[l, k] of the (32, K) code."""
    text = resources.files("shortblock.data").joinpath(BASIS_TABLE_FILE).read_text()
    rows = [line.split() for line in text.splitlines() if line.strip()]
    table = np.array(rows, dtype=np.uint8)
    if table.shape != (32, 11) or not np.isin(table, (0, 1)).all():
        raise ConfigurationError(f"basis table has shape {table.shape}, expected (32, 11) of bits")
    digest = hashlib.sha256(np.ascontiguousarray(table).tobytes()).hexdigest()
    if digest != BASIS_TABLE_SHA256:
        raise ConfigurationError(f"basis table checksum mismatch: {digest}")
    table.setflags(write=False)
    return table


def encode_32k(message, table: np.ndarray | None = None) -> np.ndarray:
    """c[l] = sum_k b[k] M[l, k] mod 2, l = 0..31."""
    if table is None:
        table = load_basis_table()
    msg = _as_bits(message)
    k = msg.shape[-1]
    if not 3 <= k <= 11:
        raise ConfigurationError(f"(32, K) code supports 3 <= K <= 11, got K={k}")
    return ((msg.astype(np.int64) @ table[:, :k].T.astype(np.int64)) & 1).astype(np.uint8)


def default_split(k: int) -> Tuple[Tuple[int, int], ...]:
    """Sub-block split ``((k_1, m_1), ...)`` with ``k_j = m_j + 1``.

    Up to 7 bits use one block; larger payloads are halved, the second block
    taking the extra bit (11 -> 5 + 6).
    """
    if k < 2:
        raise ConfigurationError(f"block RM(1, m) coding needs K >= 2, got {k}")
    if k <= 7:
        return ((k, k - 1),)
    k1 = k // 2
    return tuple((kj, kj - 1) for kj in (k1, k - k1))


@dataclass(frozen=True)
class CodeConfig:
    scheme: str = STANDARD32K
    k: int = 4
    e: int = 32
    split: Tuple[Tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown code scheme {self.scheme!r}")
        if self.scheme == STANDARD32K:
            if not 3 <= self.k <= 11:
                raise ConfigurationError(f"(32, K) code supports 3 <= K <= 11, got K={self.k}")
            if self.split is not None:
                raise ConfigurationError("a block split only applies to the block-rm1 scheme")
        else:
            split = self.split if self.split is not None else default_split(self.k)
            split = tuple((int(kj), int(mj)) for kj, mj in split)
            for kj, mj in split:
                if kj != mj + 1 or not 1 <= mj <= 16:
                    raise ConfigurationError(f"invalid sub-block (k={kj}, m={mj})")
            if sum(kj for kj, _ in split) != self.k:
                raise ConfigurationError(f"split {split} does not sum to K={self.k}")
            object.__setattr__(self, "split", split)
        if self.e < self.n_coded:
            raise ConfigurationError(
                f"rate-matched length E={self.e} is shorter than the codeword ({self.n_coded}); "
                "puncturing is not supported")

    @property
    def n_coded(self) -> int:
        """Codeword length before rate matching (N')."""
        if self.scheme == STANDARD32K:
            return 32
        return sum(2**mj for _, mj in self.split)

    @property
    def block_lengths(self) -> Tuple[int, ...]:
        if self.scheme == STANDARD32K:
            return (32,)
        return tuple(2**mj for _, mj in self.split)


def segment_and_encode(message, cfg: CodeConfig) -> np.ndarray:
    if cfg.scheme != BLOCK_RM1:
        raise ConfigurationError("segment_and_encode requires the block-rm1 scheme")
    msg = _as_bits(message)
    if msg.shape[-1] != cfg.k:
        raise DimensionError(f"message has {msg.shape[-1]} bits, split expects {cfg.k}")
    parts = []
    start = 0
    for kj, mj in cfg.split:
        parts.append(encode_rm1(msg[..., start:start + kj], build_rm1_generator(mj)))
        start += kj
    return np.concatenate(parts, axis=-1)


def encode(message, cfg: CodeConfig) -> np.ndarray:
    """Codeword of length N' for either scheme (before rate matching)."""
    if cfg.scheme == STANDARD32K:
        msg = _as_bits(message)
        if msg.shape[-1] != cfg.k:
            raise DimensionError(f"message has {msg.shape[-1]} bits, config expects {cfg.k}")
        return encode_32k(msg)
    return segment_and_encode(message, cfg)


def rate_match_repeat(code, e: int) -> np.ndarray:
    """Cyclic repetition: ``out[l] = code[l mod N']`` for l < E."""
    code = np.asarray(code)
    if e < 1:
        raise ConfigurationError(f"E must be >= 1, got {e}")
    n = code.shape[-1]
    if e < n:
        raise ConfigurationError(f"E={e} < N'={n}: puncturing is not supported")
    return np.take(code, np.arange(e) % n, axis=-1)


def int_to_bits(values, k: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def bits_to_int(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    k = bits.shape[-1]
    return (bits << np.arange(k - 1, -1, -1)).sum(axis=-1)


def all_messages(k: int) -> np.ndarray:
    """Every K-bit message, row M holding the bits of integer M."""
    return int_to_bits(np.arange(2**k), k)
