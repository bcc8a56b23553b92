"""Detectors for short PUCCH-style blocks.

ML family (exhaustive over the 2**K candidates):

``noncoherent``     sum_i |x^H y_i|^2
``full-ec``         pilot energy + non-coherent data energy + 2 Re(pilot x data)
``quasi-coherent``  only the cross term, i.e. correlation against an LS estimate

Block receivers (``fht-block`` / ``ht-block``) combine antennas with the LS
estimate, demap to soft bits and decode each RM(1, m) sub-block by maximum
Hadamard correlation.

Under frequency-selective channels all statistics are formed per flatness
region (one PRB in one OFDM symbol) and summed over regions and antennas.
Passing ``regions=None`` to the single-candidate metrics uses one region for
the whole frame, which is the textbook form.

All ties resolve to the smallest message index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import numpy as np

from . import _kernels
from .errors import CapacityError, ConfigurationError, DimensionError
from .hadamard import decode_correlations, fast_transform, naive_transform
from .phy_frame import (FrameConfig, demap_resources, generate_dmrs, map_resources,
                        qpsk_modulate, qpsk_soft_demodulate, scramble, scrambling_sequence)
from .rm_codes import BLOCK_RM1, CodeConfig, all_messages, bits_to_int, encode, rate_match_repeat

NONCOHERENT = "noncoherent"
FULL_EC = "full-ec"
QUASI_COHERENT = "quasi-coherent"
FHT_BLOCK = "fht-block"
HT_BLOCK = "ht-block"
ML_RECEIVERS = (NONCOHERENT, FULL_EC, QUASI_COHERENT)
BLOCK_RECEIVERS = (FHT_BLOCK, HT_BLOCK)
RECEIVERS = ML_RECEIVERS + BLOCK_RECEIVERS

_METRIC_KIND = {
    NONCOHERENT: _kernels.NONCOHERENT,
    FULL_EC: _kernels.FULL_EC,
    QUASI_COHERENT: _kernels.QUASI_COHERENT,
}

MAX_CANDIDATE_BITS = 16
# complex elements allowed in one (batch, antenna, candidate, region) block
_CHUNK_ELEMENTS = 1 << 22


def transmit_grid(messages, code: CodeConfig, frame: FrameConfig) -> np.ndarray:
    """encode -> repeat -> scramble -> QPSK -> map, for one message or a stack."""
    if code.e != frame.e_bits:
        raise ConfigurationError(
            f"code E={code.e} does not match the {frame.e_bits} bits carried by the frame")
    e = rate_match_repeat(encode(messages, code), code.e)
    d = scrambling_sequence(frame.c_init, code.e, enabled=frame.scrambling)
    data = qpsk_modulate(scramble(e, d))
    return map_resources(data, generate_dmrs(frame), frame).symbols


@dataclass
class CandidateSet:
    """Every modulated hypothesis, row M for message integer M."""

    code: CodeConfig
    frame: FrameConfig
    messages: np.ndarray = field(repr=False)
    grids: np.ndarray = field(repr=False)

    def __len__(self):
        return self.grids.shape[0]

    @cached_property
    def data(self) -> np.ndarray:
        return self.grids[:, self.frame.data_indices]

    @cached_property
    def dmrs(self) -> np.ndarray:
        """Common pilot component as transmitted (beta included)."""
        return self.grids[0, self.frame.dmrs_indices]

    @cached_property
    def constant_energy(self) -> bool:
        energy = np.sum(np.abs(self.grids) ** 2, axis=1)
        return bool(np.allclose(energy, energy[0], rtol=1e-12, atol=0.0))

    @cached_property
    def _data_weights(self) -> np.ndarray:
        # (N_d, C * R): conj(x_d[c, t]) placed in column (c, region(t))
        fr = self.frame
        reg = fr.regions[fr.data_indices]
        w = np.zeros((fr.n_d, len(self), fr.n_regions), dtype=np.complex128)
        w[np.arange(fr.n_d), :, reg] = np.conj(self.data).T
        return w.reshape(fr.n_d, -1)

    @cached_property
    def _pilot_weights(self) -> np.ndarray:
        fr = self.frame
        reg = fr.regions[fr.dmrs_indices]
        w = np.zeros((fr.n_p, fr.n_regions), dtype=np.complex128)
        w[np.arange(fr.n_p), reg] = np.conj(self.dmrs)
        return w

    def correlations(self, ys):
        """Per-region pilot and data correlations.

        Returns ``pil`` of shape ``(B, N_R, R)`` and ``dat`` of shape
        ``(B, N_R, C, R)`` for observations of shape ``(B, N_R, N)``.
        """
        yd, yp = demap_resources(ys, self.frame)
        pil = yp @ self._pilot_weights
        dat = (yd @ self._data_weights).reshape(yd.shape[:-1] + (len(self), self.frame.n_regions))
        return pil, dat


def build_candidates(code: CodeConfig, frame: FrameConfig) -> CandidateSet:
    if code.k > MAX_CANDIDATE_BITS:
        raise CapacityError(f"2^{code.k} candidates exceed the enumeration limit (K <= {MAX_CANDIDATE_BITS})")
    msgs = all_messages(code.k)
    return CandidateSet(code, frame, msgs, transmit_grid(msgs, code, frame))


# ---------------------------------------------------------------------------
# single-candidate metrics


def _check(x, ys):
    x = np.asarray(x)
    ys = np.atleast_2d(np.asarray(ys))
    if ys.shape[-1] != x.shape[-1]:
        raise DimensionError(f"candidate has {x.shape[-1]} REs, observations have {ys.shape[-1]}")
    return x, ys


def _region_inner(x, ys, regions):
    """x_r^H y_{i,r} for every antenna i and region r -> (N_R, R)."""
    prod = np.conj(x) * ys
    if regions is None:
        return prod.sum(axis=-1, keepdims=True)
    regions = np.asarray(regions)
    n_reg = int(regions.max()) + 1
    out = np.zeros(ys.shape[:-1] + (n_reg,), dtype=np.complex128)
    for r in range(n_reg):
        out[..., r] = prod[..., regions == r].sum(axis=-1)
    return out


def metric_noncoherent(x, ys, regions=None) -> float:
    """sum over antennas (and regions) of |x^H y_i|^2."""
    x, ys = _check(x, ys)
    return float(np.sum(np.abs(_region_inner(x, ys, regions)) ** 2))


def _split_terms(x, ys, data_mask, regions):
    data_mask = np.asarray(data_mask, dtype=bool)
    if data_mask.shape[-1] != x.shape[-1]:
        raise DimensionError("data mask length does not match the candidate")
    xp = np.where(data_mask, 0, x)
    xd = np.where(data_mask, x, 0)
    yp = np.where(data_mask, 0, ys)
    yd = np.where(data_mask, ys, 0)
    return _region_inner(xp, yp, regions), _region_inner(xd, yd, regions)


def metric_full_ec(x, ys, data_mask, regions=None) -> float:
    """Pilot term + non-coherent data term + quasi-coherent cross term."""
    x, ys = _check(x, ys)
    p, d = _split_terms(x, ys, data_mask, regions)
    pilot_term = np.sum(np.abs(p) ** 2)
    data_term = np.sum(np.abs(d) ** 2)
    cross_term = 2.0 * np.real(np.sum(p * np.conj(d)))
    return float(pilot_term + data_term + cross_term)


def metric_quasi_coherent(x, ys, data_mask, regions=None) -> float:
    """2 Re sum_i (x_p^H y_p,i)(y_d,i^H x_d); the pilot energy term is dropped."""
    x, ys = _check(x, ys)
    p, d = _split_terms(x, ys, data_mask, regions)
    return float(2.0 * np.real(np.sum(p * np.conj(d))))


def ls_channel_estimate(y_p, x_p, regions=None) -> np.ndarray:
    """h_hat = x_p^H y_p / ||x_p||^2 per antenna and region.

    ``y_p`` has shape ``(..., N_R, N_p)`` (or ``(N_p,)``); the result has one
    trailing entry per region (a single one when ``regions`` is None).
    """
    x_p = np.asarray(x_p)
    y_p = np.asarray(y_p)
    if y_p.shape[-1] != x_p.shape[-1]:
        raise DimensionError(f"pilot lengths differ: {y_p.shape[-1]} vs {x_p.shape[-1]}")
    if regions is None:
        regions = np.zeros(x_p.shape[-1], dtype=np.int64)
    regions = np.asarray(regions)
    n_reg = int(regions.max()) + 1
    onehot = np.zeros((x_p.shape[-1], n_reg))
    onehot[np.arange(x_p.shape[-1]), regions] = 1.0
    energy = (np.abs(x_p) ** 2) @ onehot
    if np.any(energy == 0):
        raise ConfigurationError("pilot energy is zero in at least one region")
    return (y_p @ (np.conj(x_p)[:, None] * onehot)) / energy


# ---------------------------------------------------------------------------
# exhaustive ML


@dataclass
class DetectionResult:
    message: int
    metrics: np.ndarray = field(repr=False)
    receiver: str = ""

    @property
    def bits(self) -> np.ndarray:
        k = int(np.log2(self.metrics.shape[-1]))
        return ((self.message >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)


def _metric_kind(metric: str) -> int:
    try:
        return _METRIC_KIND[metric]
    except KeyError:
        raise ConfigurationError(f"unknown ML metric {metric!r}; use one of {ML_RECEIVERS}") from None


def candidate_metrics(ys, candidates: CandidateSet, metric: str, n0: float | None = None) -> np.ndarray:
    """Metric of every candidate for a batch of observations -> ``(B, C)``."""
    kind = _metric_kind(metric)
    ys = np.asarray(ys, dtype=np.complex128)
    if ys.ndim == 2:
        ys = ys[None]
    if ys.shape[-1] != candidates.frame.n:
        raise DimensionError(f"observations have {ys.shape[-1]} REs, frame has {candidates.frame.n}")
    b, nr = ys.shape[:2]
    c, g = len(candidates), candidates.frame.n_regions
    step = max(1, _CHUNK_ELEMENTS // (nr * c * g))
    out = np.empty((b, c))
    for s in range(0, b, step):
        pil, dat = candidates.correlations(ys[s:s + step])
        if candidates.constant_energy:
            out[s:s + step] = _kernels.candidate_metrics(pil, dat, kind)
        else:
            out[s:s + step] = _energy_corrected(pil, dat, candidates, metric, n0)
    return out


def _energy_corrected(pil, dat, candidates, metric, n0):
    # general form sum_i (2/N0)|x^H y_i| - ||x||^2 / N0 for unequal-energy candidates
    if metric == QUASI_COHERENT:
        raise ConfigurationError("the quasi-coherent metric assumes constant-energy candidates")
    if n0 is None or not n0 > 0:
        raise ConfigurationError("unequal candidate energies need a positive N0")
    nr = pil.shape[1]
    energy = np.sum(np.abs(candidates.grids) ** 2, axis=1)
    mag = np.abs(pil[:, :, None, :] + dat)
    return (2.0 / n0) * mag.sum(axis=(1, 3)) - nr * energy[None, :] / n0


def ml_decode_batch(ys, candidates: CandidateSet, metric: str, n0: float | None = None) -> np.ndarray:
    """Decided message integers for observations of shape ``(B, N_R, N)``."""
    if len(candidates) == 0:
        raise ConfigurationError("empty candidate set")
    return np.argmax(candidate_metrics(ys, candidates, metric, n0), axis=-1)


def ml_decode(ys, candidates: CandidateSet, metric: str, n0: float | None = None) -> DetectionResult:
    """argmax over all candidates for one observation ``(N_R, N)``."""
    if len(candidates) == 0:
        raise ConfigurationError("empty candidate set")
    ys = np.asarray(ys)
    if ys.ndim != 2:
        raise DimensionError("ml_decode expects observations of shape (N_R, N)")
    metrics = candidate_metrics(ys, candidates, metric, n0)[0]
    return DetectionResult(int(np.argmax(metrics)), metrics, metric)


# ---------------------------------------------------------------------------
# block Hadamard receiver


def estimate_channel(ys, frame: FrameConfig) -> np.ndarray:
    """Per-PRB LS estimate for observations ``(..., N_R, N)`` -> ``(..., N_R, R)``."""
    _, yp = demap_resources(ys, frame)
    x_p = map_resources(np.zeros(frame.n_d), generate_dmrs(frame), frame).symbols[frame.dmrs_indices]
    return ls_channel_estimate(yp, x_p, frame.regions[frame.dmrs_indices])


def combine_soft_bits(ys, frame: FrameConfig, code: CodeConfig, h_est) -> np.ndarray:
    """MRC, soft QPSK demap, descramble and fold repetitions -> ``(..., N')``."""
    yd, _ = demap_resources(ys, frame)
    h_est = np.asarray(h_est)
    h_d = h_est[..., frame.regions[frame.data_indices]]
    if h_d.shape[-2:] != yd.shape[-2:]:
        raise DimensionError("channel estimate does not match the observations")
    r = np.sum(np.conj(h_d) * yd, axis=-2)
    soft = qpsk_soft_demodulate(r)
    d = scrambling_sequence(frame.c_init, soft.shape[-1], enabled=frame.scrambling)
    soft = soft * (1.0 - 2.0 * d)
    n = code.n_coded
    reps = -(-soft.shape[-1] // n)
    pad = reps * n - soft.shape[-1]
    if pad:
        soft = np.concatenate([soft, np.zeros(soft.shape[:-1] + (pad,))], axis=-1)
    return soft.reshape(soft.shape[:-1] + (reps, n)).sum(axis=-2)


def fht_receive(ys, frame: FrameConfig, code: CodeConfig, h_est=None, transform: str = "fast") -> np.ndarray:
    """Decoded message bits from the block Hadamard receiver.

    ``ys`` is ``(N_R, N)`` or a batch ``(B, N_R, N)``; ``h_est`` defaults to
    the per-PRB LS estimate.  ``transform="naive"`` evaluates the same
    correlations by direct matrix product.
    """
    if code.scheme != BLOCK_RM1:
        raise ConfigurationError("the Hadamard receiver needs the block-rm1 scheme")
    if transform not in ("fast", "naive"):
        raise ConfigurationError(f"unknown transform {transform!r}")
    ys = np.asarray(ys)
    if h_est is None:
        h_est = estimate_channel(ys, frame)
    soft = combine_soft_bits(ys, frame, code, h_est)
    out = []
    start = 0
    for _, m in code.split:
        block = soft[..., start:start + 2**m]
        if transform == "fast":
            delta = fast_transform(block).values
        else:
            delta = naive_transform(block).values
        bits, _ = decode_correlations(delta)
        out.append(bits)
        start += 2**m
    return np.concatenate(out, axis=-1)


def detect(receiver: str, ys, candidates: CandidateSet | None = None, *,
           frame: FrameConfig | None = None, code: CodeConfig | None = None) -> np.ndarray:
    """Message integers decided by ``receiver`` for a batch ``(B, N_R, N)``."""
    if receiver in ML_RECEIVERS:
        if candidates is None:
            raise ConfigurationError(f"{receiver} needs a candidate set")
        return ml_decode_batch(ys, candidates, receiver)
    if receiver in BLOCK_RECEIVERS:
        if frame is None or code is None:
            raise ConfigurationError(f"{receiver} needs frame and code configs")
        transform = "fast" if receiver == FHT_BLOCK else "naive"
        return bits_to_int(fht_receive(ys, frame, code, transform=transform))
    raise ConfigurationError(f"unknown receiver {receiver!r}; use one of {RECEIVERS}")
