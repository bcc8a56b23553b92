"""Monte Carlo BLER engine.

Trials are grouped in fixed-size blocks.  Block ``b`` draws its messages,
channel taps and unit-variance noise from a Philox stream keyed by
``SeedSequence(seed, spawn_key=(b,))``, so any trial's randomness depends only
on (seed, trial index).  Every SNR point reuses the same draws (noise is
scaled, not redrawn) and every receiver sees the same observation, which makes
receiver-to-receiver gaps paired comparisons.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .channel import ChannelConfig, apply_channel, draw_channel, snr_to_sigma, standard_complex_noise
from .errors import ConfigurationError, RangeError
from .phy_frame import FrameConfig
from .receivers import (BLOCK_RECEIVERS, ML_RECEIVERS, RECEIVERS, build_candidates, detect)
from .rm_codes import BLOCK_RM1, SCHEMES, CodeConfig

log = logging.getLogger(__name__)

MIN_ERRORS = 50
Z95 = 1.959963984540054
BLER_HEADER = ("snr_db", "receiver", "trials", "errors", "bler", "ci95")
GAP_HEADER = ("pair", "target_bler", "snr_a_db", "snr_b_db", "gap_db")


def parse_snr_grid(spec) -> Tuple[float, ...]:
    """SNR points from ``"start:stop:step"``, a dict with those keys, or a list.

    The stop value is included when it falls on the grid.
    """
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"SNR grid must look like start:stop:step, got {spec!r}")
        start, stop, step = (float(p) for p in parts)
    elif isinstance(spec, dict):
        start, stop, step = float(spec["start"]), float(spec["stop"]), float(spec["step"])
    else:
        points = tuple(float(s) for s in spec)
        if not points:
            raise ConfigurationError("empty SNR list")
        return points
    if not step > 0:
        raise ConfigurationError(f"SNR step must be positive, got {step}")
    if stop < start:
        raise ConfigurationError(f"SNR stop {stop} is below start {start}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 10) for i in range(n))


@dataclass(frozen=True)
class SimConfig:
    payload: int = 4
    scheme: str = "standard32k"
    split: Tuple[Tuple[int, int], ...] | None = None
    frame: FrameConfig = field(default_factory=FrameConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    receivers: Tuple[str, ...] = ("noncoherent", "quasi-coherent")
    snr_db: Tuple[float, ...] = parse_snr_grid("-10:4:0.5")
    trials: int = 100_000
    error_target: int | None = None
    seed: int = 0
    block_size: int = 1000
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if self.block_size < 1:
            raise ConfigurationError("block_size must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if not self.receivers:
            raise ConfigurationError("at least one receiver is required")
        unknown = [r for r in self.receivers if r not in RECEIVERS]
        if unknown:
            raise ConfigurationError(f"unknown receivers {unknown}; choose from {RECEIVERS}")
        if len(set(self.receivers)) != len(self.receivers):
            raise ConfigurationError("duplicate receivers")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown code scheme {self.scheme!r}")
        if not self.snr_db:
            raise ConfigurationError("empty SNR grid")
        if self.error_target is not None and self.error_target < 1:
            raise ConfigurationError("error_target must be positive")
        # validate the codes now rather than inside a worker
        self.ml_code()
        if any(r in BLOCK_RECEIVERS for r in self.receivers):
            self.block_code()

    def ml_code(self) -> CodeConfig:
        """Code used by the transmitter feeding the ML receivers."""
        split = self.split if self.scheme == BLOCK_RM1 else None
        return CodeConfig(self.scheme, self.payload, self.frame.e_bits, split)

    def block_code(self) -> CodeConfig:
        """Block RM(1, m) code used by the Hadamard receivers."""
        split = self.split if self.scheme == BLOCK_RM1 else None
        return CodeConfig(BLOCK_RM1, self.payload, self.frame.e_bits, split)

    @property
    def stop_errors(self) -> int | None:
        if self.error_target is None:
            return None
        return max(int(self.error_target), MIN_ERRORS)

    # -- (de)serialization --------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        data = dict(data)
        kwargs = {}
        if "frame" in data:
            fr = dict(data.pop("frame"))
            if "dmrs_pattern" in fr:
                fr["dmrs_pattern"] = tuple(fr["dmrs_pattern"])
            kwargs["frame"] = FrameConfig(**fr)
        if "channel" in data:
            kwargs["channel"] = ChannelConfig(**data.pop("channel"))
        if "snr" in data:
            kwargs["snr_db"] = parse_snr_grid(data.pop("snr"))
        if "snr_db" in data:
            kwargs["snr_db"] = parse_snr_grid(data.pop("snr_db"))
        if "receivers" in data:
            rxs = data.pop("receivers")
            kwargs["receivers"] = tuple(rxs.split(",") if isinstance(rxs, str) else rxs)
        if data.get("split") is not None:
            kwargs["split"] = tuple(tuple(p) for p in data.pop("split"))
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ConfigurationError(f"unknown configuration keys: {sorted(extra)}")
        kwargs.update(data)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "SimConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["snr_db"] = list(self.snr_db)
        return out

    def with_frame(self, **kw) -> "SimConfig":
        return replace(self, frame=replace(self.frame, **kw))

    def with_channel(self, **kw) -> "SimConfig":
        return replace(self, channel=replace(self.channel, **kw))


# ---------------------------------------------------------------------------
# trial machinery


class _Link:
    """Precomputed transmit tables and candidate sets for one configuration."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.ml_code = cfg.ml_code()
        self.ml_rx = [r for r in cfg.receivers if r in ML_RECEIVERS]
        self.block_rx = [r for r in cfg.receivers if r in BLOCK_RECEIVERS]
        self.ml_candidates = build_candidates(self.ml_code, cfg.frame)
        self.block_code = None
        self.block_grids = None
        if self.block_rx:
            self.block_code = cfg.block_code()
            if self.block_code == self.ml_code:
                self.block_grids = self.ml_candidates.grids
            else:
                self.block_grids = build_candidates(self.block_code, cfg.frame).grids

    def draw(self, block: int):
        cfg = self.cfg
        rng = block_rng(cfg.seed, block)
        b = cfg.block_size
        msgs = rng.integers(0, 2**cfg.payload, size=b)
        gains = draw_channel(rng, cfg.channel, cfg.frame, size=b).gains
        noise = standard_complex_noise(rng, gains.shape)
        return msgs, gains, noise

    def decisions(self, msgs, gains, noise, snr_db: float) -> Dict[str, np.ndarray]:
        """Decided message integers per receiver for one SNR point."""
        cfg = self.cfg
        sigma = math.sqrt(snr_to_sigma(snr_db, cfg.frame))
        out = {}
        if self.ml_rx:
            y = gains * self.ml_candidates.grids[msgs][:, None, :] + sigma * noise
            for r in self.ml_rx:
                out[r] = detect(r, y, self.ml_candidates)
        if self.block_rx:
            y = gains * self.block_grids[msgs][:, None, :] + sigma * noise
            for r in self.block_rx:
                out[r] = detect(r, y, frame=cfg.frame, code=self.block_code)
        return out


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based (Philox) stream for trial block ``block``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(ss))


@lru_cache(maxsize=8)
def _link(cfg: SimConfig) -> _Link:
    return _Link(cfg)


def _block_errors(cfg: SimConfig, block: int, snr_mask: np.ndarray):
    """(errors[n_snr, n_rx], trials) for one block; masked SNR rows stay zero."""
    link = _link(cfg)
    msgs, gains, noise = link.draw(block)
    n = min(cfg.block_size, cfg.trials - block * cfg.block_size)
    msgs, gains, noise = msgs[:n], gains[:n], noise[:n]
    errs = np.zeros((len(cfg.snr_db), len(cfg.receivers)), dtype=np.int64)
    for si, snr in enumerate(cfg.snr_db):
        if not snr_mask[si]:
            continue
        dec = link.decisions(msgs, gains, noise, snr)
        for ri, r in enumerate(cfg.receivers):
            errs[si, ri] = int(np.count_nonzero(dec[r] != msgs))
    return errs, n


def run_trial(cfg: SimConfig, trial_index: int, snr_db: float) -> Dict[str, bool]:
    """Success flag of every receiver on trial ``trial_index`` at ``snr_db``.

    Uses exactly the draws the sweep uses for that trial.
    """
    if not 0 <= trial_index:
        raise ConfigurationError("trial index must be non-negative")
    link = _link(cfg)
    block, row = divmod(int(trial_index), cfg.block_size)
    msgs, gains, noise = link.draw(block)
    sl = slice(row, row + 1)
    dec = link.decisions(msgs[sl], gains[sl], noise[sl], snr_db)
    return {r: bool(dec[r][0] == msgs[row]) for r in cfg.receivers}


# ---------------------------------------------------------------------------
# results


def wilson_halfwidth(errors: int, trials: int, z: float = Z95) -> float:
    if trials <= 0:
        return float("nan")
    p = errors / trials
    denom = 1.0 + z * z / trials
    return z / denom * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))


@dataclass(frozen=True)
class BlerRow:
    snr_db: float
    receiver: str
    trials: int
    errors: int

    @property
    def bler(self) -> float:
        return self.errors / self.trials if self.trials else float("nan")

    @property
    def ci95(self) -> float:
        return wilson_halfwidth(self.errors, self.trials)


@dataclass
class BlerTable:
    rows: List[BlerRow] = field(default_factory=list)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: (r.receiver, r.snr_db))

    def receivers(self) -> List[str]:
        return sorted({r.receiver for r in self.rows})

    def curve(self, receiver: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(snr, bler, trials) arrays of one receiver, sorted by SNR."""
        rows = [r for r in self.rows if r.receiver == receiver]
        return (np.array([r.snr_db for r in rows]), np.array([r.bler for r in rows]),
                np.array([r.trials for r in rows]))


def run_bler_sweep(cfg: SimConfig, progress: bool = False) -> BlerTable:
    n_snr, n_rx = len(cfg.snr_db), len(cfg.receivers)
    n_blocks = -(-cfg.trials // cfg.block_size)
    errors = np.zeros((n_snr, n_rx), dtype=np.int64)
    trials = np.zeros((n_snr, n_rx), dtype=np.int64)
    active = np.ones((n_snr, n_rx), dtype=bool)
    target = cfg.stop_errors
    pool = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for start in range(0, n_blocks, cfg.workers):
            blocks = range(start, min(start + cfg.workers, n_blocks))
            mask = active.any(axis=1)
            if pool is None:
                results = [_block_errors(cfg, b, mask) for b in blocks]
            else:
                results = list(pool.map(_block_errors, [cfg] * len(blocks), blocks, [mask] * len(blocks)))
            # fold in block order so early stopping never depends on scheduling
            for errs, n in results:
                errors[active] += errs[active]
                trials[active] += n
                if target is not None:
                    active &= errors < target
            if progress:
                log.info("blocks %d/%d done", blocks[-1] + 1, n_blocks)
            if not active.any():
                break
    finally:
        if pool is not None:
            pool.shutdown()
    rows = [BlerRow(float(cfg.snr_db[si]), cfg.receivers[ri], int(trials[si, ri]), int(errors[si, ri]))
            for si in range(n_snr) for ri in range(n_rx)]
    return BlerTable(rows)


@dataclass(frozen=True)
class GapReport:
    receiver_a: str
    receiver_b: str
    target_bler: float
    snr_a_db: float
    snr_b_db: float

    @property
    def gap_db(self) -> float:
        return self.snr_a_db - self.snr_b_db

    @property
    def pair(self) -> str:
        return f"{self.receiver_a}:{self.receiver_b}"


def snr_at_bler(table: BlerTable, receiver: str, target: float) -> float:
    """First crossing of ``target``, interpolated linearly in (SNR, log10 BLER).

    A zero-error point on the low side of the crossing is treated as half an
    error so the logarithm stays finite.
    """
    if not 0 < target < 1:
        raise RangeError(f"target BLER must lie in (0, 1), got {target}", receiver)
    snr, bler, n = table.curve(receiver)
    if snr.size == 0:
        raise RangeError(f"no rows for receiver {receiver!r}", receiver)
    if bler[0] <= target:
        raise RangeError(f"{receiver}: BLER already {bler[0]:.3g} <= {target} at the lowest SNR", receiver)
    below = np.flatnonzero(bler <= target)
    if below.size == 0:
        raise RangeError(f"{receiver}: BLER never reaches {target} within the sweep", receiver)
    i = int(below[0])
    hi = math.log10(bler[i - 1])
    lo = math.log10(bler[i] if bler[i] > 0 else 0.5 / n[i])
    frac = (math.log10(target) - hi) / (lo - hi)
    return float(snr[i - 1] + frac * (snr[i] - snr[i - 1]))


def estimate_gap_at_bler(table: BlerTable, receiver_a: str, receiver_b: str, target: float = 0.01,
                         table_b: BlerTable | None = None) -> GapReport:
    """SNR(a) - SNR(b) at equal BLER; ``table_b`` defaults to ``table``."""
    snr_a = snr_at_bler(table, receiver_a, target)
    snr_b = snr_at_bler(table if table_b is None else table_b, receiver_b, target)
    return GapReport(receiver_a, receiver_b, float(target), snr_a, snr_b)


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def emit_csv(obj, path) -> None:
    """Write a BlerTable or one/several GapReports as CSV (LF line ends)."""
    if isinstance(obj, GapReport):
        obj = [obj]
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if isinstance(obj, BlerTable):
                w.writerow(BLER_HEADER)
                for r in obj.rows:
                    w.writerow([_fmt(r.snr_db), r.receiver, r.trials, r.errors, _fmt(r.bler), _fmt(r.ci95)])
            else:
                w.writerow(GAP_HEADER)
                for g in obj:
                    w.writerow([g.pair, _fmt(g.target_bler), _fmt(g.snr_a_db), _fmt(g.snr_b_db), _fmt(g.gap_db)])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_bler_csv(path) -> BlerTable:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != BLER_HEADER:
            raise ConfigurationError(f"{path}: unexpected header {reader.fieldnames}")
        rows = [BlerRow(float(r["snr_db"]), r["receiver"], int(r["trials"]), int(r["errors"]))
                for r in reader]
    return BlerTable(rows)
