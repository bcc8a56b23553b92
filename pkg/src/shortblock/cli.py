"""Command-line front end: ``simulate``, ``gap`` and ``codec-bench``."""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace

import numpy as np

from . import _accel
from .errors import ShortBlockError
from .hadamard import fast_transform, naive_transform
from .harness import (SimConfig, emit_csv, estimate_gap_at_bler, parse_snr_grid, read_bler_csv,
                      run_bler_sweep)


def _config_from_args(args) -> SimConfig:
    cfg = SimConfig.from_json(args.config) if args.config else SimConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.receivers:
        cfg = replace(cfg, receivers=tuple(r.strip() for r in args.receivers.split(",") if r.strip()))
    if args.snr:
        cfg = replace(cfg, snr_db=parse_snr_grid(args.snr))
    if args.trials is not None:
        cfg = replace(cfg, trials=args.trials)
    if args.payload is not None:
        cfg = replace(cfg, payload=args.payload)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    if args.beta is not None:
        cfg = cfg.with_frame(beta=args.beta)
    if args.antennas is not None:
        cfg = cfg.with_channel(antennas=args.antennas)
    if args.channel is not None:
        cfg = cfg.with_channel(model=args.channel)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    t0 = time.perf_counter()
    table = run_bler_sweep(cfg, progress=args.verbose)
    logging.getLogger(__name__).info("sweep finished in %.1f s", time.perf_counter() - t0)
    if args.out:
        emit_csv(table, args.out)
    else:
        print(",".join(("snr_db", "receiver", "trials", "errors", "bler", "ci95")))
        for r in table.rows:
            print(f"{r.snr_db:g},{r.receiver},{r.trials},{r.errors},{r.bler:.6g},{r.ci95:.3g}")
    return 0


def cmd_gap(args) -> int:
    table = read_bler_csv(args.inp)
    table_b = read_bler_csv(args.in_b) if args.in_b else None
    report = estimate_gap_at_bler(table, args.a, args.b, args.target, table_b=table_b)
    if args.out:
        emit_csv(report, args.out)
    print("pair,target_bler,snr_a_db,snr_b_db,gap_db")
    print(f"{report.pair},{report.target_bler:g},{report.snr_a_db:.4f},{report.snr_b_db:.4f},{report.gap_db:.4f}")
    return 0


def cmd_codec_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    u = rng.standard_normal((args.reps, 2**args.m))
    fast_transform(u[:1])
    naive_transform(u[:1])
    t0 = time.perf_counter()
    fast = fast_transform(u)
    t_fast = time.perf_counter() - t0
    t0 = time.perf_counter()
    naive = naive_transform(u)
    t_naive = time.perf_counter() - t0
    err = float(np.max(np.abs(fast.values - naive.values)))
    print(f"backend={_accel.backend()} m={args.m} n={2**args.m} reps={args.reps}")
    print(f"fast : ops/vector={fast.ops} wall={t_fast * 1e6 / args.reps:.2f} us/vector")
    print(f"naive: ops/vector={naive.ops} wall={t_naive * 1e6 / args.reps:.2f} us/vector")
    print(f"ops ratio={naive.ops / fast.ops:.2f} max|fast-naive|={err:.3g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shortblock", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="BLER vs SNR Monte Carlo sweep")
    s.add_argument("--config", help="JSON configuration file")
    s.add_argument("--out", help="CSV output path (stdout if omitted)")
    s.add_argument("--seed", type=int)
    s.add_argument("--receivers", help="comma separated receiver ids")
    s.add_argument("--snr", help="start:stop:step in dB")
    s.add_argument("--trials", type=int)
    s.add_argument("--beta", type=float, help="DMRS amplitude scale")
    s.add_argument("--antennas", type=int)
    s.add_argument("--payload", type=int, help="payload bits K")
    s.add_argument("--channel", choices=("los", "tdlc"))
    s.add_argument("--workers", type=int, help="parallel worker processes")
    s.set_defaults(func=cmd_simulate)

    g = sub.add_parser("gap", help="SNR gap between two receivers at a target BLER")
    g.add_argument("--in", dest="inp", required=True, help="BLER CSV from simulate")
    g.add_argument("--in-b", help="second CSV holding receiver b (defaults to --in)")
    g.add_argument("--a", required=True)
    g.add_argument("--b", required=True)
    g.add_argument("--target", type=float, default=0.01)
    g.add_argument("--out", help="write the gap report as CSV")
    g.set_defaults(func=cmd_gap)

    b = sub.add_parser("codec-bench", help="fast vs naive Hadamard transform cost")
    b.add_argument("--m", type=int, default=5)
    b.add_argument("--reps", type=int, default=1000)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_codec_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ShortBlockError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
