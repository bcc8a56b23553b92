import math

import numpy as np
import pytest

from shortblock.channel import ChannelConfig
from shortblock.errors import ConfigurationError, RangeError
from shortblock.harness import (BLER_HEADER, MIN_ERRORS, BlerRow, BlerTable, GapReport, SimConfig, emit_csv,
                                estimate_gap_at_bler, parse_snr_grid, read_bler_csv, run_bler_sweep, run_trial,
                                snr_at_bler, wilson_halfwidth)
from shortblock.phy_frame import FrameConfig

ALL_ML = ("noncoherent", "full-ec", "quasi-coherent")


def small_cfg(**kw):
    base = dict(receivers=ALL_ML, snr_db=(-6.0, -3.0, 0.0), trials=600, block_size=200, seed=11)
    base.update(kw)
    return SimConfig(**base)


def test_parse_snr_grid():
    assert parse_snr_grid("-1:1:0.5") == (-1.0, -0.5, 0.0, 0.5, 1.0)
    assert parse_snr_grid({"start": 0, "stop": 0.9, "step": 0.3}) == (0.0, 0.3, 0.6, 0.9)
    assert parse_snr_grid([3, 1]) == (3.0, 1.0)
    for bad in ("1:2", "0:1:0", "0:1:-1", "2:1:0.5"):
        with pytest.raises(ConfigurationError):
            parse_snr_grid(bad)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SimConfig(trials=0)
    with pytest.raises(ConfigurationError):
        SimConfig(receivers=())
    with pytest.raises(ConfigurationError):
        SimConfig(receivers=("coherent",))
    with pytest.raises(ValueError):
        SimConfig(payload=11, scheme="block-rm1")  # 48 coded bits exceed the 32-bit default frame
    with pytest.raises(ConfigurationError):
        SimConfig.from_dict({"bogus": 1})


def test_config_round_trip(tmp_path):
    import json

    cfg = small_cfg(frame=FrameConfig(prbs=3, beta=1.5), channel=ChannelConfig("los", 4), payload=11,
                    scheme="block-rm1", receivers=("fht-block", "quasi-coherent"))
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert SimConfig.from_json(path) == cfg


def test_run_trial_deterministic():
    cfg = small_cfg()
    assert run_trial(cfg, 123, -3.0) == run_trial(cfg, 123, -3.0)


@pytest.mark.parametrize("model", ["los", "tdlc"])
def test_run_trial_noiseless(model):
    cfg = small_cfg(channel=ChannelConfig(model, 2), receivers=ALL_ML + ("fht-block", "ht-block"),
                    payload=4)
    for i in range(0, 600, 37):
        assert all(run_trial(cfg, i, math.inf).values())


def test_full_ec_flags_match_noncoherent():
    cfg = small_cfg()
    for i in range(200):
        f = run_trial(cfg, i, -6.0)
        assert f["full-ec"] == f["noncoherent"]


def test_run_trial_agrees_with_sweep():
    cfg = small_cfg(trials=200, snr_db=(-4.0,))
    table = run_bler_sweep(cfg)
    errs = {r: 0 for r in cfg.receivers}
    for i in range(200):
        for r, ok in run_trial(cfg, i, -4.0).items():
            errs[r] += not ok
    assert {r.receiver: r.errors for r in table.rows} == errs


def test_noiseless_sweep_is_error_free():
    cfg = small_cfg(trials=1, snr_db=(50.0, math.inf))
    assert all(r.bler == 0 for r in run_bler_sweep(cfg).rows)


@pytest.fixture(scope="module")
def pilot_table():
    cfg = SimConfig(receivers=ALL_ML, snr_db=parse_snr_grid("-10:0:2"), trials=4000, seed=5)
    return run_bler_sweep(cfg)


def test_sweep_monotone_within_ci(pilot_table):
    for rx in pilot_table.receivers():
        rows = [r for r in pilot_table.rows if r.receiver == rx]
        for lo, hi in zip(rows, rows[1:]):
            assert hi.bler <= lo.bler + hi.ci95 + lo.ci95


def test_quasi_coherent_never_better(pilot_table):
    by = {(r.receiver, r.snr_db): r for r in pilot_table.rows}
    for (rx, snr), q in by.items():
        if rx == "quasi-coherent":
            n = by[("noncoherent", snr)]
            assert q.bler >= n.bler - q.ci95 - n.ci95
            assert by[("full-ec", snr)].errors == n.errors


def test_sweep_rows_sorted(pilot_table):
    keys = [(r.receiver, r.snr_db) for r in pilot_table.rows]
    assert keys == sorted(keys)


def test_workers_do_not_change_results(tmp_path):
    cfg = small_cfg(trials=1000, error_target=60, snr_db=(-8.0, -5.0, -2.0))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(run_bler_sweep(cfg), a)
    emit_csv(run_bler_sweep(SimConfig(**{**cfg.__dict__, "workers": 2})), b)
    assert a.read_bytes() == b.read_bytes()


def test_early_stop_floor():
    cfg = small_cfg(trials=5000, error_target=5, snr_db=(-10.0,), receivers=("noncoherent",))
    row = run_bler_sweep(cfg).rows[0]
    assert row.errors >= MIN_ERRORS
    assert row.trials < 5000
    # stopping happens at block granularity, right after the floor is crossed
    assert row.trials % cfg.block_size == 0


def test_wilson_halfwidth_values():
    assert wilson_halfwidth(0, 100) == pytest.approx(1.959964**2 / 100 / 2 / (1 + 1.959964**2 / 100), rel=1e-5)
    assert math.isnan(wilson_halfwidth(0, 0))
    from scipy.stats import binomtest

    lo, hi = binomtest(7, 500).proportion_ci(0.95, method="wilson")
    assert wilson_halfwidth(7, 500) == pytest.approx((hi - lo) / 2, rel=1e-9)


def test_wilson_coverage(rng):
    # rigged link: each trial fails independently with known probability p
    p, n, reps = 0.05, 400, 1000
    errors = rng.binomial(n, p, size=reps)
    phat = errors / n
    z2 = 1.959963984540054**2
    centre = (phat + z2 / (2 * n)) / (1 + z2 / n)
    half = np.array([wilson_halfwidth(int(e), n) for e in errors])
    coverage = np.mean(np.abs(centre - p) <= half)
    assert 0.93 <= coverage <= 0.97


# ------------------------------------------------------------------------- gap

def table_from(points, rx="a", trials=1000):
    return BlerTable([BlerRow(s, rx, trials, round(b * trials)) for s, b in points])


def test_gap_hand_example():
    t = table_from([(0.0, 0.02), (1.0, 0.005)])
    assert snr_at_bler(t, "a", 0.01) == pytest.approx(0.5)


def test_gap_identical_tables():
    t = BlerTable(table_from([(0, 0.3), (1, 0.05), (2, 0.004)], "a").rows
                  + table_from([(0, 0.3), (1, 0.05), (2, 0.004)], "b").rows)
    assert estimate_gap_at_bler(t, "a", "b", 0.01).gap_db == 0.0


def test_gap_sign_and_second_table():
    a = table_from([(0, 0.1), (1, 0.001)], "a")
    b = table_from([(1, 0.1), (2, 0.001)], "b")
    rep = estimate_gap_at_bler(b, "b", "a", 0.01, table_b=a)
    assert rep.gap_db == pytest.approx(1.0)
    assert rep.pair == "b:a"


def test_gap_not_bracketed():
    t = table_from([(0, 0.5), (1, 0.2)])
    with pytest.raises(RangeError) as exc:
        snr_at_bler(t, "a", 0.01)
    assert exc.value.receiver == "a"
    with pytest.raises(RangeError):
        snr_at_bler(table_from([(0, 0.005), (1, 0.001)]), "a", 0.01)
    with pytest.raises(RangeError):
        snr_at_bler(t, "missing", 0.01)


def test_gap_zero_error_point():
    t = table_from([(0, 0.1), (1, 0.0)], trials=1000)
    # zero errors count as half an error: log10(5e-4)
    frac = (-2 + 1) / (math.log10(5e-4) + 1)
    assert snr_at_bler(t, "a", 0.01) == pytest.approx(frac)


# ------------------------------------------------------------------------- csv

def test_csv_header_and_reemission(tmp_path, pilot_table):
    p1, p2 = tmp_path / "1.csv", tmp_path / "2.csv"
    emit_csv(pilot_table, p1)
    emit_csv(read_bler_csv(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().splitlines()[0] == ",".join(BLER_HEADER) == "snr_db,receiver,trials,errors,bler,ci95"
    assert b"\r" not in p1.read_bytes()


def test_csv_empty_table(tmp_path):
    p = tmp_path / "e.csv"
    emit_csv(BlerTable([]), p)
    assert p.read_text() == "snr_db,receiver,trials,errors,bler,ci95\n"


def test_gap_csv(tmp_path):
    p = tmp_path / "g.csv"
    emit_csv(GapReport("quasi-coherent", "noncoherent", 0.01, 1.25, 0.5), p)
    assert p.read_text() == "pair,target_bler,snr_a_db,snr_b_db,gap_db\nquasi-coherent:noncoherent,0.01,1.25,0.5,0.75\n"


def test_csv_unwritable_path(tmp_path):
    with pytest.raises(OSError, match="cannot write"):
        emit_csv(BlerTable([]), tmp_path / "missing" / "x.csv")
