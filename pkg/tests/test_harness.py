import math

import numpy as np
import pytest

from nomamimo.allocation import DWF, EPA, MMIMO, NOMA, PICPA, WF
from nomamimo.config import SystemConfig
from nomamimo.harness import (CSV_FIELDS, DEFAULT_COMBOS, SCHEMA_VERSION,
                              STAT_FIELDS, SweepResult, area_table,
                              check_combos, evaluate_point, paired_drops,
                              read_sweep_csv, run_sweep, summarize,
                              write_sweep_csv)

from oracles import trapezoid_area


@pytest.fixture(scope="module")
def small_sweep():
    return run_sweep(SystemConfig(M=8, K=8), trials=20, master_seed=7)


def test_grid_shape():
    res = run_sweep(SystemConfig(M=64, K=64), combos=[(MMIMO, EPA)], trials=1)
    assert res.K_grid.tolist() == list(range(2, 129, 2))
    assert len(res.K_grid) == 64


def test_mimo_zero_at_full_loading(small_sweep):
    st = small_sweep.stats[(MMIMO, EPA)]
    at_m = small_sweep.K_grid == 8
    assert st["se_mean"][at_m][0] == 0.0 and st["ee_mean"][at_m][0] == 0.0
    for c in [(MMIMO, p) for p in (EPA, PICPA, WF)]:
        assert np.all(small_sweep.stats[c]["se_mean"][small_sweep.K_grid >= 8] == 0)


def test_noma_gap_markers(small_sweep):
    # K = 16 >= 2M - 1 = 15 lies outside the closed form
    st = small_sweep.stats[(NOMA, EPA)]
    assert math.isnan(st["se_mean"][-1])
    assert np.all(np.isfinite(st["se_mean"][:-1]))
    assert np.all(np.isnan(small_sweep.stats[(MMIMO, WF)]["sic_violation_rate"]))


def test_ranges(small_sweep):
    for c in small_sweep.combos:
        st = small_sweep.stats[c]
        ok = np.isfinite(st["se_mean"])
        assert np.all(st["se_stderr"][ok] >= 0)
        assert np.all((st["active_frac"][ok] >= 0) & (st["active_frac"][ok] <= 1))
        assert np.all(st["fairness_mean"][ok] <= 1 + 1e-12)


def test_paired_drops_are_deterministic_and_independent():
    cfg = SystemConfig(M=8, K=4)
    a = paired_drops(cfg, 5, 1)
    b = paired_drops(cfg, 5, 1)
    assert np.array_equal(a.beta, b.beta)
    assert not np.array_equal(a.beta[0], a.beta[1])
    # trial t does not depend on how many trials are drawn
    assert np.array_equal(paired_drops(cfg, 2, 1).beta, a.beta[:2])


def test_combo_validation():
    with pytest.raises(ValueError):
        check_combos([(MMIMO, DWF)])
    with pytest.raises(ValueError):
        check_combos([(NOMA, WF)])
    with pytest.raises(ValueError):
        check_combos([(MMIMO, EPA), (MMIMO, EPA)])
    with pytest.raises(ValueError):
        run_sweep(SystemConfig(M=8, K=8), trials=0)


def test_trials_one_identical_csv(tmp_path):
    cfg = SystemConfig(M=8, K=8)
    for name in ("a.csv", "b.csv"):
        write_sweep_csv(run_sweep(cfg, trials=1, master_seed=3), tmp_path / name)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_threads_do_not_change_output():
    cfg = SystemConfig(M=8, K=8)
    a = run_sweep(cfg, trials=10, master_seed=5, threads=1)
    b = run_sweep(cfg, trials=10, master_seed=5, threads=3)
    for c in a.combos:
        for f in STAT_FIELDS:
            np.testing.assert_array_equal(a.stats[c][f], b.stats[c][f])


def test_csv_round_trip(small_sweep, tmp_path):
    path = tmp_path / "sweep.csv"
    write_sweep_csv(small_sweep, path)
    assert path.read_text().splitlines()[0] == ",".join(CSV_FIELDS)
    back = read_sweep_csv(path)
    assert back.M == 8 and back.combos == small_sweep.combos
    for c in back.combos:
        for f in STAT_FIELDS:
            np.testing.assert_array_equal(back.stats[c][f], small_sweep.stats[c][f])


def test_read_rejects_bad_header(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_sweep_csv(path)


def test_stderr_halves_with_four_times_trials():
    cfg = SystemConfig(M=16, K=8)
    a = evaluate_point(cfg, [(MMIMO, EPA)], 400, 11)[(MMIMO, EPA)]["se_stderr"]
    b = evaluate_point(cfg, [(MMIMO, EPA)], 1600, 11)[(MMIMO, EPA)]["se_stderr"]
    assert b / a == pytest.approx(0.5, rel=0.15)


def test_served_power_count_changes_only_ee():
    base = SystemConfig(M=16, K=16)
    served = SystemConfig(M=16, K=16, power_count="served")
    a = evaluate_point(base.with_devices(12), [(MMIMO, WF)], 50, 1)[(MMIMO, WF)]
    b = evaluate_point(served.with_devices(12), [(MMIMO, WF)], 50, 1)[(MMIMO, WF)]
    assert a["se_mean"] == b["se_mean"]
    assert b["ee_mean"] > a["ee_mean"]


def test_tau_drives_se_to_zero():
    cfg = SystemConfig(M=64, K=64, T_symbols=32)
    res = run_sweep(cfg, combos=[(NOMA, EPA)], trials=5, K_grid=[8, 16, 24, 32])
    se = res.stats[(NOMA, EPA)]["se_mean"]
    assert se[-1] == 0.0 and np.all(np.diff(se[1:]) < 0)


def _synthetic(factor):
    K = np.arange(2, 17, 2)
    rho = K / 8
    base = {"se_mean": rho * (2 - rho) * 10, "ee_mean": rho * (2 - rho) * 0.1}
    stats = {}
    for system, pol, f in [(MMIMO, EPA, 1.0), (NOMA, EPA, factor)]:
        st = {k: np.zeros(K.size) for k in STAT_FIELDS}
        st["se_mean"] = base["se_mean"] * f
        st["ee_mean"] = base["ee_mean"] * f
        stats[(system, pol)] = st
    return SweepResult(M=8, K_grid=K, combos=[(MMIMO, EPA), (NOMA, EPA)], stats=stats)


@pytest.mark.parametrize("factor", [1.0, 2.7])
def test_summary_ratios(factor):
    s = summarize(_synthetic(factor))
    assert s["schema_version"] == SCHEMA_VERSION
    (row,) = s["ratios"]
    assert row["se_ratio"] == pytest.approx(factor, rel=1e-12)
    assert row["ee_ratio"] == pytest.approx(factor, rel=1e-12)
    assert len(s["combos"]) == 2
    assert all(len(rows) == 2 for rows in s["tradeoff"].values())


def test_summary_row_count_and_areas(small_sweep):
    s = summarize(small_sweep)
    assert len(s["combos"]) == len(DEFAULT_COMBOS)
    assert len(s["ratios"]) == 3
    areas = area_table(small_sweep)
    c = (MMIMO, PICPA)
    se = small_sweep.stats[c]["se_mean"]
    expected = trapezoid_area(small_sweep.rho.tolist(), se.tolist(), 8)
    assert areas["MMIMO-PICPA"]["area_se"] == pytest.approx(expected, rel=1e-12)
    meta = s["metadata"]
    for key in ("master_seed", "trials", "config_hash", "pathloss_mode"):
        assert key in meta
