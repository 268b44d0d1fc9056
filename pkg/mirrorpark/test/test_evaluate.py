import json
import pytest
import numpy as np
import pandas as pd
from mirrorpark.scenario.grid import grid_cases
from mirrorpark.dynamics.bicycle import VehicleState, X, Y, THETA
from mirrorpark.evaluate.criteria import assess, margins
from mirrorpark.evaluate.sweep import (SweepReport, OUTCOME_COLUMNS, aggregate, stratified,
                                       run_sweep, load_report, case_key)
import mirrorpark.evaluate.sweep as sweep
from mirrorpark.evaluate.odd import extract_odd, odd_table
from mirrorpark.evaluate.report import emit_report
from mirrorpark.test.baseline import nominal

import logging
log = logging.getLogger()


def parked(scenario, dtheta=0.0):
    pose = scenario.target_pose
    return VehicleState(x=pose.x, y=pose.y, theta=pose.theta + dtheta).array()[None, :]


def outcome_rows(success, **values):
    """ outcome table with one row per success flag in the same cell """
    n = len(success)
    df = pd.DataFrame(dict(kind="reverse", RW=6.0, SL=4.82, SW=2.9, theta0=0.0, y0=2.0, y1=3.165,
                           success=success, reason="parked", switches=1, duration_s=10.0,
                           replans=1, mean_plan_ms=50.0), index=range(n))
    for k, v in values.items():
        df[k] = v
    return df[OUTCOME_COLUMNS]


##### criteria #################################################################

def test_parallel_centred_margins(config):
    s = nominal("parallel", config, SL=4.82)
    m = margins(s.target_pose, s)
    assert m["M_f"] == pytest.approx(0.5)
    assert m["M_r"] == pytest.approx(0.5)
    assert m["M_e"] == pytest.approx(1.25 - 0.835)
    report = assess(parked(s), s, config)
    assert report.passed
    assert report.as_dict()["pass"]


@pytest.mark.parametrize("kind", ["reverse", "angle"])
def test_bay_margins(config, kind):
    s = nominal(kind, config, SW=2.9)
    m = margins(s.target_pose, s)
    assert set(m) == {"M_fr", "M_fl", "M_rl", "M_rr", "M_e"}
    for c in ["M_fr", "M_fl", "M_rl", "M_rr"]:
        assert m[c] == pytest.approx((2.9 - 1.67) / 2)
    assert m["M_e"] == pytest.approx(0.5)
    assert assess(parked(s), s, config).passed


def test_margins_sum(config):
    s = nominal("parallel", config, SL=6.2)
    pose = s.target_pose.shifted(0.37, 0.0)
    m = margins(pose, s)
    assert m["M_f"] + m["M_r"] == pytest.approx(6.2 - s.vehicle.length, abs=1e-9)


def test_heading_error_fails(config):
    s = nominal("reverse", config)
    report = assess(parked(s, np.radians(4)), s, config)
    assert report.heading_error_deg == pytest.approx(4.0)
    assert not report.passed
    assert "heading" in report.failures()


def test_duration_fails(config):
    s = nominal("reverse", config)
    report = assess(parked(s), s, config, duration=181.0)
    assert not report.passed
    assert report.failures() == ["duration"]


def test_bay_margin_threshold(config):
    # 0.05 m clearance is enough for a parallel slot but not for a bay
    s = nominal("reverse", config, SW=1.77)
    assert not assess(parked(s), s, config).margins_ok


def test_collision_in_trace_fails(config):
    s = nominal("reverse", config)
    trace = np.vstack([VehicleState(x=s.target_pose.x + 1.5, y=2.0, theta=-np.pi / 2).array(),
                       parked(s)])
    report = assess(trace, s, config)
    assert not report.collision_free
    assert not report.passed


def test_outside_slot_fails(config):
    s = nominal("reverse", config)
    trace = VehicleState.from_pose(s.initial_pose).array()[None, :]
    report = assess(trace, s, config)
    assert not report.inside_slot


def test_frame_invariance(config, scenario):
    rng = np.random.default_rng(1)
    trace = np.repeat(parked(scenario), 5, axis=0)
    trace[:, [X, Y]] += rng.normal(0, 0.02, (5, 2))
    trace[:, THETA] += rng.normal(0, 0.01, 5)
    moved = trace.copy()
    moved[:, X] += 5.0
    moved[:, Y] -= 3.0
    a = assess(trace, scenario, config).as_dict()
    b = assess(moved, scenario.shifted(5.0, -3.0), config).as_dict()
    assert a.keys() == b.keys()
    for k in a:
        if isinstance(a[k], bool):
            assert a[k] == b[k]
        else:
            assert b[k] == pytest.approx(a[k])


##### aggregation and ODD ######################################################

def test_aggregate_single_case():
    df = outcome_rows([True])
    agg = aggregate(df)
    assert agg["cases"] == 1
    assert agg["success_rate"] == 1.0
    assert agg["mean_switches"] == 1.0
    assert agg["mean_duration_s"] == 10.0


def test_aggregate_empty():
    agg = aggregate(pd.DataFrame(columns=OUTCOME_COLUMNS))
    assert agg["cases"] == 0
    assert agg["success_rate"] == 0.0


@pytest.mark.parametrize("passes, included", [(20, True), (19, True), (18, False), (0, False)])
def test_odd_threshold(passes, included):
    df = outcome_rows([True] * passes + [False] * (20 - passes))
    odd = extract_odd(df)
    assert (len(odd) == 1) == included


def test_odd_cells():
    df = pd.concat([outcome_rows([True] * 3), outcome_rows([False] * 2, theta0=10.0)],
                   ignore_index=True)
    table = odd_table(df)
    assert len(table) == 2
    assert extract_odd(df) == [("reverse", 4.8, 2.9, 0.0, 2.0)]
    assert extract_odd(df.iloc[:0]) == []


def test_stratified(config):
    grid = grid_cases("parallel", config, dict(RW=4.5, SL=[6.0, 6.5], THETA0=[0, 10],
                                               Y0=[1.6, 2.0, 2.4]))
    a = stratified(grid, 4, seed=3)
    assert len(a) == 4
    assert a == stratified(grid, 4, seed=3)
    assert stratified(grid, 100) == list(range(len(grid)))
    # both slot lengths are represented
    assert {grid[i].SL for i in a} == {6.0, 6.5}


##### sweep ####################################################################

@pytest.fixture()
def fake_case(monkeypatch):
    """ replace closed loop parking with a rule on y0 """
    calls = []

    def evaluate_case(scenario, config):
        calls.append(scenario.key)
        ok = scenario.y0 >= 2.0
        row = dict(**scenario.record(), success=ok, reason="parked" if ok else "timeout",
                   switches=2, duration_s=20.0, replans=2, mean_plan_ms=0.0)
        trace = None if ok else np.tile(VehicleState.from_pose(scenario.initial_pose).array(),
                                        (3, 1))
        return row, trace

    monkeypatch.setattr(sweep, "evaluate_case", evaluate_case)
    return calls


@pytest.fixture()
def small_grid(config):
    return grid_cases("reverse", config, dict(RW=6.0, SW=2.9, THETA0=[0, 10], Y0=[1.6, 2.0]))


def test_run_sweep(config, small_grid, fake_case, tmp_path):
    config.update(JOBS=1)
    report = run_sweep(small_grid, config, out=str(tmp_path))
    assert len(report.outcomes) == 4
    assert report.aggregates["success_rate"] == 0.5
    assert report.aggregates["total"] == 4
    assert sorted(report.traces) == [0, 2]
    assert len(fake_case) == 4
    assert (tmp_path / "outcomes.csv").exists()

    # second run resumes from outcomes.csv
    again = run_sweep(small_grid, config, out=str(tmp_path))
    assert len(fake_case) == 4
    assert list(again.outcomes.success) == list(report.outcomes.success)


def test_run_sweep_sample(config, small_grid, fake_case):
    config.update(JOBS=1, SAMPLE=2)
    report = run_sweep(small_grid, config)
    assert len(report.outcomes) == 2
    assert [case_key(r) for r in report.outcomes.to_dict("records")] == \
        [s.key for s in small_grid][:2]


def test_load_report(config, small_grid, fake_case, tmp_path):
    config.update(JOBS=1)
    report = run_sweep(small_grid, config, out=str(tmp_path))
    loaded = load_report(str(tmp_path / "outcomes.csv"))
    assert loaded.aggregates == aggregate(report.outcomes)
    assert loaded.odd_set == report.odd_set


##### report files #############################################################

def test_emit_empty_report(tmp_path):
    report = SweepReport(outcomes=pd.DataFrame(columns=OUTCOME_COLUMNS),
                         aggregates=aggregate(pd.DataFrame(columns=OUTCOME_COLUMNS)))
    paths = emit_report(report, str(tmp_path))
    assert len(paths) == 3
    assert pd.read_csv(tmp_path / "outcomes.csv").empty
    assert json.loads((tmp_path / "aggregates.json").read_text())["cases"] == 0
    assert (tmp_path / "odd.svg").read_text().startswith("<?xml")


def test_emit_report_stable(config, small_grid, fake_case, tmp_path):
    config.update(JOBS=1)
    report = run_sweep(small_grid, config)
    emit_report(report, str(tmp_path / "a"))
    emit_report(report, str(tmp_path / "b"))
    for name in ["outcomes.csv", "aggregates.json", "odd.svg", "trajectories/0.svg"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert len(pd.read_csv(tmp_path / "a" / "outcomes.csv")) == 4
