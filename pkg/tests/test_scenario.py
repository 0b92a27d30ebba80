import json
import math

import numpy as np
import pandas as pd
import pytest

from app.core.aggregate import EmpiricalCdf, aggregate, heatmap
from app.core.config import (
    DEFAULT_CONFIG_PATH, load_scenario_config, parse_scenario_config, refresh_config_cache, resolve_threads,
)
from app.core.constellation import user_ecef
from app.core.emit import (
    BOUNDS_FILE, PLOTDATA_DIR, REQUIRED_SUMMARY_KEYS, SELECTION_FILE, SUMMARY_FILE, UNCERTAINTY_FILE,
    emit, read_tables, summarize, write_tables,
)
from app.core.errors import ConfigError, OutputError
from app.core.link_budget import sinr
from app.core.phased_array import array_frame_direction
from app.core.scenario import (
    BOUNDS_COLUMNS, NO_ID, SELECTION_COLUMNS, UNCERTAINTY_COLUMNS, ScenarioResult, build_context,
    city_users, run_scenario, snapshot,
)
from app.models.radio import Boresight
from app.models.scenario import ScenarioConfig

from tests.helpers import short_scenario_config


@pytest.fixture(scope="module")
def short_result():
    return run_scenario(short_scenario_config())


@pytest.fixture(scope="module")
def served(short_result):
    sel = short_result.selection
    return sel[~sel["outage"]]


# --- Aggregation ---

def test_cdf_single_sample():
    cdf = EmpiricalCdf.from_values([4.2])
    assert cdf.count == 1
    for q in (0.0, 0.25, 0.5, 1.0):
        assert cdf.quantile(q) == 4.2


def test_cdf_lower_median_and_steps():
    cdf = EmpiricalCdf.from_values(np.arange(100, 0, -1))
    assert cdf.quantile(0.5) == 50
    assert cdf.quantile(0.0) == 1
    assert cdf.quantile(1.0) == 100
    assert cdf.cdf(50) == pytest.approx(0.5)
    assert cdf.cdf(0) == 0.0
    assert cdf.cdf(1000) == 1.0
    with pytest.raises(ValueError):
        cdf.quantile(1.5)


def test_cdf_ignores_nan():
    cdf = EmpiricalCdf.from_values([1.0, math.nan, 3.0])
    assert cdf.count == 2
    x, y = cdf.series()
    assert list(x) == [1.0, 3.0] and list(y) == [0.5, 1.0]


def test_empty_aggregates():
    empty = pd.DataFrame(columns=["strategy", "sinr_s_db"])
    assert aggregate(empty, "sinr_s_db").is_empty
    assert aggregate(empty, "sinr_s_db").quantile(0.5) is None
    assert aggregate(empty, "sinr_s_db", kind="mean") is None
    assert aggregate(empty, "sinr_s_db", ["strategy"]) == {}
    with pytest.raises(ValueError):
        aggregate(empty, "sinr_s_db", kind="mode")


def test_grouped_aggregate():
    rows = pd.DataFrame({"strategy": ["a", "a", "b", "b", "b"], "v": [1.0, 3.0, 2.0, 4.0, math.nan]})
    means = aggregate(rows, "v", ["strategy"], kind="mean")
    assert means == {"a": 2.0, "b": 3.0}
    medians = aggregate(rows, "v", ["strategy"], kind="median")
    assert medians == {"a": 1.0, "b": 2.0}


def test_heatmap_mean_and_median():
    rows = pd.DataFrame({
        "gamma_deg": [0, 0, 0, 20, 20],
        "inr_th_db": [-12.2, -12.2, -6.0, -12.2, -12.2],
        "v": [1.0, 5.0, 2.0, 3.0, math.nan],
    })
    mean = heatmap(rows, "v", "gamma_deg", "inr_th_db", "mean")
    assert mean.loc[0, -12.2] == 3.0
    assert mean.loc[20, -12.2] == 3.0
    assert math.isnan(mean.loc[20, -6.0])
    median = heatmap(rows, "v", "gamma_deg", "inr_th_db", "median")
    assert median.loc[0, -12.2] == 1.0
    assert heatmap(rows.iloc[:0], "v", "gamma_deg", "inr_th_db").empty


# --- Scenario sweep ---

def test_row_counts(short_result):
    assert len(short_result.bounds) == 4
    assert len(short_result.selection) == 4 * 2 * 4
    assert len(short_result.uncertainty) == 4 * 2 * 2
    assert list(short_result.selection.columns[:len(SELECTION_COLUMNS)]) == SELECTION_COLUMNS
    assert list(short_result.uncertainty.columns[:len(UNCERTAINTY_COLUMNS)]) == UNCERTAINTY_COLUMNS
    assert list(short_result.bounds.columns) == BOUNDS_COLUMNS


def test_austin_always_has_a_primary(short_result):
    assert (short_result.bounds["p_star"] != NO_ID).all()
    assert (short_result.bounds["n_primary"] > 0).all()


def test_sinr_audit(served):
    assert len(served)
    expected = sinr(served["snr_p_db"].to_numpy(), served["inr_p_db"].to_numpy())
    assert np.allclose(expected, served["sinr_p_db"].to_numpy(), atol=1e-9)
    assert (served["sinr_s_db"] <= served["snr_s_db"] + 1e-12).all()


def test_protective_rows_meet_threshold(served):
    protective = served[served["strategy"].str.startswith("protective")]
    assert protective["constraint_met"].all()
    assert (protective["inr_p_db"] <= protective["inr_th_db"]).all()


def test_unconstrained_protective_matches_greedy(short_result):
    sel = short_result.selection
    free = sel[np.isinf(sel["inr_th_db"]) & ~sel["outage"]]
    snr = free[free["strategy"] == "protective_max_snr"]
    assert (snr["s_choice"] == snr["s_greedy_snr"]).all()
    sinr_rows = free[free["strategy"] == "protective_max_sinr"]
    assert (sinr_rows["s_choice"] == sinr_rows["s_greedy_sinr"]).all()


def test_bounds_are_ordered(short_result):
    b = short_result.bounds.dropna(subset=["inr_max_db"])
    assert (b["inr_min_db"] <= b["inr_min_cond_db"]).all()
    assert (b["inr_min_cond_db"] <= b["inr_max_cond_db"]).all()
    assert (b["inr_max_cond_db"] <= b["inr_max_db"]).all()


def test_zero_gamma_matches_protective_max_sinr(short_result):
    unc = short_result.uncertainty
    unc = unc[unc["gamma_deg"] == 0].set_index(["t_s", "inr_th_db"])
    sel = short_result.selection
    pms = sel[sel["strategy"] == "protective_max_sinr"].set_index(["t_s", "inr_th_db"])
    for key, row in unc.iterrows():
        assert row["s_choice"] == pms.loc[key, "s_choice"]
        if row["s_choice"] != NO_ID:
            assert row["guaranteed_sinr_db"] == pytest.approx(pms.loc[key, "sinr_s_db"])
            assert row["p_worst"] == row["p_star"]


def test_robust_counts_shrink_with_gamma(short_result):
    unc = short_result.uncertainty.set_index(["t_s", "inr_th_db", "gamma_deg"])
    for (t, th, gamma), row in unc.iterrows():
        if gamma == 0:
            wider = unc.loc[(t, th, 20.0)]
            assert wider["n_feasible_robust"] <= row["n_feasible_robust"]
            assert wider["candidate_set_size"] >= row["candidate_set_size"]


def test_sweep_is_deterministic(short_result, tmp_path):
    again = run_scenario(short_scenario_config())
    pd.testing.assert_frame_equal(short_result.selection, again.selection)
    pd.testing.assert_frame_equal(short_result.uncertainty, again.uncertainty)
    write_tables(short_result, tmp_path / "a")
    write_tables(again, tmp_path / "b")
    for name in (SELECTION_FILE, UNCERTAINTY_FILE, BOUNDS_FILE):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_worker_pool_matches_serial(short_result):
    parallel = run_scenario(short_scenario_config(), threads=2)
    pd.testing.assert_frame_equal(short_result.selection, parallel.selection)
    pd.testing.assert_frame_equal(short_result.bounds, parallel.bounds)


def test_single_step_when_duration_equals_step():
    result = run_scenario(short_scenario_config(duration_s=30, step_s=30, gammas_deg=[0]))
    assert list(result.bounds["t_s"]) == [0.0]


# --- Output ---

def test_emit_writes_tables_summary_and_plotdata(short_result, tmp_path):
    emit(short_result, tmp_path)
    for name in (SELECTION_FILE, UNCERTAINTY_FILE, BOUNDS_FILE, SUMMARY_FILE):
        assert (tmp_path / name).exists()
    with open(tmp_path / SUMMARY_FILE, encoding="utf-8") as fh:
        summary = json.load(fh)
    r = short_result
    assert summary == summarize(r.config, r.bounds, r.selection, r.uncertainty)
    for key in REQUIRED_SUMMARY_KEYS:
        assert key in summary
    assert "inr_th=-12.2" in summary["fig6"]
    fig6 = pd.read_csv(tmp_path / PLOTDATA_DIR / "fig6__inr_th=-12.2.csv")
    assert list(fig6.columns) == ["x", "y"]
    assert fig6["y"].iloc[-1] == pytest.approx(1.0)


def test_csv_has_no_infinite_db_values(short_result, tmp_path):
    write_tables(short_result, tmp_path)
    sel = pd.read_csv(tmp_path / SELECTION_FILE)
    db_cols = [c for c in sel.columns if c.endswith("_db") and c != "inr_th_db"]
    assert not np.isinf(sel[db_cols].to_numpy(dtype=float)).any()


def test_reread_tables_reproduce_summary(short_result, tmp_path):
    emit(short_result, tmp_path, formats=("csv",))
    bounds, selection, uncertainty = read_tables(tmp_path)
    assert len(selection) == len(short_result.selection)
    summary = summarize(short_result.config, bounds, selection, uncertainty)
    assert summary["fig6"].keys() == summarize(short_result.config, short_result.bounds,
                                              short_result.selection, short_result.uncertainty)["fig6"].keys()


def test_empty_result_writes_headers(tmp_path):
    empty = ScenarioResult(config=short_scenario_config(), bounds=pd.DataFrame(),
                           selection=pd.DataFrame(), uncertainty=pd.DataFrame())
    write_tables(empty, tmp_path)
    header = (tmp_path / SELECTION_FILE).read_text(encoding="utf-8").strip()
    assert header.split(",") == SELECTION_COLUMNS


def test_unwritable_output_directory(short_result, tmp_path):
    blocker = tmp_path / "occupied"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(OutputError) as exc:
        write_tables(short_result, blocker)
    assert "occupied" in str(exc.value)
    with pytest.raises(ConfigError):
        emit(short_result, tmp_path, formats=("xlsx",))
    with pytest.raises(OutputError):
        read_tables(tmp_path / "missing")


# --- Configuration ---

def test_empty_config_takes_defaults():
    config = parse_scenario_config({})
    assert config.num_steps == 2880
    assert config.primary.total_satellites == 4408
    assert config.secondary.total_satellites == 3236


def test_invalid_config_names_the_field():
    with pytest.raises(ConfigError) as exc:
        parse_scenario_config({"step_s": 0})
    assert "step_s" in str(exc.value)
    with pytest.raises(ConfigError):
        parse_scenario_config({"user_arrays": ["big"]})
    with pytest.raises(ConfigError):
        parse_scenario_config({"duration_s": 10, "step_s": 30})


def test_shipped_config_equals_defaults():
    refresh_config_cache()
    assert load_scenario_config(str(DEFAULT_CONFIG_PATH)).model_dump() == ScenarioConfig().model_dump()


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario_config(str(tmp_path / "nope.json"))


def test_seed_phasing_applies_to_both_systems():
    config = parse_scenario_config({"seed_phasing": 3})
    assert config.primary.seed_phasing == 3 and config.secondary.seed_phasing == 3


def test_thread_resolution(monkeypatch):
    assert resolve_threads(2) == 2
    monkeypatch.setenv("COEXSIM_THREADS", "3")
    assert resolve_threads() == 3
    monkeypatch.setenv("COEXSIM_THREADS", "many")
    with pytest.raises(ConfigError):
        resolve_threads()
    monkeypatch.delenv("COEXSIM_THREADS")
    assert resolve_threads() >= 1


def test_snapshot_reports_serving_link():
    config = short_scenario_config()
    ctx = build_context(config)
    dump = snapshot(ctx, config.city("austin"), 60.0)
    view = dump["arrays"]["32x32"]
    assert view["bounds"]["p_star"] in view["primary_visible"]
    link = view["serving_link"]
    assert link["elevation_deg"] >= config.eps_min_deg
    assert 540e3 < link["range_m"] < 1200e3
    assert link["dir_user_frame"][2] > 0
    assert link["dir_sat_frame"][2] > 0
    p_star = view["bounds"]["p_star"]
    sat_pos = ctx.primary.arrays.positions(60.0)[p_star]
    sat_vel = ctx.primary.arrays.velocities(60.0)[p_star]
    user_pos = user_ecef(city_users(config, config.city("austin"), ctx.arrays["32x32"])[0])
    assert link["range_m"] == pytest.approx(float(np.linalg.norm(sat_pos - user_pos)), rel=1e-12)
    expected = array_frame_direction(sat_pos, user_pos, Boresight.nadir, sat_vel)
    assert np.allclose(link["dir_sat_frame"], expected, atol=1e-9)
    assert len(view["selection"]) == 2 * 4
    assert {row["gamma_deg"] for row in view["uncertainty"]} == {0.0, 20.0}
