"""Experiment runners: CSV layout, frozen pins, determinism."""

import math

import numpy as np
import pytest

from powergame.efficiency import PacketSuccess, equal_action_utility, solve_all
from powergame.experiments import (
    DEFAULT_SEED,
    fig1_region,
    fig2_dynamics_vs_t,
    fig3_dynamics_vs_lambda,
    fig4_welfare_vs_load,
    fig5_frg_ratio_vs_t,
    fig5_t0_sweep,
    max_supported_players,
)

# hand-derived admissibility coefficients delta / ((k-1) f(b) - delta) for the
# m=2 sweep curves; the stopping-probability sweep's max ratio is coeff*(1-x)/x
LAMBDA_COEFF = {(2, 2): 0.2025525523031779,
                (4, 5): 0.08310097064562912,
                (10, 12): 0.03839441247258262}

# independently bisected horizon-sweep dynamics (dB, 3 decimals) at m=2,
# sigma2=1e-3, p_max=100, eta_min=1
FIG2_DB = {
    (2, 2): {2: 1.143, 10: 5.922, 50: 11.066},
    (4, 5): {2: 0.089, 10: 4.624, 50: 10.417},
    (10, 12): {2: None, 10: 0.174, 50: 5.028},  # None: no admissible spread
}

T0_SWEEP_PINS = {1e-2: None, 1e-1: None, 1e0: None, 1e1: None, 1e2: None,
                 1e3: None, 1e4: 9620, 1e5: 2708, 1e6: 2526, 1e7: 2509,
                 1e8: 2508}

FIG5_LIMIT = 7.021443244752927
FIG5_T0 = 44


def _read_lines(path):
    with open(path) as fh:
        return fh.read().splitlines()


def test_fig1_small_grid_marks_and_flags(tmp_path):
    res = fig1_region(region_path=str(tmp_path / "region.csv"),
                      points_path=str(tmp_path / "points.csv"),
                      points_per_axis=60, hull_bins=12)
    lines = _read_lines(res.region_path)
    assert lines[0].startswith("# experiment: fig1_region")
    assert lines[2] == "# seed: none"
    assert lines[4] == "p1,p2,u1_norm,u2_norm"
    assert len(lines) == 5 + 60 * 60

    kinds = [p.kind for p in res.points]
    assert kinds == ["ne", "se", "op", "welfare_max"]
    assert not any(p.saturated for p in res.points)
    assert res.op_dominates_ne and res.op_within_one_cell
    assert res.convexity_ratio > 0.9
    plines = _read_lines(res.points_path)
    assert plines[4] == "kind,p1,p2,u1_norm,u2_norm,saturated"
    assert len(plines) == 5 + 4


def test_fig2_matches_the_closed_form_boundary(tmp_path):
    sigma2, p_max, eta_min = 1e-3, 100.0, 1.0
    t_grid = (2, 10, 50)
    res = fig2_dynamics_vs_t(csv_path=str(tmp_path / "fig2.csv"), t_grid=t_grid)
    assert len(res.rows) == 9
    model = PacketSuccess(2)
    by_curve = {}
    for row in res.rows:
        by_curve.setdefault((row.k, row.n), {})[row.x] = row
        # closed form: the bound ratio equals t at the admissibility edge
        sinrs = solve_all(model, row.k, row.n)
        f_b = model.value(sinrs.beta_star)
        dev = f_b / sinrs.beta_star
        q = f_b / (sinrs.beta_star
                   * ((row.k - 1) * p_max * eta_min + sigma2))
        phi_ne = equal_action_utility(model, sinrs.beta_star, row.k, row.n)
        phi_op = equal_action_utility(model, sinrs.gamma_tilde, row.k, row.n)
        edge = (row.x * phi_ne + phi_op) / (dev + row.x * q)
        if edge < 1.0:
            assert not row.admissible
            assert row.ratio_max == 1.0 and row.dynamics_db == 0.0
        else:
            assert row.admissible
            np.testing.assert_allclose(row.ratio_max, edge, rtol=1e-9)
            np.testing.assert_allclose(row.dynamics_db,
                                       10.0 * math.log10(row.ratio_max),
                                       rtol=1e-12)
    # frozen three-decimal pins and the curve ordering
    for (k, n), per_t in FIG2_DB.items():
        for t, db in per_t.items():
            row = by_curve[(k, n)][t]
            if db is None:
                assert not row.admissible
            else:
                assert round(row.dynamics_db, 3) == db
    for t in t_grid:
        assert by_curve[(2, 2)][t].dynamics_db >= by_curve[(4, 5)][t].dynamics_db
        assert by_curve[(4, 5)][t].dynamics_db >= by_curve[(10, 12)][t].dynamics_db


def test_fig3_matches_the_scale_free_closed_form(tmp_path):
    grid = (0.05, 0.15)
    res = fig3_dynamics_vs_lambda(csv_path=str(tmp_path / "fig3.csv"),
                                  lambda_grid=grid)
    assert len(res.rows) == 6
    for row in res.rows:
        edge = LAMBDA_COEFF[(row.k, row.n)] * (1.0 - row.x) / row.x
        if edge < 1.0:
            assert not row.admissible and row.ratio_max == 1.0
        else:
            assert row.admissible
            np.testing.assert_allclose(row.ratio_max, edge, rtol=1e-9)
    flags = {(r.k, r.n, r.x): r.admissible for r in res.rows}
    assert flags[(2, 2, 0.05)] and flags[(4, 5, 0.05)]
    assert not flags[(10, 12, 0.05)]
    assert flags[(2, 2, 0.15)]
    assert not flags[(4, 5, 0.15)] and not flags[(10, 12, 0.15)]


def test_fig4_small_run_rows_and_skips(tmp_path):
    res = fig4_welfare_vs_load(csv_path=str(tmp_path / "fig4.csv"), n=16,
                               m_values=(10,), k_grids={10: range(2, 7)},
                               replicas=200)
    assert [r.k for r in res.rows] == [2, 3, 4, 5]
    assert len(res.skipped) == 1 and res.skipped[0][:2] == (10, 6)
    beta = solve_all(PacketSuccess(10), 2, 16).beta_star
    for row in res.rows:
        assert row.alpha == row.k / 16
        assert row.op_gain_mean > 0.0
        assert row.op_gain_stderr < 1e-15  # cooperation gain is draw-independent
        assert row.se_gain_mean > 0.0
        assert row.se_gain_stderr > 0.0
        np.testing.assert_allclose(row.alpha_max, 1.0 / beta + 1.0 / 16,
                                   rtol=1e-12)
    lines = _read_lines(res.csv_path)
    assert lines[2] == f"# seed: {DEFAULT_SEED}"
    assert lines[4].startswith("m,k,alpha,")


def test_fig4_string_keyed_grids_accepted(tmp_path):
    # JSON-sourced configs arrive with string keys
    res = fig4_welfare_vs_load(csv_path=str(tmp_path / "fig4.csv"), n=16,
                               m_values=(10,), k_grids={"10": [2, 3]},
                               replicas=50)
    assert [r.k for r in res.rows] == [2, 3]


def test_max_supported_players_pins():
    assert max_supported_players(PacketSuccess(10), 128) == 36
    assert max_supported_players(PacketSuccess(100), 128) == 20


def test_fig5_small_run_shape_and_routes(tmp_path):
    res = fig5_frg_ratio_vs_t(csv_path=str(tmp_path / "fig5.csv"), replicas=40,
                              t_multiples=(1, 2, 5, 10))
    assert res.t0 == FIG5_T0
    np.testing.assert_allclose(res.limit_ratio, FIG5_LIMIT, rtol=1e-12)
    first = res.rows[0]
    assert first.no_window and first.cooperation_stages == 0
    assert first.ratio_mean == 1.0 and first.ratio_stderr == 0.0
    ratios = [r.ratio_mean for r in res.rows]
    assert ratios == sorted(ratios)
    assert all(1.0 <= r <= FIG5_LIMIT for r in ratios)
    for row in res.rows:
        # the engine-rate route and the utility-factor route are the same
        # weighted mean up to rounding
        np.testing.assert_allclose(row.formula_ratio_mean, row.ratio_mean,
                                   rtol=1e-12)


def test_t0_sweep_reports_frozen_decades(tmp_path):
    res = fig5_t0_sweep(csv_path=str(tmp_path / "sweep.csv"))
    got = {r.eta_min: r.t0 for r in res.rows}
    assert got == T0_SWEEP_PINS
    assert not res.any_match
    np.testing.assert_allclose(res.implied_eta_min, 61101.23596963902, rtol=1e-6)
    lines = _read_lines(res.csv_path)
    assert lines[4] == "eta_min,t0,matches_target"
    # missing bounds serialize as empty cells, booleans as 0/1
    assert lines[5].split(",")[1] == ""
    assert lines[-1].split(",")[2] == "0"


def test_rng_free_experiments_are_byte_identical(tmp_path):
    a = fig2_dynamics_vs_t(csv_path=str(tmp_path / "a.csv"), t_grid=(2, 5))
    b = fig2_dynamics_vs_t(csv_path=str(tmp_path / "b.csv"), t_grid=(2, 5))
    assert open(a.csv_path, "rb").read() == open(b.csv_path, "rb").read()


def test_seeded_experiments_are_byte_identical(tmp_path):
    kw = dict(n=16, m_values=(10,), k_grids={10: [2, 3]}, replicas=100)
    a = fig4_welfare_vs_load(csv_path=str(tmp_path / "a.csv"), **kw)
    b = fig4_welfare_vs_load(csv_path=str(tmp_path / "b.csv"), **kw)
    assert open(a.csv_path, "rb").read() == open(b.csv_path, "rb").read()
    c = fig4_welfare_vs_load(csv_path=str(tmp_path / "c.csv"), seed=99, **kw)
    assert open(a.csv_path, "rb").read() != open(c.csv_path, "rb").read()


def test_worker_count_does_not_change_the_output(tmp_path):
    kw = dict(replicas=30, t_multiples=(1, 2, 5))
    a = fig5_frg_ratio_vs_t(csv_path=str(tmp_path / "w1.csv"), workers=1, **kw)
    b = fig5_frg_ratio_vs_t(csv_path=str(tmp_path / "w3.csv"), workers=3, **kw)
    assert open(a.csv_path, "rb").read() == open(b.csv_path, "rb").read()


def test_fig4_worker_count_does_not_change_the_output(tmp_path):
    kw = dict(n=16, m_values=(10,), k_grids={10: [2, 3, 4]}, replicas=60)
    a = fig4_welfare_vs_load(csv_path=str(tmp_path / "w1.csv"), workers=1, **kw)
    b = fig4_welfare_vs_load(csv_path=str(tmp_path / "w2.csv"), workers=2, **kw)
    assert open(a.csv_path, "rb").read() == open(b.csv_path, "rb").read()
