"""Efficiency families and the characteristic SINR solvers."""

import math

import numpy as np
import pytest

from powergame.efficiency import (
    CharacteristicSinrs,
    InfoTheoretic,
    PacketSuccess,
    UniquenessRiskWarning,
    check_op_condition,
    equal_action_utility,
    leader_coefficient,
    solve_all,
    solve_beta_star,
    solve_gamma_star,
    solve_gamma_tilde,
)
from powergame.errors import NoNashEquilibriumError

# independent oracle: beta_star of PacketSuccess(m) is the root of e^x = m*x + 1
BETA_STAR_PKT = {
    2: 1.2564312086261697,
    10: 3.6149504270875306,
    100: 6.474600379589358,
}


def _oracle_beta_star_pkt(m: int) -> float:
    # plain bisection on e^x - m*x - 1, nothing shared with the library solver
    lo, hi = 1e-9, 64.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.exp(mid) - m * mid - 1.0 > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _residual(model, x: float, coeff: float) -> float:
    # x*(1 - coeff*x)*f'(x) - f(x); zero in the limit at the boundary root x = 0
    if x == 0.0:
        return 0.0
    return x * (1.0 - coeff * x) * model.deriv(x) - model.value(x)


def _assert_derivs_match_finite_differences(model, x):
    # step sizes balance truncation against roundoff per derivative order
    h1, h2 = 6e-6 * x, 2e-4 * x
    fd1 = (model.value(x + h1) - model.value(x - h1)) / (2 * h1)
    fd2 = (model.value(x + h2) - 2 * model.value(x) + model.value(x - h2)) / h2**2
    np.testing.assert_allclose(model.deriv(x), fd1, rtol=1e-6, atol=1e-10)
    np.testing.assert_allclose(model.deriv(x, order=2), fd2, rtol=1e-4, atol=1e-7)


def test_packet_success_derivs_match_finite_differences():
    rng = np.random.default_rng(3)
    _assert_derivs_match_finite_differences(PacketSuccess(7),
                                            rng.uniform(0.2, 6.0, size=40))


def test_info_theoretic_derivs_match_finite_differences():
    rng = np.random.default_rng(4)
    _assert_derivs_match_finite_differences(InfoTheoretic.from_c(0.8),
                                            rng.uniform(0.2, 6.0, size=40))


def test_dlog_and_curvature_agree_with_raw_ratios():
    x = np.linspace(0.3, 5.0, 25)
    for model in (PacketSuccess(3), InfoTheoretic(1.2)):
        np.testing.assert_allclose(model.dlog(x), model.deriv(x) / model.value(x),
                                   rtol=1e-12)
        np.testing.assert_allclose(model.curvature_ratio(x),
                                   model.deriv(x, 2) / model.deriv(x, 1),
                                   rtol=1e-11)


def test_dlog_survives_value_underflow():
    # f underflows to 0 at tiny SINR with large m, but f'/f stays finite
    model = PacketSuccess(100)
    x = 1e-12
    assert model.value(x) == 0.0
    assert np.isfinite(model.dlog(x)) and model.dlog(x) > 0.0


def test_zero_sinr_gives_zero_efficiency():
    assert PacketSuccess(2).value(0.0) == 0.0
    assert InfoTheoretic(1.0).value(0.0) == 0.0


def test_scalar_in_scalar_out_array_in_array_out():
    model = PacketSuccess(2)
    assert isinstance(model.value(1.0), float)
    assert isinstance(model.value(np.array([1.0, 2.0])), np.ndarray)


def test_constructor_validation():
    with pytest.raises(ValueError):
        PacketSuccess(0)
    with pytest.raises(ValueError):
        PacketSuccess(2).deriv(0.0)
    with pytest.raises(ValueError):
        InfoTheoretic(-1.0)
    with pytest.raises(ValueError):
        InfoTheoretic.from_c(0.0)
    with pytest.raises(ValueError):
        PacketSuccess(2).value(-0.5)


def test_from_c_round_trip():
    model = InfoTheoretic.from_c(0.5)
    assert math.isclose(model.c, 0.5, rel_tol=1e-15)
    assert math.isclose(model.rate, math.log2(1.5), rel_tol=1e-15)


def test_beta_star_matches_independent_bisection_oracle():
    for m, frozen in BETA_STAR_PKT.items():
        live = _oracle_beta_star_pkt(m)
        assert abs(live - frozen) < 1e-9
        assert abs(solve_beta_star(PacketSuccess(m)) - live) < 1e-10


def test_beta_star_m1_has_no_positive_root():
    # m = 1 efficiency is concave-like: marginal never beats average
    assert solve_beta_star(PacketSuccess(1)) == 0.0
    with pytest.raises(NoNashEquilibriumError):
        solve_all(PacketSuccess(1), 2, 2)


def test_root_residuals_vanish_for_packet_family():
    for m in (1, 2, 10, 100):
        model = PacketSuccess(m)
        for k, n in ((2, 2), (3, 24)):
            b = solve_beta_star(model)
            with pytest.warns(UniquenessRiskWarning) if m == 1 else _nullcontext():
                gt = solve_gamma_tilde(model, k, n)
            gs = solve_gamma_star(model, k, n, b)
            assert abs(_residual(model, b, 0.0)) < 1e-12
            assert abs(_residual(model, gt, (k - 1) / n)) < 1e-12
            if b > 0.0:
                assert abs(_residual(model, gs, leader_coefficient(k, n, b))) < 1e-12


def _nullcontext():
    import contextlib

    return contextlib.nullcontext()


def test_exponential_family_closed_forms():
    rng = np.random.default_rng(11)
    for _ in range(60):
        c = 10.0 ** rng.uniform(-1, 1)
        k = int(rng.integers(1, 11))
        n = int(rng.integers(1, 17))
        if k >= 3 and (k - 2) * c >= n:
            continue
        model = InfoTheoretic.from_c(c)
        b = solve_beta_star(model)
        np.testing.assert_allclose(b, c, rtol=1e-10)
        np.testing.assert_allclose(solve_gamma_tilde(model, k, n, check=False),
                                   c / (1.0 + c * (k - 1) / n), rtol=1e-10)
        a = leader_coefficient(k, n, b)
        np.testing.assert_allclose(solve_gamma_star(model, k, n, b),
                                   c / (1.0 + c * a), rtol=1e-10)


def test_characteristic_sinr_ordering():
    # cooperative < leader < selfish wherever the one-shot equilibrium exists
    for model in (PacketSuccess(2), PacketSuccess(10), InfoTheoretic(1.0)):
        for k, n in ((2, 2), (2, 5), (3, 8), (5, 24)):
            if (k - 1) * solve_beta_star(model) >= n:
                continue
            s = solve_all(model, k, n)
            assert 0.0 < s.gamma_tilde < s.gamma_star < s.beta_star
    s = solve_all(PacketSuccess(2), 1, 1)
    assert s.gamma_tilde == s.beta_star == s.gamma_star


def test_leader_coefficient_infeasibility_raises():
    b = solve_beta_star(PacketSuccess(10))  # about 3.615
    with pytest.raises(NoNashEquilibriumError):
        leader_coefficient(4, 7, b)  # (k-2)*b = 7.23 >= n


def test_equal_action_utility_peaks_at_gamma_tilde():
    for model, k, n in ((PacketSuccess(2), 2, 2), (InfoTheoretic(1.0), 3, 6)):
        gt = solve_gamma_tilde(model, k, n, check=False)
        xs = np.linspace(1e-6, n / (k - 1) * (1 - 1e-6), 4000)
        assert equal_action_utility(model, gt, k, n) >= equal_action_utility(
            model, xs, k, n).max() - 1e-12


def test_single_crossing_scan_finds_the_crossing():
    ok, x0 = check_op_condition(PacketSuccess(2), 2, 2)
    assert ok and x0 is not None and x0 > 0.0
    model = PacketSuccess(2)
    h = model.curvature_ratio(x0) - 2.0 / (2.0 - x0)
    assert abs(h) < 1e-9


def test_single_crossing_scan_vacuous_below_two_players():
    assert check_op_condition(PacketSuccess(2), 1, 4) == (True, None)


def test_uniqueness_warning_when_condition_fails():
    # m = 1 keeps the curvature ratio at -1, so the scan never finds a crossing
    with pytest.warns(UniquenessRiskWarning):
        solve_gamma_tilde(PacketSuccess(1), 2, 2)


def test_characteristic_sinrs_validation():
    with pytest.raises(ValueError):
        CharacteristicSinrs(beta_star=1.0, gamma_star=1.0, gamma_tilde=1.5, k=2, n=2)
    with pytest.raises(ValueError):
        CharacteristicSinrs(beta_star=1.0, gamma_star=0.0, gamma_tilde=0.5, k=2, n=2)
    with pytest.raises(ValueError):
        # gamma_tilde must stay below n/(k-1)
        CharacteristicSinrs(beta_star=5.0, gamma_star=4.0, gamma_tilde=4.5, k=2, n=4)
