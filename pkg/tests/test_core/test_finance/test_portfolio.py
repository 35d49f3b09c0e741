import math

import numpy as np
import pytest

from src.core.finance.data import DefaultSpec, Regime, RegimeSpec, ScaleSweep, Strategy, UtilityEstimate
from src.core.finance.market import build_market
from src.core.finance.portfolio import (
    check_admissible,
    check_self_financing,
    expected_log_utility,
    log_optimal_strategy,
    merton_wealth,
    scale_sweep,
    scaled,
    smallest_credit_line,
    wealth,
)
from src.core.grid_paths.data import PathEnsemble, RngSpec, TimeGrid
from src.core.psit.data import Psit
from src.core.psit.operations import restrict
from src.core.utils.errors import InvalidArgument, PreconditionViolation


def _market(drift=0.1, sigma=0.2, n_paths=200, steps=500, default=None, seed=1):
    spec = RegimeSpec((Regime(drift, sigma),), default or DefaultSpec())
    return build_market(spec, TimeGrid(1.0, steps), 1.0, RngSpec(seed), n_paths)


def _toy_price():
    grid = TimeGrid(1.0, 3)
    psit = Psit(grid, np.array([3]), np.array([True]))
    S = restrict(PathEnsemble(grid, np.array([[1.0, 2.0, 1.0, 3.0]])), psit)
    return psit, S


def test_buy_and_hold_wealth():
    psit, S = _toy_price()
    theta = restrict(PathEnsemble(psit.grid, np.array([[0.0, 1.0, 1.0, 1.0]])), psit)
    X = wealth(theta, S, 10.0)
    assert X.values.tolist() == [[10.0, 10.0, 9.0, 11.0]]
    assert check_self_financing(theta, S, X, 10.0) == 0.0


def test_initial_shares_must_be_zero():
    psit, S = _toy_price()
    theta = restrict(PathEnsemble(psit.grid, np.ones((1, 4))), psit)
    with pytest.raises(PreconditionViolation, match="initial shares"):
        wealth(theta, S, 1.0)


def test_admissibility():
    psit, S = _toy_price()
    theta = restrict(PathEnsemble(psit.grid, np.array([[0.0, 1.0, 1.0, 1.0]])), psit)
    assert check_admissible(theta, S, 1.0).tolist() == [True]
    assert check_admissible(theta, S, 0.5).tolist() == [False]
    assert smallest_credit_line(theta, S).tolist() == [1.0]
    assert check_admissible(theta, S, float(smallest_credit_line(theta, S)[0])).tolist() == [True]
    with pytest.raises(InvalidArgument):
        check_admissible(theta, S, -1.0)


def test_log_optimal_strategy_tracks_merton_wealth():
    market = _market(steps=1000)
    strategy = log_optimal_strategy(market, 1.0)
    closed_form = merton_wealth(market, 1.0)
    assert strategy.theta.values[:, 0].tolist() == [0.0] * market.n_paths
    relative = np.abs(strategy.wealth.values[:, -1] / closed_form.values[:, -1] - 1.0)
    assert np.max(relative) < 5e-2
    assert strategy.fraction == pytest.approx(2.5)
    invested = strategy.invested.values[:, 1:]
    assert np.allclose(invested, 2.5 * strategy.wealth.values[:, 1:], rtol=1e-12)
    assert check_self_financing(strategy.theta, market.S, strategy.wealth, 1.0) <= 1e-12


def test_zero_drift_is_all_cash():
    market = _market(drift=0.0, n_paths=20)
    strategy = log_optimal_strategy(market, 2.0)
    assert not strategy.theta.values.any()
    sweep = scale_sweep(strategy, market, [0.5, 1.0, 2.0])
    assert all(e.estimate == pytest.approx(math.log(2.0)) for e in sweep.estimates)


def test_log_optimal_needs_constant_regime():
    spec = RegimeSpec((Regime(0.1, 0.2), Regime(0.2, 0.2)), DefaultSpec("exponential", rate=1.0))
    market = build_market(spec, TimeGrid(1.0, 100), 1.0, RngSpec(2), 5)
    with pytest.raises(PreconditionViolation, match="same drift"):
        log_optimal_strategy(market, 1.0)


def test_expected_log_utility_uses_usable_horizon():
    market = _market(default=DefaultSpec("fixed", value=0.5), n_paths=50)
    strategy = log_optimal_strategy(market, 1.0)
    estimate = expected_log_utility(strategy, market)
    rows = np.arange(market.n_paths)
    expected = np.log(strategy.wealth.values[rows, market.horizon_index])
    assert np.array_equal(estimate.per_path, expected)
    assert market.horizon_index.tolist() == [249] * 50


def test_overlevered_paths_are_excluded():
    market = _market(n_paths=300)
    strategy = scaled(log_optimal_strategy(market, 1.0), 40.0, market)
    estimate = expected_log_utility(strategy, market)
    assert estimate.n_excluded > 0
    assert estimate.n_valid + estimate.n_excluded == 300
    assert np.isnan(estimate.per_path[~estimate.valid]).all()


def test_only_log_utility():
    market = _market(n_paths=5)
    with pytest.raises(InvalidArgument, match="log"):
        expected_log_utility(log_optimal_strategy(market, 1.0), market, utility="power")


def test_scale_sweep_pooling():
    market = _market(n_paths=100)
    strategy = log_optimal_strategy(market, 1.0)
    sweep = scale_sweep(strategy, market, [0.5, 1.0])
    pooled = ScaleSweep.pooled([sweep, sweep])
    assert pooled.at(1.0).per_path.shape == (200,)
    assert pooled.at(1.0).estimate == pytest.approx(sweep.at(1.0).estimate)


def test_utility_estimate_statistics():
    estimate = UtilityEstimate(np.array([1.0, np.nan, 3.0]), np.array([True, False, True]))
    assert (estimate.n_valid, estimate.n_excluded) == (2, 1)
    assert estimate.estimate == 2.0
    assert estimate.std_error == pytest.approx(1.0)


def test_strategy_rejects_initial_shares():
    psit, S = _toy_price()
    theta = restrict(PathEnsemble(psit.grid, np.ones((1, 4))), psit)
    with pytest.raises(PreconditionViolation):
        Strategy(theta, S, 1.0)


def test_scaling_by_one_is_the_log_optimal_strategy():
    market = _market(n_paths=50)
    strategy = log_optimal_strategy(market, 1.0)
    same = scaled(strategy, 1.0, market)
    assert np.array_equal(same.wealth.values, strategy.wealth.values)
    assert scaled(strategy, 2.0, market).fraction == pytest.approx(5.0)


def test_scaled_strategy_keeps_its_own_fraction():
    market = _market(n_paths=50)
    doubled = scaled(log_optimal_strategy(market, 1.0), 2.0, market)
    assert np.allclose(doubled.invested.values[:, 1:], 5.0 * doubled.wealth.values[:, 1:], rtol=1e-12)
    assert np.all(doubled.wealth.values > 0.0)


def test_only_constant_fraction_strategies_scale():
    psit, S = _toy_price()
    theta = restrict(PathEnsemble(psit.grid, np.array([[0.0, 1.0, 1.0, 1.0]])), psit)
    market = _market(n_paths=1, steps=3)
    with pytest.raises(PreconditionViolation, match="constant-fraction"):
        scaled(Strategy(theta, wealth(theta, S, 1.0), 1.0), 2.0, market)


def test_scale_sweep_peaks_at_the_log_optimal_fraction():
    market = _market(n_paths=4000, steps=250, seed=11)
    sweep = scale_sweep(log_optimal_strategy(market, 1.0), market, [0.5, 1.0, 2.0])
    assert sweep.argmax == 1.0
    assert sweep.at(0.5).n_excluded == 0
    assert sweep.at(2.0).n_excluded == 0


def test_scale_sweep_compares_the_same_paths():
    market = _market(n_paths=300)
    sweep = scale_sweep(log_optimal_strategy(market, 1.0), market, [1.0, 40.0])
    assert sweep.at(40.0).n_excluded > 0
    assert np.array_equal(sweep.at(1.0).valid, sweep.at(40.0).valid)
    assert np.isnan(sweep.at(1.0).per_path[~sweep.at(1.0).valid]).all()
