"""
Wealth, admissibility and the log-optimal strategy on the investor's horizon.
"""
import logging
from typing import Sequence

import numpy as np

from src.core.calculus.integrals import stoch_integral
from src.core.finance.data import Market, ScaleSweep, Strategy, UtilityEstimate
from src.core.grid_paths.data import PathEnsemble
from src.core.psit.data import ProcessOnB
from src.core.psit.operations import freeze_outside
from src.core.utils.errors import InvalidArgument, PreconditionViolation

logger = logging.getLogger(__name__)

ADMISSIBILITY_RTOL = 1e-12
# Trading starts here: shares at index 0 are 0.
FIRST_TRADE_INDEX = 1


def _check_initial_shares(theta: ProcessOnB) -> None:
    nonzero = theta.values[:, 0] != 0.0
    if nonzero.any():
        path = int(np.argmax(nonzero))
        raise PreconditionViolation(f"initial shares must be 0, path {path} holds {theta.values[path, 0]}")


def gains(theta: ProcessOnB, S: ProcessOnB) -> ProcessOnB:
    """The gains process theta.S (zero at index 0 since theta_0 = 0)."""
    _check_initial_shares(theta)
    return stoch_integral(theta, S, breakdown=False).process


def wealth(theta: ProcessOnB, S: ProcessOnB, x0: float) -> ProcessOnB:
    """
    Self-financing wealth X = x0 + theta.S with the savings account at constant price 1.

    :param theta: Shares in the asset, zero at index 0.
    :param S: Price on the same PSIT.
    :param x0: Initial wealth.
    :return: X on B.
    """
    values = x0 + gains(theta, S).values
    return freeze_outside(PathEnsemble(S.grid, values), S.psit)


def check_self_financing(theta: ProcessOnB, S: ProcessOnB, X: ProcessOnB, x0: float) -> float:
    """Largest |X - x0 - theta.S| on B."""
    return X.max_abs_diff_on_b(wealth(theta, S, x0))


def check_admissible(theta: ProcessOnB, S: ProcessOnB, a: float) -> np.ndarray:
    """
    Per-path a-admissibility: theta.S >= -a at every B index.

    :param theta: Shares, zero at index 0.
    :param S: Price.
    :param a: Credit line, >= 0.
    :return: Boolean per path.
    """
    if a < 0:
        raise InvalidArgument(f"admissibility bound must be non-negative, got {a}")
    g = gains(theta, S)
    on_b = np.where(g.mask, g.values, np.inf)
    scale = np.maximum(1.0, np.max(np.where(g.mask, np.abs(g.values), 0.0), axis=1))
    return on_b.min(axis=1) >= -a - ADMISSIBILITY_RTOL * scale


def smallest_credit_line(theta: ProcessOnB, S: ProcessOnB) -> np.ndarray:
    """
    The smallest a for which each path is a-admissible, max(0, -min theta.S on B).

    On a finite grid every path is admissible for some a, so this is the
    whole information.
    """
    g = gains(theta, S)
    lowest = np.where(g.mask, g.values, np.inf).min(axis=1)
    smallest = np.maximum(0.0, -lowest)
    return smallest


def _constant_regime(market: Market):
    if not market.spec.is_constant:
        raise PreconditionViolation("the log-optimal strategy needs the same drift and sigma in every regime")
    return market.spec.regimes[0]


def merton_wealth(market: Market, x0: float, start_index: int = FIRST_TRADE_INDEX) -> ProcessOnB:
    """
    The closed-form log-optimal wealth x0 exp(mu^2/(2 sigma^2) (t - t_s) + (mu/sigma)(w - w_s)),
    started at index s and equal to x0 before it.

    :param market: A market with one constant regime.
    :param x0: Initial wealth.
    :param start_index: First trading index s.
    :return: The wealth on B.
    """
    regime = _constant_regime(market)
    mu, sigma = regime.drift, regime.sigma
    grid = market.psit.grid
    start = min(start_index, grid.steps)

    t = grid.times[None, :] - grid.times[start]
    w = market.w.values - market.w.values[:, start : start + 1]
    values = x0 * np.exp(mu**2 / (2 * sigma**2) * t + (mu / sigma) * w)
    k = np.arange(grid.steps + 1)[None, :]
    values = np.where(k < start, x0, values)
    return freeze_outside(PathEnsemble(grid, values), market.psit)


def constant_fraction_strategy(market: Market, x0: float, fraction: float) -> Strategy:
    """
    The strategy keeping ``fraction`` of its own wealth in the asset.

    From index 1 on, the amount invested is fraction * X[k], so the shares are
    theta[k] = fraction * X[k] / S[k]. The wealth follows the recursion
    X[k] = X[k-1] (1 + fraction (S[k] - S[k-1]) / S[k-1]); a path whose growth
    factor is not positive loses all its wealth there.

    :param market: The market.
    :param x0: Initial wealth, > 0.
    :param fraction: Share of wealth in the asset.
    :return: The strategy with its wealth and invested amount.
    """
    if not x0 > 0:
        raise InvalidArgument(f"initial wealth must be positive, got {x0}")
    psit = market.psit
    S = market.S.values

    returns = np.zeros_like(S)
    returns[:, 1:] = np.diff(S, axis=1) / S[:, :-1]
    growth = np.where(psit.mask, 1.0 + fraction * returns, 1.0)
    growth[:, : FIRST_TRADE_INDEX + 1] = 1.0
    recursive = x0 * np.cumprod(growth, axis=1)

    theta = fraction * recursive / S
    theta[:, :FIRST_TRADE_INDEX] = 0.0
    theta_on_b = freeze_outside(PathEnsemble(psit.grid, theta), psit)
    invested_on_b = freeze_outside(PathEnsemble(psit.grid, theta * S), psit)

    X = wealth(theta_on_b, market.S, x0)
    return Strategy(theta_on_b, X, x0, invested_on_b, fraction)


def log_optimal_strategy(market: Market, x0: float) -> Strategy:
    """
    The log-optimal strategy: keep the fraction mu / sigma^2 of wealth in the asset.

    Shares are 0 at index 0 and trading starts at index 1 from wealth x0; its
    wealth tracks merton_wealth as dt -> 0. With mu = 0 the strategy is all cash.

    :param market: A market with the same regime on every segment.
    :param x0: Initial wealth, > 0.
    :return: The strategy with its wealth and invested amount.
    """
    regime = _constant_regime(market)
    return constant_fraction_strategy(market, x0, regime.drift / regime.sigma**2)


def scaled(strategy: Strategy, multiplier: float, market: Market) -> Strategy:
    """
    The strategy keeping ``multiplier`` times the fraction of ``strategy`` in the asset.

    :raises PreconditionViolation: when ``strategy`` is not a constant-fraction strategy.
    """
    if strategy.fraction is None:
        raise PreconditionViolation("only a constant-fraction strategy can be scaled")
    return constant_fraction_strategy(market, strategy.x0, multiplier * strategy.fraction)


def expected_log_utility(strategy: Strategy, market: Market, utility: str = "log") -> UtilityEstimate:
    """
    Sample mean and standard error of ln X at the per-path usable horizon.

    Paths whose wealth is not strictly positive somewhere on B are excluded
    and counted.

    :param strategy: The strategy.
    :param market: Its market.
    :param utility: Only "log" is supported.
    :return: The per-path observations with the aggregate as properties.
    """
    if utility != "log":
        raise InvalidArgument(f"only log utility is supported, got {utility!r}")

    X = strategy.wealth
    valid = np.all(np.where(X.mask, X.values > 0.0, True), axis=1)
    rows = np.arange(X.values.shape[0])
    terminal = X.values[rows, market.horizon_index]

    per_path = np.full(terminal.shape, np.nan)
    per_path[valid] = np.log(terminal[valid])

    result = UtilityEstimate(per_path, valid)
    if result.n_excluded:
        logger.warning("%d paths excluded: wealth not strictly positive on B", result.n_excluded)
    return result


def scale_sweep(strategy: Strategy, market: Market, multipliers: Sequence[float]) -> ScaleSweep:
    """
    Expected log utility of the strategy scaled by every multiplier c.

    The estimates are taken over the same paths: a path excluded for one
    multiplier is excluded for all of them.

    :param strategy: A constant-fraction strategy, usually the log-optimal one.
    :param market: Its market.
    :param multipliers: The multipliers c.
    :return: One estimate per multiplier.
    """
    raw = [expected_log_utility(scaled(strategy, c, market), market) for c in multipliers]
    common = np.logical_and.reduce([e.valid for e in raw])
    estimates = tuple(UtilityEstimate(np.where(common, e.per_path, np.nan), common) for e in raw)
    return ScaleSweep(tuple(float(c) for c in multipliers), estimates)
