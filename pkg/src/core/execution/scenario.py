"""
Runs the finance and simulate modes of a scenario.

Paths are processed in batches of ``run.batch_paths``; every per-path result
is concatenated in path order before aggregation, so the outputs do not
depend on the batch size or on the number of workers.
"""
import logging
from typing import Iterator, List, Tuple

import numpy as np

from src.core.config_parser.data import ScenarioConfig
from src.core.finance.data import Market, ScaleSweep, Strategy, UtilityEstimate
from src.core.finance.market import batch_bounds, build_market
from src.core.finance.portfolio import expected_log_utility, log_optimal_strategy, scale_sweep
from src.core.utils.errors import ConfigError

from .data import SCHEMA_VERSION, FinanceOutcome, SimulationOutcome

logger = logging.getLogger(__name__)


def _path_rows(market: Market, strategy: Strategy = None) -> List[Tuple[float, ...]]:
    last = int(market.horizon_index[0])
    times = market.psit.grid.times
    rows = []
    for k in range(last + 1):
        row = [float(times[k]), float(market.S.values[0, k]), float(market.w.values[0, k]), float(market.Z.values[0, k])]
        if strategy is not None:
            row += [float(strategy.invested.values[0, k]), float(strategy.wealth.values[0, k])]
        rows.append(tuple(row))
    return rows


class FinanceManager:
    """
    Builds the market batch by batch and evaluates the log-optimal strategy.
    """

    def __init__(self, config: ScenarioConfig) -> None:
        self.config = config
        self.grid = config.grid.to_grid()
        self.spec = config.market.to_regime_spec()
        self.rng = config.rng.to_rng()

    def markets(self) -> Iterator[Tuple[int, Market]]:
        """Yields (first path index, market) for every batch."""
        n_paths = self.config.rng.n_paths
        for start, stop in batch_bounds(n_paths, self.config.run.batch_paths):
            logger.debug("batch %d..%d", start, stop)
            yield start, build_market(
                self.spec, self.grid, self.config.market.s0, self.rng, stop - start, first_path=start
            )

    def run_finance(self) -> FinanceOutcome:
        """
        Evaluates the expected log utility of c * theta* for every configured multiplier.

        :return: The utility table, path 0 and the summary.
        :raises ConfigError: when the regimes differ (the strategy needs one constant regime).
        """
        if not self.spec.is_constant:
            raise ConfigError("market.regimes", "finance mode needs the same drift and sigma in every regime")

        x0 = self.config.market.x0
        multipliers = self.config.run.multipliers
        sweeps, bases, horizons = [], [], []
        sample_rows: List[Tuple[float, ...]] = []

        for start, market in self.markets():
            strategy = log_optimal_strategy(market, x0)
            sweeps.append(scale_sweep(strategy, market, multipliers))
            bases.append(expected_log_utility(strategy, market))
            horizons.append(market.horizon_time)
            if start == 0:
                sample_rows = _path_rows(market, strategy)

        sweep = ScaleSweep.pooled(sweeps)
        base = UtilityEstimate.pooled(bases)
        horizon = np.concatenate(horizons)
        mean_horizon = float(np.sum(horizon) / horizon.size)
        regime = self.spec.regimes[0]
        bonus = regime.drift**2 / (2 * regime.sigma**2) * mean_horizon

        utility_rows = [
            (float(c), e.estimate, e.std_error, e.n_valid) for c, e in zip(sweep.multipliers, sweep.estimates)
        ]
        summary = {
            "schema_version": SCHEMA_VERSION,
            "seed": self.config.rng.seed,
            "n_paths": self.config.rng.n_paths,
            "argmax_c": sweep.argmax,
            "estimate_at_1": base.estimate,
            "std_error_at_1": base.std_error,
            "mean_horizon": mean_horizon,
            "merton_bonus": bonus,
            "excluded_paths": [e.n_excluded for e in sweep.estimates],
        }
        logger.info("finance run done: argmax c = %s, estimate at 1 = %r", sweep.argmax, base.estimate)
        return FinanceOutcome(utility_rows, sample_rows, summary)

    def run_simulate(self) -> SimulationOutcome:
        """
        Simulates the market only: path 0 and horizon statistics.
        """
        horizons, open_flags, minima = [], [], []
        sample_rows: List[Tuple[float, ...]] = []

        for start, market in self.markets():
            horizons.append(market.horizon_time)
            open_flags.append(~market.psit.closed)
            minima.append(float(np.min(market.S.values[market.psit.mask])))
            if start == 0:
                sample_rows = _path_rows(market)

        horizon = np.concatenate(horizons)
        summary = {
            "schema_version": SCHEMA_VERSION,
            "seed": self.config.rng.seed,
            "n_paths": self.config.rng.n_paths,
            "mean_horizon": float(np.sum(horizon) / horizon.size),
            "open_fraction": float(np.count_nonzero(np.concatenate(open_flags)) / horizon.size),
            "min_price": min(minima),
        }
        return SimulationOutcome(sample_rows, summary)
