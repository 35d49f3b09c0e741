"""
The market on a default-bounded horizon: default time, switching driver and price.
"""
import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from src.core.calculus.exponential import euler_exp, stoch_exp
from src.core.finance.data import DefaultSpec, Market, Regime, RegimeSpec
from src.core.grid_paths.data import STREAM_DEFAULT, PathEnsemble, RngSpec, TimeGrid
from src.core.grid_paths.generators import gen_correlated_brownians
from src.core.psit.data import INF, CoupledSequence, ProcessOnB, Psit, StoppingTime
from src.core.psit.operations import freeze_outside, glue, psit_default_horizon
from src.core.utils.errors import InvalidArgument

logger = logging.getLogger(__name__)

PRICE_SCHEMES = ("euler", "closed")


def sample_default_index(
    default: DefaultSpec, grid: TimeGrid, n_paths: int, rng: RngSpec, first_path: int = 0
) -> StoppingTime:
    """
    Draws the default time and snaps it down to a grid node, never below index 1.

    Exponential times come from the stream (seed, path, DEFAULT); times past
    the horizon become INF.

    :param default: The default law.
    :param grid: The grid.
    :param n_paths: Number of paths.
    :param rng: Stream specification.
    :param first_path: Global index of the first path.
    :return: The default index per path.
    """
    if default.kind == "none":
        return StoppingTime.constant(INF, n_paths)

    if default.kind == "fixed":
        times = np.full(n_paths, float(default.value))
    else:
        times = np.array(
            [
                rng.stream(first_path + i, STREAM_DEFAULT).exponential(1.0 / default.rate)
                for i in range(n_paths)
            ]
        )

    index = np.array(
        [INF if t > grid.horizon else max(1, grid.snap_down(t)) for t in times], dtype=np.int64
    )
    return StoppingTime(index)


def _check_increasing(times: Sequence[StoppingTime]) -> None:
    for n in range(len(times) - 1):
        decreasing = times[n + 1].index < times[n].index
        if decreasing.any():
            path = int(np.argmax(decreasing))
            raise InvalidArgument(
                f"switching times decrease between T_{n + 1} and T_{n + 2} at path {path}"
            )


def _continue_from(previous: np.ndarray, step: np.ndarray, at: np.ndarray) -> np.ndarray:
    """previous on [0, at], then previous[at] plus the increments of ``step`` after at."""
    k = np.arange(previous.shape[1])[None, :]
    rows = np.arange(previous.shape[0])
    anchor = (previous[rows, at] - step[rows, at])[:, None]
    return np.where(k <= at[:, None], previous, anchor + step)


def driver_sequences(
    spec: RegimeSpec, brownians: Sequence[PathEnsemble], times: Sequence[StoppingTime], grid: TimeGrid
) -> Tuple[CoupledSequence, CoupledSequence]:
    """
    The coupled sequences (T_n, Z^(n)) and (T_n, w^(n)).

    Z^(1) = mu_1 t + sigma_1 W^(1); afterwards
    Z^(n+1) = Y^(n+1) + (Z^(n) - Y^(n+1))^{T_n} with Y^(n+1) = mu_{n+1} t + sigma_{n+1} W^(n+1),
    evaluated as a copy of Z^(n) up to T_n so that (Z^(n+1))^{T_n} = (Z^(n))^{T_n} bit for bit.

    :param spec: Regimes for successive segments.
    :param brownians: One driver per regime.
    :param times: Increasing switching times T_n.
    :param grid: The grid.
    :return: The sequences for Z and for w.
    """
    if len(brownians) < len(spec.regimes):
        raise InvalidArgument(f"{len(spec.regimes)} regimes need as many drivers, got {len(brownians)}")
    _check_increasing(times)

    t = grid.times[None, :]

    def segment(n: int) -> Tuple[Regime, np.ndarray]:
        regime = spec.regime(n)
        driver = brownians[min(n, len(brownians) - 1)].values
        return regime, driver

    regime, driver = segment(0)
    z = regime.drift * t + regime.sigma * driver
    w = np.array(driver)
    z_pairs = [(times[0], PathEnsemble(grid, z))]
    w_pairs = [(times[0], PathEnsemble(grid, w))]

    steps = grid.steps
    for n in range(1, len(times)):
        at = times[n - 1].clipped(steps)
        regime, driver = segment(n)
        z = _continue_from(z, regime.drift * t + regime.sigma * driver, at)
        w = _continue_from(w, driver, at)
        z_pairs.append((times[n], PathEnsemble(grid, z)))
        w_pairs.append((times[n], PathEnsemble(grid, w)))

    return CoupledSequence(tuple(z_pairs)), CoupledSequence(tuple(w_pairs))


def switching_driver(
    spec: RegimeSpec, brownians: Sequence[PathEnsemble], times: Sequence[StoppingTime], psit: Psit
) -> Tuple[ProcessOnB, ProcessOnB]:
    """
    The switching driver Z and the glued Brownian motion w on B.

    :param spec: Regimes for successive segments.
    :param brownians: One driver per regime.
    :param times: Increasing switching times T_n covering B.
    :param psit: The investor's horizon.
    :return: (Z, w).
    """
    z_cs, w_cs = driver_sequences(spec, brownians, times, psit.grid)
    return glue(z_cs, psit), glue(w_cs, psit)


def price_process(Z: ProcessOnB, s0: float, scheme: str = "euler") -> ProcessOnB:
    """
    The price S = s0 + S_-.Z.

    :param Z: The driver.
    :param s0: Initial price, > 0.
    :param scheme: "euler" solves the discrete equation exactly; "closed" uses
        s0 exp(Z - 1/2 <Z^c>).
    :return: S on B.
    """
    if scheme not in PRICE_SCHEMES:
        raise InvalidArgument(f"price scheme must be one of {PRICE_SCHEMES}, got {scheme!r}")
    if scheme == "closed":
        return stoch_exp(Z, s0)
    return euler_exp(Z, s0)


def geometric_price(regime: Regime, w: ProcessOnB, s0: float) -> ProcessOnB:
    """
    s0 exp((mu - sigma^2 / 2) t + sigma w), the price under one constant regime.
    """
    t = w.grid.times[None, :]
    values = s0 * np.exp((regime.drift - 0.5 * regime.sigma**2) * t + regime.sigma * w.values)
    return freeze_outside(PathEnsemble(w.grid, values), w.psit)


def build_market(
    spec: RegimeSpec,
    grid: TimeGrid,
    s0: float,
    rng: RngSpec,
    n_paths: int,
    first_path: int = 0,
    scheme: str = "euler",
    drivers: Sequence[PathEnsemble] = None,
) -> Market:
    """
    Samples a market: default time, horizon PSIT, switching times, driver and price.

    :param spec: Regimes, default law, terminal time and correlation.
    :param grid: The grid.
    :param s0: Initial price.
    :param rng: Stream specification.
    :param n_paths: Number of paths in this batch.
    :param first_path: Global index of the batch's first path.
    :param scheme: Price scheme, see price_process.
    :param drivers: Brownian drivers to use instead of drawing them.
    :return: The market.
    """
    tau = sample_default_index(spec.default, grid, n_paths, rng, first_path)
    psit, fs = psit_default_horizon(spec.terminal, tau, grid)

    if drivers is None:
        drivers = gen_correlated_brownians(
            grid, len(spec.regimes), spec.rho, n_paths, rng, first_path
        )
    Z, w = switching_driver(spec, drivers, fs.times, psit)
    S = price_process(Z, s0, scheme)

    logger.debug(
        "market batch at path %d: %d paths, %d switching times, %d open sections",
        first_path,
        n_paths,
        len(fs),
        int(np.count_nonzero(~psit.closed)),
    )
    return Market(spec, psit, tuple(fs.times), tuple(drivers), Z, w, S, s0)


def batch_bounds(n_paths: int, batch_paths: int) -> List[Tuple[int, int]]:
    """[start, stop) path ranges of at most ``batch_paths`` paths each."""
    count = max(1, math.ceil(n_paths / batch_paths))
    return [(i * batch_paths, min(n_paths, (i + 1) * batch_paths)) for i in range(count)]


def switching_mismatches(market: Market) -> int:
    """
    Number of (k, n, path) with k < n where (Z^(k))^{T_k} and (Z^(n))^{T_k}, or the
    same for w, differ somewhere on B n [0, T_k].
    """
    mask = market.psit.mask
    steps = market.psit.grid.steps
    k_index = np.arange(steps + 1)[None, :]
    count = 0
    for cs in driver_sequences(market.spec, market.drivers, market.switching_times, market.psit.grid):
        times, processes = cs.times, cs.processes
        for k in range(len(cs)):
            region = mask & (k_index <= times[k].clipped(steps)[:, None])
            for n in range(k + 1, len(cs)):
                differs = region & (processes[k].values != processes[n].values)
                count += int(np.count_nonzero(differs.any(axis=1)))
    return count
