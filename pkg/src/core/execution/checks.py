"""
The verification suite: every check measures one identity, rate or
statistical property and states the window it must fall in.

Checks register themselves in CHECKS, in the order they are run and reported.
"""
import contextlib
import logging
import math
import os
from typing import Callable, Dict, Iterator, List, Sequence, Tuple

import numpy as np

from src.core.calculus.exponential import euler_exp, sde_residual, stoch_exp
from src.core.calculus.integrals import (
    combine,
    constant_process,
    jumps,
    left_limits,
    ls_integral,
    ls_integral_glued,
    predictable_indicator,
    quad_covar,
    stoch_integral,
    time_process,
)
from src.core.calculus.ito import IDENTITY, PRODUCT, SINE, SQUARE, SQUARE_TIMES, ibp_residual, ito_residual, ito_residual_multi
from src.core.config_parser.data import (
    DefaultConfig,
    GridConfig,
    MarketConfig,
    RegimeConfig,
    RngConfig,
    RunConfig,
    ScenarioConfig,
)
from src.core.finance.data import DefaultSpec, Regime, RegimeSpec, ScaleSweep, Strategy, UtilityEstimate
from src.core.finance.market import batch_bounds, build_market, switching_mismatches
from src.core.finance.portfolio import expected_log_utility, log_optimal_strategy, merton_wealth, scale_sweep, wealth
from src.core.grid_paths.data import PathEnsemble, TimeGrid
from src.core.grid_paths.generators import gen_brownian, gen_correlated_brownians, refine_bridges
from src.core.psit.data import ProcessOnB, Psit
from src.core.psit.operations import canonical_fs, coupled_from_fs, glue, restrict, stop
from src.core.utils.misc import THREADS_ENV_VAR, fitted_order

from .data import CheckContext, CheckSpec, Measurement
from .fixtures import (
    fixture_generator,
    random_coupled_sequence,
    random_process,
    random_psit,
    random_stopping_time,
)
from .scenario import FinanceManager
from .writers import render_finance

logger = logging.getLogger(__name__)

CHECKS: List[CheckSpec] = []

EXACT_RTOL = 1e-10
SDE_RTOL = 1e-12
N_FIXTURES = 100
N_GLUE_FIXTURES = 50
FIXTURE_STEPS = 64
FIXTURE_PATHS = 4

RATE_STEPS = (250, 1000, 4000)
RATE_PATHS = 64
QV_PATHS = 200
QV_STEPS = 10_000

DESK_PATHS = 10_000
DESK_STEPS = 1000
DESK_BATCH = 1000
DESK_DRIFT = 0.1
DESK_SIGMA = 0.2
DESK_MULTIPLIERS = (0.5, 0.8, 1.0, 1.2, 2.0)


def register(name: str, budget: float) -> Callable:
    def decorator(function: Callable[[CheckContext], Measurement]) -> Callable:
        CHECKS.append(CheckSpec(name, function, budget))
        return function

    return decorator


def _full_psit(grid: TimeGrid, n_paths: int) -> Psit:
    return Psit(grid, np.full(n_paths, grid.steps), np.ones(n_paths, dtype=bool))


def _on_b_max(values: np.ndarray, mask: np.ndarray) -> float:
    return float(np.max(np.where(mask, np.abs(values), 0.0)))


def _relative_gap(left: np.ndarray, right: np.ndarray, mask: np.ndarray) -> float:
    scale = max(1.0, _on_b_max(left, mask), _on_b_max(right, mask))
    return _on_b_max(left - right, mask) / scale


def _fixtures(ctx: CheckContext, count: int = N_FIXTURES, min_last_index: int = 1) -> Iterator[Tuple[np.random.Generator, Psit]]:
    grid = TimeGrid(1.0, FIXTURE_STEPS)
    for i in range(count):
        gen = fixture_generator(ctx.rng, i)
        yield gen, random_psit(grid, FIXTURE_PATHS, gen, min_last_index)


def _three_integrals(H: ProcessOnB, X: ProcessOnB) -> List[ProcessOnB]:
    """The L-S, glued and stochastic integral of H with respect to X."""
    fs = canonical_fs(H.psit)
    glued = ls_integral_glued(coupled_from_fs(H, fs), coupled_from_fs(X, fs), H.psit)
    return [ls_integral(H, X).process, glued.process, stoch_integral(H, X, fs).process]


@register("ibp.exact", budget=2.0)
def check_ibp(ctx: CheckContext) -> Measurement:
    worst = 0.0
    for gen, psit in _fixtures(ctx):
        X, Y = random_process(psit, gen), random_process(psit, gen)
        residual = ibp_residual(X, Y, flip_sign="ibp_sign" in ctx.faults)
        scale = max(1.0, _on_b_max(X.values, psit.mask)) * max(1.0, _on_b_max(Y.values, psit.mask))
        worst = max(worst, _on_b_max(residual.values, psit.mask) / scale)
    return Measurement(worst, EXACT_RTOL, N_FIXTURES * FIXTURE_PATHS)


@register("ito.square", budget=2.0)
def check_ito_square(ctx: CheckContext) -> Measurement:
    worst = 0.0
    for gen, psit in _fixtures(ctx):
        X = random_process(psit, gen)
        scale = max(1.0, _on_b_max(X.values, psit.mask))
        worst = max(
            worst,
            _on_b_max(ito_residual(SQUARE, X).values, psit.mask) / scale**2,
            _on_b_max(ito_residual(IDENTITY, X).values, psit.mask) / scale,
        )
    return Measurement(worst, EXACT_RTOL, N_FIXTURES * FIXTURE_PATHS)


@register("ito.product", budget=2.0)
def check_ito_product(ctx: CheckContext) -> Measurement:
    worst = 0.0
    for gen, psit in _fixtures(ctx):
        X, Y = random_process(psit, gen), random_process(psit, gen)
        scale = max(1.0, _on_b_max(X.values, psit.mask)) * max(1.0, _on_b_max(Y.values, psit.mask))
        worst = max(worst, _on_b_max(ito_residual_multi(PRODUCT, [X, Y]).values, psit.mask) / scale)
    return Measurement(worst, EXACT_RTOL, N_FIXTURES * FIXTURE_PATHS)


@register("integral.neutrality", budget=2.0)
def check_neutrality(ctx: CheckContext) -> Measurement:
    worst = 0.0
    for gen, psit in _fixtures(ctx):
        X = random_process(psit, gen)
        for integral in _three_integrals(constant_process(psit, 1.0), X):
            worst = max(worst, _relative_gap(integral.values, X.values, psit.mask))
    return Measurement(worst, EXACT_RTOL, N_FIXTURES * FIXTURE_PATHS)


@register("integral.linearity", budget=3.0)
def check_linearity(ctx: CheckContext) -> Measurement:
    worst = 0.0
    for gen, psit in _fixtures(ctx):
        H, K, X, Y = (random_process(psit, gen) for _ in range(4))
        a, b = gen.standard_normal(2)

        in_integrand = zip(
            _three_integrals(combine([a, b], [H, K]), X),
            _three_integrals(H, X),
            _three_integrals(K, X),
        )
        for both, first, second in in_integrand:
            worst = max(worst, _relative_gap(both.values, a * first.values + b * second.values, psit.mask))

        in_integrator = zip(
            _three_integrals(H, combine([a, b], [X, Y])),
            _three_integrals(H, X),
            _three_integrals(H, Y),
        )
        for both, first, second in in_integrator:
            worst = max(worst, _relative_gap(both.values, a * first.values + b * second.values, psit.mask))
    return Measurement(worst, EXACT_RTOL, N_FIXTURES * FIXTURE_PATHS)


@register("integral.associativity", budget=2.0)
def check_associativity(ctx: CheckContext) -> Measurement:
    worst = 0.0
    for gen, psit in _fixtures(ctx):
        G, H, X = (random_process(psit, gen) for _ in range(3))
        product = ProcessOnB(psit, PathEnsemble(psit.grid, G.values * H.values))
        for inner, direct in zip(_three_integrals(H, X), _three_integrals(product, X)):
            nested = ls_integral(G, inner).process
            worst = max(worst, _relative_gap(nested.values, direct.values, psit.mask))
    return Measurement(worst, EXACT_RTOL, N_FIXTURES * FIXTURE_PATHS)


@register("integral.jump", budget=2.0)
def check_integral_jump(ctx: CheckContext) -> Measurement:
    worst = 0.0
    for gen, psit in _fixtures(ctx):
        H, X = random_process(psit, gen), random_process(psit, gen)
        integral = stoch_integral(H, X).process
        expected = left_limits(H).values * jumps(X).values
        worst = max(worst, _relative_gap(jumps(integral).values, expected, psit.mask))
    return Measurement(worst, EXACT_RTOL, N_FIXTURES * FIXTURE_PATHS)


@register("integral.stop_commutation", budget=2.0)
def check_stop_commutation(ctx: CheckContext) -> Measurement:
    worst = 0.0
    for gen, psit in _fixtures(ctx, min_last_index=1):
        H, X, Y = (random_process(psit, gen) for _ in range(3))
        tau = random_stopping_time(psit, gen, minimum=1)

        stopped = stop(stoch_integral(H, X).process, tau).values
        stopped_integrator = ls_integral(H, restrict(stop(X, tau), psit)).process.values
        indicator = predictable_indicator(tau, psit)
        cut = ProcessOnB(psit, PathEnsemble(psit.grid, H.values * indicator.values))
        cut_integrand = stoch_integral(cut, X).process.values

        bracket = stop(quad_covar(X, Y).total, tau).values
        bracket_stopped = quad_covar(restrict(stop(X, tau), psit), Y).total.values

        worst = max(
            worst,
            _relative_gap(stopped, stopped_integrator, psit.mask),
            _relative_gap(stopped, cut_integrand, psit.mask),
            _relative_gap(bracket, bracket_stopped, psit.mask),
        )
    return Measurement(worst, EXACT_RTOL, N_FIXTURES * FIXTURE_PATHS)


@register("glue.oracle", budget=2.0)
def check_glue_oracle(ctx: CheckContext) -> Measurement:
    worst = 0.0
    for gen, psit in _fixtures(ctx, count=N_GLUE_FIXTURES, min_last_index=0):
        H, X = random_process(psit, gen), random_process(psit, gen)
        h_cs, _ = random_coupled_sequence(H, gen)
        x_cs, _ = random_coupled_sequence(X, gen)

        glued = ls_integral_glued(h_cs, x_cs, psit).process
        direct = ls_integral(glue(h_cs, psit), glue(x_cs, psit)).process
        worst = max(worst, glued.max_abs_diff_on_b(direct))

        result = stoch_integral(H, X)
        worst = max(worst, result.reassemble(psit).max_abs_diff_on_b(result.process))
    return Measurement(worst, 0.0, N_GLUE_FIXTURES * FIXTURE_PATHS)


@register("qv.brownian", budget=10.0)
def check_qv_brownian(ctx: CheckContext) -> Measurement:
    grid = TimeGrid(1.0, QV_STEPS)
    psit = _full_psit(grid, QV_PATHS)
    W = restrict(gen_brownian(grid, QV_PATHS, ctx.rng), psit)
    qv = quad_covar(W, W)
    deviation = float(np.sum(np.abs(qv.total.values[:, -1] - 1.0)) / QV_PATHS)
    no_jumps = not np.any(qv.jump.values)
    return Measurement(deviation, 0.05, QV_PATHS, condition=no_jumps)


def _ladder(ctx: CheckContext, n_drivers: int, rho: np.ndarray, n_paths: int) -> List[List[PathEnsemble]]:
    """Drivers on each rung of RATE_STEPS, each rung a bridge refinement of the previous one."""
    grid = TimeGrid(1.0, RATE_STEPS[0])
    rungs = [gen_correlated_brownians(grid, n_drivers, rho, n_paths, ctx.rng)]
    for level, steps in enumerate(RATE_STEPS[1:], start=1):
        factor = steps // rungs[-1][0].grid.steps
        rungs.append(refine_bridges(rungs[-1], factor, ctx.rng, rho, level))
    return rungs


def _dts() -> List[float]:
    return [1.0 / steps for steps in RATE_STEPS]


@register("ito.rate", budget=30.0)
def check_ito_rate(ctx: CheckContext) -> Measurement:
    errors = []
    for (W,) in _ladder(ctx, 1, np.eye(1), RATE_PATHS):
        psit = _full_psit(W.grid, RATE_PATHS)
        residual = ito_residual(SINE, restrict(W, psit), bracket=time_process(psit))
        errors.append(float(np.mean(np.max(np.abs(residual.values), axis=1))))
    order = fitted_order(_dts(), errors)
    return Measurement(order, 0.65, RATE_PATHS, lower=0.35)


@register("ito.multi_rate", budget=30.0)
def check_ito_multi_rate(ctx: CheckContext) -> Measurement:
    rho = np.array([[1.0, 0.5], [0.5, 1.0]])
    errors = []
    for X, Y in _ladder(ctx, 2, rho, RATE_PATHS):
        psit = _full_psit(X.grid, RATE_PATHS)
        t = time_process(psit)
        cross = combine([rho[0, 1]], [t])
        residual = ito_residual_multi(
            SQUARE_TIMES, [restrict(X, psit), restrict(Y, psit)], brackets=[[t, cross], [cross, t]]
        )
        errors.append(float(np.mean(np.max(np.abs(residual.values), axis=1))))
    order = fitted_order(_dts(), errors)
    return Measurement(order, 0.65, RATE_PATHS, lower=0.35)


@register("integral.martingale", budget=5.0)
def check_martingale_increments(ctx: CheckContext) -> Measurement:
    n_paths = 2000
    grid = TimeGrid(1.0, 1000)
    psit = _full_psit(grid, n_paths)
    W = restrict(gen_brownian(grid, n_paths, ctx.rng), psit)
    H = ProcessOnB(psit, PathEnsemble(grid, np.sin(W.values)))
    terminal = stoch_integral(H, W, breakdown=False).process.values[:, -1]
    estimate = UtilityEstimate(terminal, np.ones(n_paths, dtype=bool))
    return Measurement(abs(estimate.estimate) / estimate.std_error, 4.0, n_paths)


@register("exp.rate", budget=10.0)
def check_exp_rate(ctx: CheckContext) -> Measurement:
    sigma = 0.2
    n_paths = 2 * RATE_PATHS
    gaps = []
    for (W,) in _ladder(ctx, 1, np.eye(1), n_paths):
        psit = _full_psit(W.grid, n_paths)
        Z = restrict(PathEnsemble(W.grid, sigma * W.values), psit)
        closed = stoch_exp(Z, 1.0).values[:, -1]
        euler = euler_exp(Z, 1.0).values[:, -1]
        gaps.append(float(np.mean(np.abs(euler - closed) / closed)))
    order = fitted_order(_dts(), gaps)
    return Measurement(order, 1.3, n_paths, lower=0.7)


@register("exp.sde_residual", budget=5.0)
def check_exp_sde_residual(ctx: CheckContext) -> Measurement:
    grid = TimeGrid(1.0, 1000)
    psit = _full_psit(grid, RATE_PATHS)
    W = gen_brownian(grid, RATE_PATHS, ctx.rng)
    Z = restrict(PathEnsemble(grid, 0.1 * grid.times[None, :] + 0.2 * W.values), psit)
    S = euler_exp(Z, 1.0)
    residual = sde_residual(S, Z, 1.0)
    scale = max(1.0, _on_b_max(S.values, psit.mask))
    return Measurement(_on_b_max(residual.values, psit.mask) / scale, SDE_RTOL, RATE_PATHS)


def _switching_spec() -> RegimeSpec:
    return RegimeSpec(
        regimes=(Regime(0.1, 0.2), Regime(0.05, 0.3), Regime(-0.02, 0.25)),
        default=DefaultSpec("exponential", rate=1.0),
        terminal=1.0,
    )


@register("finance.switching", budget=5.0)
def check_switching(ctx: CheckContext) -> Measurement:
    n_paths = 1000
    market = build_market(_switching_spec(), TimeGrid(1.0, 1000), 1.0, ctx.rng, n_paths)
    return Measurement(float(switching_mismatches(market)), 0.0, n_paths)


def _buy_and_hold(market) -> ProcessOnB:
    theta = np.ones_like(market.S.values)
    theta[:, 0] = 0.0
    return ProcessOnB(market.psit, PathEnsemble(market.psit.grid, theta))


@register("finance.horizon_restriction", budget=5.0)
def check_horizon_restriction(ctx: CheckContext) -> Measurement:
    n_paths = 1000
    spec = _switching_spec()
    grid = TimeGrid(1.0, 1000)
    market = build_market(spec, grid, 1.0, ctx.rng, n_paths)

    gen = np.random.default_rng(np.random.SeedSequence([ctx.seed, 7]))
    after = np.arange(grid.steps + 1)[None, :] > market.horizon_index[:, None]
    perturbed = [
        PathEnsemble(grid, np.where(after, d.values + 1e3 * gen.standard_normal(d.values.shape), d.values))
        for d in market.drivers
    ]
    other = build_market(spec, grid, 1.0, ctx.rng, n_paths, drivers=perturbed)

    theta = _buy_and_hold(market)
    X = wealth(theta, market.S, 1.0)
    X_other = wealth(_buy_and_hold(other), other.S, 1.0)
    utility = expected_log_utility(Strategy(theta, X, 1.0), market).per_path
    utility_other = expected_log_utility(Strategy(_buy_and_hold(other), X_other, 1.0), other).per_path

    differing = sum(
        not a.equals_on_b(b) for a, b in ((market.Z, other.Z), (market.w, other.w), (market.S, other.S), (X, X_other))
    )
    differing += int(not np.array_equal(utility, utility_other, equal_nan=True))
    return Measurement(float(differing), 0.0, n_paths)


def _desk_run(ctx: CheckContext, default: DefaultSpec) -> Dict[str, object]:
    spec = RegimeSpec((Regime(DESK_DRIFT, DESK_SIGMA),), default, terminal=1.0)
    grid = TimeGrid(1.0, DESK_STEPS)
    sweeps, pathwise, horizons = [], [], []
    for start, end in batch_bounds(DESK_PATHS, DESK_BATCH):
        market = build_market(spec, grid, 1.0, ctx.rng, end - start, first_path=start)
        strategy = log_optimal_strategy(market, 1.0)
        sweeps.append(scale_sweep(strategy, market, DESK_MULTIPLIERS))

        rows = np.arange(market.n_paths)
        closed_form = merton_wealth(market, 1.0).values[rows, market.horizon_index]
        simulated = strategy.wealth.values[rows, market.horizon_index]
        pathwise.append(np.abs(simulated - closed_form) / closed_form)
        horizons.append(market.horizon_time)

    horizon = np.concatenate(horizons)
    logger.debug("desk run with %s default: %d batches", default.kind, len(sweeps))
    return {
        "sweep": ScaleSweep.pooled(sweeps),
        "pathwise": float(np.max(np.concatenate(pathwise))),
        "mean_horizon": float(np.sum(horizon) / horizon.size),
        "dt": grid.dt,
    }


def _no_default_desk(ctx: CheckContext) -> Dict[str, object]:
    return ctx.memo("desk.none", lambda: _desk_run(ctx, DefaultSpec()))


def _merton_bonus() -> float:
    return DESK_DRIFT**2 / (2 * DESK_SIGMA**2)


@register("finance.merton", budget=60.0)
def check_merton(ctx: CheckContext) -> Measurement:
    at_one = _no_default_desk(ctx)["sweep"].at(1.0)
    z = abs(at_one.estimate - _merton_bonus()) / at_one.std_error
    return Measurement(z, 3.0, DESK_PATHS)


@register("finance.merton_pathwise", budget=60.0)
def check_merton_pathwise(ctx: CheckContext) -> Measurement:
    return Measurement(_no_default_desk(ctx)["pathwise"], 5e-2, DESK_PATHS)


@register("finance.scale_argmax", budget=90.0)
def check_scale_argmax(ctx: CheckContext) -> Measurement:
    sweep = _no_default_desk(ctx)["sweep"]
    at_one = sweep.at(1.0)
    margins = []
    for c in (0.5, 2.0):
        other = sweep.at(c)
        pooled = math.sqrt(at_one.std_error**2 + other.std_error**2)
        margins.append((at_one.estimate - other.estimate) / pooled)
    no_exclusions = all(e.n_excluded == 0 for e in sweep.estimates)
    return Measurement(
        min(margins), paths_used=DESK_PATHS, lower=2.0, condition=sweep.argmax == 1.0 and no_exclusions
    )


@register("finance.random_horizon", budget=60.0)
def check_random_horizon(ctx: CheckContext) -> Measurement:
    desk = ctx.memo("desk.fixed", lambda: _desk_run(ctx, DefaultSpec("fixed", value=0.5)))
    at_one = desk["sweep"].at(1.0)
    z = abs(at_one.estimate - _merton_bonus() * 0.5) / at_one.std_error
    horizon_ok = abs(desk["mean_horizon"] - 0.5) <= desk["dt"] + 1e-12
    return Measurement(z, 3.0, DESK_PATHS, condition=horizon_ok)


@contextlib.contextmanager
def _threads(value: str) -> Iterator[None]:
    previous = os.environ.get(THREADS_ENV_VAR)
    os.environ[THREADS_ENV_VAR] = value
    try:
        yield
    finally:
        if previous is None:
            del os.environ[THREADS_ENV_VAR]
        else:
            os.environ[THREADS_ENV_VAR] = previous


def _reproducibility_config(seed: int) -> ScenarioConfig:
    return ScenarioConfig(
        grid=GridConfig(1.0, 200),
        market=MarketConfig(
            regimes=[RegimeConfig(DESK_DRIFT, DESK_SIGMA)],
            default=DefaultConfig("exponential", rate=0.7),
            terminal=1.0,
        ),
        rng=RngConfig(seed, 5000),
        run=RunConfig(batch_paths=5000),
    )


@register("finance.reproducibility", budget=20.0)
def check_reproducibility(ctx: CheckContext) -> Measurement:
    config = _reproducibility_config(ctx.seed)
    outputs = []
    for threads in ("1", "8"):
        with _threads(threads):
            outputs.append(render_finance(FinanceManager(config).run_finance()))
    differing = sum(outputs[0][name] != outputs[1][name] for name in outputs[0])
    return Measurement(float(differing), 0.0, config.rng.n_paths)


def select(pattern: str = "") -> Sequence[CheckSpec]:
    """Checks whose name contains ``pattern``, in registry order."""
    return [spec for spec in CHECKS if pattern in spec.name]
