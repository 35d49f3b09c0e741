import numpy as np
import pytest

from src.core.grid_paths.data import RngSpec
from src.core.grid_paths.generators import (
    gen_brownian,
    gen_correlated_brownians,
    make_deterministic_path,
    make_grid,
    refine_bridge,
    refine_bridges,
    validate_correlation,
)
from src.core.utils.errors import InvalidArgument
from src.core.utils.misc import THREADS_ENV_VAR


@pytest.mark.parametrize("horizon, steps", [(0.0, 10), (-1.0, 10), (1.0, 0), (1.0, 2.5)])
def test_make_grid_rejects(horizon, steps):
    with pytest.raises(InvalidArgument):
        make_grid(horizon, steps)


def test_make_deterministic_path():
    grid = make_grid(1.0, 2)
    path = make_deterministic_path(grid, [0.0, 1.0, 3.0], [2])
    assert path.jump_marks == frozenset({2})
    with pytest.raises(InvalidArgument, match="expected 3 samples"):
        make_deterministic_path(grid, [0.0, 1.0])


def test_brownian_starts_at_zero_without_jumps():
    W = gen_brownian(make_grid(1.0, 100), 5, RngSpec(1))
    assert np.all(W.values[:, 0] == 0.0)
    assert not W.jumps.any()


def test_brownian_increment_variance():
    grid = make_grid(1.0, 1000)
    W = gen_brownian(grid, 200, RngSpec(3))
    variance = np.var(np.diff(W.values, axis=1))
    assert variance == pytest.approx(grid.dt, rel=0.02)


def test_batches_match_single_draw():
    grid = make_grid(1.0, 20)
    rng = RngSpec(11)
    whole = gen_brownian(grid, 10, rng)
    tail = gen_brownian(grid, 4, rng, first_path=6)
    assert np.array_equal(whole.values[6:], tail.values)


def test_thread_count_does_not_change_paths(monkeypatch):
    grid = make_grid(1.0, 4)
    rng = RngSpec(5)
    monkeypatch.setenv(THREADS_ENV_VAR, "1")
    single = gen_brownian(grid, 5000, rng)
    monkeypatch.setenv(THREADS_ENV_VAR, "4")
    pooled = gen_brownian(grid, 5000, rng)
    assert np.array_equal(single.values, pooled.values)


def test_unit_correlation_reproduces_driver():
    rho = np.ones((2, 2))
    first, second = gen_correlated_brownians(make_grid(1.0, 50), 2, rho, 3, RngSpec(2))
    assert np.array_equal(first.values, second.values)


def test_cross_variation_matches_rho():
    rho = np.array([[1.0, -0.6], [-0.6, 1.0]])
    grid = make_grid(1.0, 2000)
    first, second = gen_correlated_brownians(grid, 2, rho, 200, RngSpec(9))
    cross = np.sum(np.diff(first.values, axis=1) * np.diff(second.values, axis=1), axis=1)
    assert np.mean(cross) == pytest.approx(-0.6, abs=0.02)


def test_validate_correlation_names_minor():
    rho = np.array([[1.0, 0.9, 0.9], [0.9, 1.0, -0.9], [0.9, -0.9, 1.0]])
    with pytest.raises(InvalidArgument, match="leading minor 3"):
        validate_correlation(rho)


def test_validate_correlation_shape_and_diagonal():
    with pytest.raises(InvalidArgument, match="square"):
        validate_correlation(np.ones((2, 3)))
    with pytest.raises(InvalidArgument, match="unit diagonal"):
        validate_correlation(np.array([[2.0, 0.0], [0.0, 1.0]]))


def test_refine_bridge_keeps_coarse_nodes():
    coarse = gen_brownian(make_grid(1.0, 10), 4, RngSpec(4))
    fine = refine_bridge(coarse, 4, RngSpec(4))
    assert fine.grid.steps == 40
    assert np.array_equal(fine.values[:, ::4], coarse.values)


def test_refine_bridge_levels_differ():
    coarse = gen_brownian(make_grid(1.0, 10), 2, RngSpec(4))
    first = refine_bridge(coarse, 2, RngSpec(4), level=1)
    second = refine_bridge(coarse, 2, RngSpec(4), level=2)
    assert not np.array_equal(first.values, second.values)


def test_refine_bridges_keeps_unit_correlation():
    rho = np.ones((2, 2))
    drivers = gen_correlated_brownians(make_grid(1.0, 10), 2, rho, 3, RngSpec(6))
    first, second = refine_bridges(drivers, 4, RngSpec(6), rho)
    assert np.array_equal(first.values, second.values)


def test_refine_bridge_rejects():
    coarse = gen_brownian(make_grid(1.0, 10), 1, RngSpec(4))
    with pytest.raises(InvalidArgument, match="at least 2"):
        refine_bridge(coarse, 1, RngSpec(4))


def test_refined_batches_match_single_refinement():
    grid = make_grid(1.0, 10)
    rng = RngSpec(8)
    whole = refine_bridge(gen_brownian(grid, 6, rng), 4, rng)
    tail = refine_bridge(gen_brownian(grid, 2, rng, first_path=4), 4, rng, first_path=4)
    assert np.array_equal(whole.values[4:], tail.values)
    head = refine_bridge(gen_brownian(grid, 2, rng), 4, rng)
    assert not np.array_equal(head.values, tail.values)
