import numpy as np
import pytest

from src.core.calculus.exponential import euler_exp, sde_residual, stoch_exp
from src.core.grid_paths.data import PathEnsemble, RngSpec, TimeGrid
from src.core.grid_paths.generators import gen_brownian
from src.core.psit.data import Psit
from src.core.psit.operations import restrict
from src.core.utils.errors import InvalidArgument, PricePositivityError


def _full(grid, n_paths):
    return Psit(grid, np.full(n_paths, grid.steps), np.ones(n_paths, dtype=bool))


def _driver(steps=1000, n_paths=8, seed=3):
    grid = TimeGrid(1.0, steps)
    W = gen_brownian(grid, n_paths, RngSpec(seed))
    return restrict(PathEnsemble(grid, 0.05 * grid.times[None, :] + 0.2 * W.values), _full(grid, n_paths))


def test_constant_driver_keeps_price():
    grid = TimeGrid(1.0, 4)
    Z = restrict(PathEnsemble(grid, np.zeros((1, 5))), _full(grid, 1))
    assert euler_exp(Z, 2.0).values.tolist() == [[2.0] * 5]
    assert stoch_exp(Z, 2.0).values.tolist() == [[2.0] * 5]


def test_euler_recursion():
    grid = TimeGrid(1.0, 2)
    Z = restrict(PathEnsemble(grid, np.array([[0.0, 0.1, -0.1]])), _full(grid, 1))
    assert euler_exp(Z, 1.0).values[0] == pytest.approx([1.0, 1.1, 1.1 * 0.8])


def test_euler_solves_its_equation():
    Z = _driver()
    S = euler_exp(Z, 1.0)
    residual = sde_residual(S, Z, 1.0)
    assert np.max(np.abs(residual.values)) <= 1e-12 * max(1.0, np.max(S.values))


def test_euler_and_closed_form_agree_on_fine_grids():
    Z = _driver(steps=4000)
    gap = np.abs(euler_exp(Z, 1.0).values[:, -1] / stoch_exp(Z, 1.0).values[:, -1] - 1.0)
    assert np.max(gap) < 1e-2


def test_crossing_zero_names_path_and_index():
    grid = TimeGrid(1.0, 3)
    values = np.array([[0.0, 0.1, 0.2, 0.3], [0.0, 0.1, -1.5, -1.4]])
    Z = restrict(PathEnsemble(grid, values), _full(grid, 2))
    with pytest.raises(PricePositivityError) as info:
        euler_exp(Z, 1.0)
    assert (info.value.path, info.value.index) == (1, 2)
    assert info.value.increment == pytest.approx(-1.6)


def test_closed_form_preconditions():
    grid = TimeGrid(1.0, 2)
    psit = _full(grid, 1)
    jumpy = restrict(PathEnsemble(grid, np.array([[0.0, 1.0, 2.0]]), np.array([[False, True, False]])), psit)
    with pytest.raises(InvalidArgument, match="continuous driver"):
        stoch_exp(jumpy, 1.0)
    shifted = restrict(PathEnsemble(grid, np.array([[1.0, 1.0, 1.0]])), psit)
    with pytest.raises(InvalidArgument, match="start at 0"):
        stoch_exp(shifted, 1.0)
    with pytest.raises(InvalidArgument, match="s0"):
        euler_exp(shifted, 0.0)
