"""
Stochastic exponential of a process on B, in closed form and by Euler recursion.
"""
import logging

import numpy as np

from src.core.calculus.integrals import increments, ls_integral, quad_covar
from src.core.grid_paths.data import PathEnsemble
from src.core.psit.data import ProcessOnB
from src.core.psit.operations import freeze_outside
from src.core.utils.errors import InvalidArgument, PricePositivityError

logger = logging.getLogger(__name__)


def _check_start(s0: float) -> None:
    if not s0 > 0:
        raise InvalidArgument(f"s0 must be positive, got {s0}")


def stoch_exp(Z: ProcessOnB, s0: float) -> ProcessOnB:
    """
    S = s0 exp(Z - 1/2 <Z^c>), the solution of S = s0 + S_-.Z for continuous Z.

    :param Z: Process on B without jump marks and Z_0 = 0.
    :param s0: Initial value, > 0.
    :return: S on B.
    """
    _check_start(s0)
    if Z.jumps.any():
        path, index = np.argwhere(Z.jumps)[0]
        raise InvalidArgument(f"stoch_exp needs a continuous driver, jump at path {path}, index {index}")
    nonzero = Z.values[:, 0] != 0.0
    if nonzero.any():
        raise InvalidArgument(f"driver must start at 0, path {int(np.argmax(nonzero))} does not")

    continuous = quad_covar(Z, Z).continuous.values
    values = s0 * np.exp(Z.values - 0.5 * continuous)
    return freeze_outside(PathEnsemble(Z.grid, values), Z.psit)


def euler_exp(Z: ProcessOnB, s0: float) -> ProcessOnB:
    """
    The recursion S[k] = S[k-1] (1 + dZ[k]), S[0] = s0.

    :param Z: Process on B.
    :param s0: Initial value, > 0.
    :return: S on B, strictly positive.
    :raises PricePositivityError: at the first B index where 1 + dZ <= 0.
    """
    _check_start(s0)
    factors = 1.0 + increments(Z)
    crossing = factors <= 0.0
    if crossing.any():
        path = int(np.argmax(crossing.any(axis=1)))
        index = int(np.argmax(crossing[path]))
        raise PricePositivityError(path, index, float(factors[path, index] - 1.0))

    factors[:, 0] = s0
    values = np.cumprod(factors, axis=1)
    return freeze_outside(PathEnsemble(Z.grid, values), Z.psit)


def sde_residual(S: ProcessOnB, Z: ProcessOnB, s0: float) -> ProcessOnB:
    """
    S - s0 - S_-.(Z - Z_0) at every B index; zero up to rounding for euler_exp output.
    """
    shifted = ProcessOnB(Z.psit, PathEnsemble(Z.grid, Z.values - Z.values[:, :1]))
    integral = ls_integral(S, shifted).process.values
    return freeze_outside(PathEnsemble(Z.grid, S.values - s0 - integral), Z.psit)
