"""
Residuals of the Itô formula and of integration by parts on B.

Integrals go through the left-endpoint kernel of ``integrals``, which already
reads the integrand at index j - 1; f'(X_-) is therefore handed over as f'(X).
"""
import logging
from typing import Optional, Sequence

import numpy as np

from src.core.calculus.data import ScalarMap, VectorMap
from src.core.calculus.integrals import increments, ls_integral, quad_covar
from src.core.grid_paths.data import PathEnsemble
from src.core.psit.data import ProcessOnB, Psit
from src.core.psit.operations import freeze_outside
from src.core.utils.errors import InvalidArgument

logger = logging.getLogger(__name__)

IDENTITY = ScalarMap(lambda x: x, np.ones_like, np.zeros_like, "identity")
SQUARE = ScalarMap(lambda x: x * x, lambda x: 2.0 * x, lambda x: np.full_like(x, 2.0), "square")
SINE = ScalarMap(np.sin, np.cos, lambda x: -np.sin(x), "sine")


def _zeros(x):
    return np.zeros_like(x)


SUM = VectorMap(
    lambda z: z[0] + z[1],
    lambda z: (np.ones_like(z[0]), np.ones_like(z[1])),
    lambda z: ((_zeros(z[0]), _zeros(z[0])), (_zeros(z[0]), _zeros(z[0]))),
    "sum",
)
PRODUCT = VectorMap(
    lambda z: z[0] * z[1],
    lambda z: (z[1], z[0]),
    lambda z: ((_zeros(z[0]), np.ones_like(z[0])), (np.ones_like(z[0]), _zeros(z[0]))),
    "product",
)
SQUARE_TIMES = VectorMap(
    lambda z: z[0] * z[0] * z[1],
    lambda z: (2.0 * z[0] * z[1], z[0] * z[0]),
    lambda z: ((2.0 * z[1], 2.0 * z[0]), (2.0 * z[0], _zeros(z[0]))),
    "square_times",
)


def _on_b(psit: Psit, values: np.ndarray) -> ProcessOnB:
    return freeze_outside(PathEnsemble(psit.grid, values), psit)


def _integral_from_zero(psit: Psit, h: np.ndarray, a: ProcessOnB) -> np.ndarray:
    """sum_{j <= k} h[j-1] dA[j] on B, without the initial H_0 A_0 term."""
    integrand = ProcessOnB(psit, PathEnsemble(psit.grid, h))
    values = ls_integral(integrand, a).process.values
    return values - (h[:, 0] * a.values[:, 0])[:, None]


def _jump_correction(mask: np.ndarray, f_values: np.ndarray, linear: np.ndarray) -> np.ndarray:
    """sum over annotated j <= k of f(X_j) - f(X_{j-1}) - linear_j."""
    terms = np.zeros_like(f_values)
    terms[:, 1:] = np.diff(f_values, axis=1) - linear[:, 1:]
    return np.cumsum(np.where(mask, terms, 0.0), axis=1)


def ito_residual(f: ScalarMap, X: ProcessOnB, bracket: Optional[ProcessOnB] = None) -> ProcessOnB:
    """
    Residual of the one-dimensional Itô formula

        f(X) - f(X_0) - f'(X_-).(X - X_0) - sum(f(X) - f(X_-) - f'(X_-) dX) - 1/2 f''(X_-).<X^c>

    where the sum runs over annotated jumps in B.

    :param f: The C^2 map.
    :param X: Process on B.
    :param bracket: <X^c> to use; by default the realized continuous part of
        quad_covar(X, X). Pass the model bracket (e.g. time_process for a
        Brownian X) to measure the discretization error of the formula itself.
    :return: The residual at every B index.
    """
    psit = X.psit
    x = X.values
    fx = f.f(x)
    dfx = f.df(x)

    shifted = ProcessOnB(psit, PathEnsemble(psit.grid, x - x[:, :1]))
    drift = _integral_from_zero(psit, dfx, shifted)

    dx = increments(X)
    linear = np.zeros_like(x)
    linear[:, 1:] = dfx[:, :-1] * dx[:, 1:]
    jump_sum = _jump_correction(X.jumps, fx, linear)

    if bracket is None:
        bracket = quad_covar(X, X).continuous
    elif not psit.same_section(bracket.psit):
        raise InvalidArgument("bracket lives on a different PSIT")
    second = _integral_from_zero(psit, f.d2f(x), bracket)

    residual = (fx - fx[:, :1]) - drift - jump_sum - 0.5 * second
    logger.debug("ito residual for %s on %d paths", f.name or "f", X.ensemble.n_paths)
    return _on_b(psit, residual)


def _with_marks(Z: ProcessOnB, marks: np.ndarray) -> ProcessOnB:
    return ProcessOnB(Z.psit, PathEnsemble(Z.grid, Z.values, marks))


def ito_residual_multi(
    F: VectorMap,
    Z: Sequence[ProcessOnB],
    brackets: Optional[Sequence[Sequence[ProcessOnB]]] = None,
) -> ProcessOnB:
    """
    Residual of the d-dimensional Itô formula with cross terms <Z_i^c, Z_j^c>.

    An index annotated on any component is a jump of the vector process: the
    jump sum covers it and the realized continuous brackets exclude it for
    every pair of components.

    :param F: The C^2 map with gradient and Hessian.
    :param Z: d processes on one PSIT.
    :param brackets: Optional d x d model brackets replacing the realized ones.
    :return: The residual at every B index.
    """
    if not Z:
        raise InvalidArgument("ito_residual_multi needs at least one component")
    psit = Z[0].psit
    for other in Z[1:]:
        if not psit.same_section(other.psit):
            raise InvalidArgument("components live on different PSITs")

    d = len(Z)
    values = tuple(z.values for z in Z)
    marks = np.zeros_like(Z[0].jumps)
    for z in Z:
        marks |= z.jumps
    marked = [_with_marks(z, marks) for z in Z]

    fz = F.F(values)
    grad = F.grad(values)
    hess = F.hess(values)

    drift = np.zeros_like(fz)
    linear = np.zeros_like(fz)
    for i in range(d):
        shifted = ProcessOnB(psit, PathEnsemble(psit.grid, values[i] - values[i][:, :1]))
        drift = drift + _integral_from_zero(psit, grad[i], shifted)
        linear[:, 1:] += grad[i][:, :-1] * increments(Z[i])[:, 1:]
    jump_sum = _jump_correction(marks & psit.mask, fz, linear)

    second = np.zeros_like(fz)
    for i in range(d):
        for j in range(d):
            if brackets is not None:
                bracket = brackets[i][j]
            else:
                bracket = quad_covar(marked[i], marked[j]).continuous
            second = second + _integral_from_zero(psit, hess[i][j], bracket)

    residual = (fz - fz[:, :1]) - drift - jump_sum - 0.5 * second
    return _on_b(psit, residual)


def ibp_residual(X: ProcessOnB, Y: ProcessOnB, flip_sign: bool = False) -> ProcessOnB:
    """
    Residual of integration by parts: XY - (X_-).Y - (Y_-).X - [X, Y] + 2 X_0 Y_0.

    Both integrals carry their initial term X_0 Y_0, as does [X, Y]; the sum
    telescopes to zero at every B index.

    :param X: Process on B.
    :param Y: Process on the same PSIT.
    :param flip_sign: Fault hook for the verification harness; subtracts the
        covariation with the wrong sign.
    :return: The residual.
    """
    psit = X.psit
    x_dot_y = ls_integral(X, Y).process.values
    y_dot_x = ls_integral(Y, X).process.values
    bracket = quad_covar(X, Y).total.values
    sign = -1.0 if flip_sign else 1.0
    initial = 2.0 * (X.values[:, :1] * Y.values[:, :1])

    residual = X.values * Y.values - x_dot_y - y_dot_x - sign * bracket + initial
    return _on_b(psit, residual)
