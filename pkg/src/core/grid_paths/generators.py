"""
Time grid construction and path generation.

Brownian drivers are drawn per path from ``RngSpec.stream(path, STREAM_BROWNIAN)``,
so an ensemble is bit-identical however its paths are split across workers.
"""
import logging
import multiprocessing
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from src.core.grid_paths.data import (
    STREAM_BRIDGE,
    STREAM_BROWNIAN,
    PathEnsemble,
    RngSpec,
    SamplePath,
    TimeGrid,
)
from src.core.utils.errors import InvalidArgument
from src.core.utils.misc import worker_count

logger = logging.getLogger(__name__)

# Below this many paths a worker pool costs more than it saves.
PARALLEL_MIN_PATHS = 4096
PSD_TOLERANCE = 1e-10


def make_grid(horizon: float, steps: int) -> TimeGrid:
    """
    Creates a uniform grid on [0, horizon] with ``steps`` intervals.

    :param horizon: Length of the time interval, > 0.
    :param steps: Number of intervals K, >= 1.
    :return: The grid.
    """
    if not horizon > 0:
        raise InvalidArgument(f"horizon must be positive, got {horizon}")
    if isinstance(steps, bool) or int(steps) != steps or steps < 1:
        raise InvalidArgument(f"steps must be a positive integer, got {steps}")
    return TimeGrid(float(horizon), int(steps))


def make_deterministic_path(
    grid: TimeGrid, value_fn_samples: Sequence[float], jump_marks: Iterable[int] = ()
) -> SamplePath:
    """
    Wraps given samples as a path; used for exact-identity fixtures.

    :param grid: The grid the samples live on.
    :param value_fn_samples: K + 1 values.
    :param jump_marks: Indices whose increment is a jump.
    :return: The path.
    """
    values = np.asarray(value_fn_samples, dtype=float)
    if values.shape != (grid.steps + 1,):
        raise InvalidArgument(
            f"expected {grid.steps + 1} samples, got {values.size}"
        )
    return SamplePath(grid, values, frozenset(int(k) for k in jump_marks))


def validate_correlation(rho: np.ndarray) -> np.ndarray:
    """
    Checks that rho is a correlation matrix.

    :param rho: Candidate matrix.
    :return: rho as a float array.
    :raises InvalidArgument: naming the first leading minor that is not PSD.
    """
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
        raise InvalidArgument(f"rho must be a non-empty square matrix, got shape {rho.shape}")
    if not np.array_equal(rho, rho.T):
        raise InvalidArgument("rho must be symmetric")
    if not np.all(np.diag(rho) == 1.0):
        raise InvalidArgument("rho must have a unit diagonal")

    for k in range(1, rho.shape[0] + 1):
        if np.linalg.eigvalsh(rho[:k, :k]).min() < -PSD_TOLERANCE:
            raise InvalidArgument(
                f"rho is not positive semi-definite: leading minor {k} fails"
            )
    return rho


def _semidefinite_cholesky(rho: np.ndarray) -> np.ndarray:
    # numpy's cholesky rejects singular matrices; rho_ij = 1 is legal here.
    n = rho.shape[0]
    lower = np.zeros_like(rho)
    for i in range(n):
        for j in range(i + 1):
            s = rho[i, j] - np.dot(lower[i, :j], lower[j, :j])
            if i == j:
                lower[i, i] = np.sqrt(max(s, 0.0))
            elif lower[j, j] > PSD_TOLERANCE:
                lower[i, j] = s / lower[j, j]
    return lower


def _draw_normals(task: Tuple[int, int, int, int, int]) -> np.ndarray:
    seed, start, stop, n_drivers, steps = task
    rng = RngSpec(seed)
    out = np.empty((stop - start, n_drivers, steps))
    for row, path in enumerate(range(start, stop)):
        out[row] = rng.stream(path, STREAM_BROWNIAN).standard_normal((n_drivers, steps))
    return out


def _standard_normals(
    rng: RngSpec, first_path: int, n_paths: int, n_drivers: int, steps: int
) -> np.ndarray:
    workers = min(worker_count(), n_paths)
    if workers <= 1 or n_paths < PARALLEL_MIN_PATHS:
        return _draw_normals((rng.master_seed, first_path, first_path + n_paths, n_drivers, steps))

    bounds = first_path + np.linspace(0, n_paths, workers + 1).astype(int)
    tasks = [
        (rng.master_seed, int(bounds[i]), int(bounds[i + 1]), n_drivers, steps)
        for i in range(workers)
    ]
    logger.debug("drawing %d paths on %d workers", n_paths, workers)
    with multiprocessing.Pool(workers) as pool:
        chunks = pool.map(_draw_normals, tasks)
    return np.concatenate(chunks)


def _integrate(grid: TimeGrid, increments: np.ndarray) -> np.ndarray:
    values = np.zeros((increments.shape[0], grid.steps + 1))
    np.cumsum(increments, axis=1, out=values[:, 1:])
    return values


def gen_correlated_brownians(
    grid: TimeGrid,
    n_drivers: int,
    rho: np.ndarray,
    n_paths: int,
    rng: RngSpec,
    first_path: int = 0,
) -> List[PathEnsemble]:
    """
    Generates n_drivers Brownian motions with <W_i, W_j>_t = rho_ij * t.

    Independent normals are mixed with a (semi-definite) Cholesky factor, row
    by row in a fixed order, so rho_ij = 1 reproduces driver i bit for bit.

    :param grid: The time grid.
    :param n_drivers: Number of drivers.
    :param rho: n_drivers x n_drivers correlation matrix.
    :param n_paths: Number of realizations.
    :param rng: Stream specification.
    :param first_path: Global index of the first path, for drawing an ensemble in batches.
    :return: One ensemble per driver.
    """
    if n_paths < 1:
        raise InvalidArgument(f"n_paths must be positive, got {n_paths}")
    rho = validate_correlation(rho)
    if rho.shape[0] != n_drivers:
        raise InvalidArgument(f"rho is {rho.shape[0]}x{rho.shape[0]}, expected {n_drivers} drivers")

    lower = _semidefinite_cholesky(rho)
    normals = _standard_normals(rng, first_path, n_paths, n_drivers, grid.steps)
    scale = np.sqrt(grid.dt)

    drivers = []
    for i in range(n_drivers):
        mixed = lower[i, 0] * normals[:, 0, :]
        for j in range(1, i + 1):
            mixed = mixed + lower[i, j] * normals[:, j, :]
        drivers.append(PathEnsemble(grid, _integrate(grid, mixed * scale)))

    logger.debug("generated %d drivers x %d paths on %d steps", n_drivers, n_paths, grid.steps)
    return drivers


def gen_brownian(grid: TimeGrid, n_paths: int, rng: RngSpec, first_path: int = 0) -> PathEnsemble:
    """
    Generates standard Brownian paths: W_0 = 0, increments i.i.d. N(0, dt).

    :param grid: The time grid.
    :param n_paths: Number of realizations.
    :param rng: Stream specification.
    :return: The ensemble (no jump marks).
    """
    return gen_correlated_brownians(grid, 1, np.eye(1), n_paths, rng, first_path)[0]


def _infill(ensemble: PathEnsemble, xi: np.ndarray, factor: int) -> PathEnsemble:
    coarse = ensemble.grid
    fine = TimeGrid(coarse.horizon, coarse.steps * factor)
    n_paths = ensemble.n_paths

    coarse_increments = np.diff(ensemble.values, axis=1)
    increments = xi - xi.mean(axis=2, keepdims=True) + coarse_increments[:, :, None] / factor

    partial = ensemble.values[:, :-1, None] + np.cumsum(increments, axis=2)
    partial[:, :, -1] = ensemble.values[:, 1:]

    values = np.empty((n_paths, fine.steps + 1))
    values[:, 0] = ensemble.values[:, 0]
    values[:, 1:] = partial.reshape(n_paths, fine.steps)
    return PathEnsemble(fine, values)


def refine_bridges(
    ensembles: Sequence[PathEnsemble],
    factor: int,
    rng: RngSpec,
    rho: np.ndarray = None,
    level: int = 1,
    first_path: int = 0,
) -> List[PathEnsemble]:
    """
    Refines every interval into ``factor`` sub-intervals by Brownian-bridge infill.

    Coarse nodes are copied, so a refined path equals the coarse one node for
    node. Interval i of global path p of driver d uses row i of the stream
    (seed, p, BRIDGE, level, d); the infill of correlated drivers is mixed
    with the same factor as the drivers themselves.

    :param ensembles: Brownian-type drivers on one grid, without jump marks.
    :param factor: Refinement factor, >= 2.
    :param rng: Stream specification.
    :param rho: Correlation of the drivers; identity by default.
    :param level: Refinement level; distinct levels draw distinct infill.
    :param first_path: Global index of the first path, as in gen_correlated_brownians.
    :return: One ensemble per driver on the grid (horizon, K * factor).
    """
    if factor < 2:
        raise InvalidArgument(f"refinement factor must be at least 2, got {factor}")
    if any(e.jumps.any() for e in ensembles):
        raise InvalidArgument("bridge refinement needs paths without jump marks")
    n_drivers = len(ensembles)
    rho = np.eye(n_drivers) if rho is None else validate_correlation(rho)
    if rho.shape[0] != n_drivers:
        raise InvalidArgument(f"rho is {rho.shape[0]}x{rho.shape[0]}, expected {n_drivers} drivers")

    coarse = ensembles[0].grid
    n_paths, steps = ensembles[0].n_paths, coarse.steps
    scale = np.sqrt(coarse.dt / factor)
    normals = [
        np.stack(
            [
                rng.stream(p, STREAM_BRIDGE, level, d).standard_normal((steps, factor))
                for p in range(first_path, first_path + n_paths)
            ]
        )
        for d in range(n_drivers)
    ]

    lower = _semidefinite_cholesky(rho)
    refined = []
    for i, ensemble in enumerate(ensembles):
        mixed = lower[i, 0] * normals[0]
        for j in range(1, i + 1):
            mixed = mixed + lower[i, j] * normals[j]
        refined.append(_infill(ensemble, mixed * scale, factor))
    return refined


def refine_bridge(
    ensemble: PathEnsemble, factor: int, rng: RngSpec, level: int = 1, first_path: int = 0
) -> PathEnsemble:
    """
    Bridge refinement of a single driver; see refine_bridges.
    """
    return refine_bridges([ensemble], factor, rng, level=level, first_path=first_path)[0]
