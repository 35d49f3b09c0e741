"""
Random jump-annotated fixtures for the exact-identity checks.
"""
from typing import Tuple

import numpy as np

from src.core.grid_paths.data import STREAM_FIXTURE, PathEnsemble, RngSpec, TimeGrid
from src.core.psit.data import INF, CoupledSequence, ProcessOnB, Psit, StoppingTime

JUMP_RATE = 0.1
JUMP_SCALE = 1.0
DIVERGENCE_SCALE = 1e3


def fixture_generator(rng: RngSpec, index: int) -> np.random.Generator:
    """The stream for fixture number ``index``."""
    return rng.stream(index, STREAM_FIXTURE)


def random_psit(grid: TimeGrid, n_paths: int, gen: np.random.Generator, min_last_index: int = 0) -> Psit:
    """
    A PSIT with random debuts in min_last_index + 1..K + 1 (K + 1 meaning never)
    and random open/closed flags.
    """
    debut = gen.integers(min_last_index + 1, grid.steps + 2, size=n_paths).astype(np.int64)
    closed = gen.random(n_paths) < 0.5
    debut = np.where(debut > grid.steps, INF, debut)
    return Psit(grid, debut, closed)


def random_process(psit: Psit, gen: np.random.Generator, jump_rate: float = JUMP_RATE) -> ProcessOnB:
    """
    A random walk with Gaussian increments of variance dt and annotated jumps
    of scale JUMP_SCALE at rate ``jump_rate`` per index.
    """
    grid = psit.grid
    shape = (psit.n_paths, grid.steps + 1)
    increments = gen.standard_normal(shape) * np.sqrt(grid.dt)
    jumps = gen.random(shape) < jump_rate
    jumps[:, 0] = False
    increments = np.where(jumps, gen.standard_normal(shape) * JUMP_SCALE, increments)
    increments[:, 0] = gen.standard_normal(psit.n_paths)
    return ProcessOnB(psit, PathEnsemble(grid, np.cumsum(increments, axis=1), jumps))


def random_stopping_time(psit: Psit, gen: np.random.Generator, minimum: int = 0) -> StoppingTime:
    """A stopping time uniform on minimum..last B index."""
    last = psit.last_index
    return StoppingTime(gen.integers(minimum, last + 1))


def random_coupled_sequence(
    X: ProcessOnB, gen: np.random.Generator, segments: int = 3
) -> Tuple[CoupledSequence, Tuple[StoppingTime, ...]]:
    """
    A coupled sequence for X whose members agree with X up to T_n and diverge
    wildly (values and jump marks) afterwards.

    :return: The sequence and its stopping times; the last one is the last B index.
    """
    psit = X.psit
    grid = psit.grid
    last = psit.last_index
    draws = np.sort(gen.integers(0, last[:, None] + 1, size=(psit.n_paths, segments - 1)), axis=1)
    columns = [draws[:, n] for n in range(segments - 1)] + [last]
    times = tuple(StoppingTime(c) for c in columns)

    k = np.arange(grid.steps + 1)[None, :]
    pairs = []
    for t in times:
        after = k > t.index[:, None]
        noise = gen.standard_normal(X.values.shape) * DIVERGENCE_SCALE
        marks = gen.random(X.values.shape) < 0.5
        marks[:, 0] = False
        values = np.where(after, noise, X.values)
        jumps = np.where(after, marks, X.ensemble.jumps)
        pairs.append((t, PathEnsemble(grid, values, jumps)))
    return CoupledSequence(tuple(pairs)), times
