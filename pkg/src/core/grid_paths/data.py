"""
Data classes for the grid_paths module.

Every path lives on a uniform TimeGrid. A PathEnsemble stores all realizations
as one (n_paths, K + 1) array of values plus a boolean array of jump marks;
SamplePath is the single-realization view of the same data.
"""
import math
from dataclasses import dataclass, field
from typing import FrozenSet, List

import numpy as np

from src.core.utils.errors import InvalidArgument

# Per-path stream keys. The derivation rule (master_seed, path_index, *keys)
# is part of the external contract: changing it changes every output.
STREAM_BROWNIAN = 0
STREAM_BRIDGE = 1
STREAM_DEFAULT = 2
STREAM_FIXTURE = 3


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class TimeGrid:
    """
    Uniform grid t_k = k * dt on [0, horizon].
    """

    horizon: float
    steps: int

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def times(self) -> np.ndarray:
        times = np.arange(self.steps + 1, dtype=float) * self.dt
        times[-1] = self.horizon
        return times

    def snap_down(self, t: float) -> int:
        """
        Index of the last grid node at or before t.
        Values within 1e-9 steps of a node are treated as that node.
        """
        return int(math.floor(t / self.dt + 1e-9))

    def is_node(self, t: float) -> bool:
        ratio = t / self.dt
        return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, abs(ratio))


@dataclass(frozen=True, eq=False)
class SamplePath:
    """
    One realization of a process on the grid.

    An index in ``jump_marks`` claims its whole increment as the jump.
    """

    grid: TimeGrid
    values: np.ndarray
    jump_marks: FrozenSet[int] = frozenset()

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.steps + 1,):
            raise InvalidArgument(
                f"path needs {self.grid.steps + 1} values, got {self.values.shape[0]}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgument("path values must be finite")
        bad = [k for k in self.jump_marks if not 1 <= k <= self.grid.steps]
        if bad:
            raise InvalidArgument(f"jump marks outside 1..{self.grid.steps}: {sorted(bad)}")

    def jump_sizes(self) -> np.ndarray:
        sizes = np.zeros_like(self.values)
        marks = sorted(self.jump_marks)
        sizes[marks] = self.values[marks] - self.values[[k - 1 for k in marks]]
        return sizes


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """
    Many independent realizations sharing one grid.

    :param values: (n_paths, K + 1) array.
    :param jumps: (n_paths, K + 1) boolean jump marks; column 0 is always False.
    """

    grid: TimeGrid
    values: np.ndarray
    jumps: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != self.grid.steps + 1:
            raise InvalidArgument(
                f"ensemble needs shape (n_paths, {self.grid.steps + 1}), got {values.shape}"
            )
        if values.shape[0] < 1:
            raise InvalidArgument("ensemble needs at least one path")
        if not np.all(np.isfinite(values)):
            path, index = np.argwhere(~np.isfinite(values))[0]
            raise InvalidArgument(f"non-finite value at path {path}, index {index}")

        if self.jumps is None:
            jumps = np.zeros(values.shape, dtype=bool)
        else:
            jumps = np.array(self.jumps, dtype=bool)
            if jumps.shape != values.shape:
                raise InvalidArgument(
                    f"jump marks shape {jumps.shape} does not match values {values.shape}"
                )
            if jumps[:, 0].any():
                raise InvalidArgument("index 0 cannot carry a jump mark")

        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "jumps", _frozen(jumps))

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]

    def path(self, i: int) -> SamplePath:
        marks = frozenset(int(k) for k in np.flatnonzero(self.jumps[i]))
        return SamplePath(self.grid, self.values[i].copy(), marks)

    @property
    def paths(self) -> List[SamplePath]:
        return [self.path(i) for i in range(self.n_paths)]

    @staticmethod
    def from_paths(paths: List[SamplePath]) -> "PathEnsemble":
        if not paths:
            raise InvalidArgument("ensemble needs at least one path")
        grid = paths[0].grid
        if any(p.grid != grid for p in paths):
            raise InvalidArgument("all member paths must share the same grid")
        values = np.stack([p.values for p in paths])
        jumps = np.zeros(values.shape, dtype=bool)
        for i, p in enumerate(paths):
            jumps[i, sorted(p.jump_marks)] = True
        return PathEnsemble(grid, values, jumps)

    def with_values(self, values: np.ndarray, jumps: np.ndarray = None) -> "PathEnsemble":
        return PathEnsemble(self.grid, values, self.jumps if jumps is None else jumps)


@dataclass(frozen=True)
class RngSpec:
    """
    Reproducible per-path random streams.

    The stream for (master_seed, path_index, *keys) is
    ``default_rng(SeedSequence([master_seed, path_index, *keys]))``, so a path
    never depends on how many other paths are drawn or in which order.
    """

    master_seed: int

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise InvalidArgument(f"master_seed must fit in 64 bits, got {self.master_seed}")

    def stream(self, path_index: int, *keys: int) -> np.random.Generator:
        sequence = np.random.SeedSequence([self.master_seed, path_index, *keys])
        return np.random.default_rng(sequence)
