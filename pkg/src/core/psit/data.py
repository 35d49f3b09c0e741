"""
Data classes for the psit module.

A predictable set of interval type (PSIT) is stored per path as its debut d and
whether d itself belongs to the set: B = [0, d] when closed, [0, d) when open.
On the grid an open section [0, d) is the index range 0..d-1.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.core.grid_paths.data import PathEnsemble, TimeGrid
from src.core.utils.errors import InvalidArgument

# Stopping time / debut beyond the end of the grid (+infinity).
INF = np.iinfo(np.int64).max


def _as_index_array(index) -> np.ndarray:
    array = np.array(index, dtype=np.int64).reshape(-1)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class StoppingTime:
    """
    Per-path grid index in {0..K} or INF.
    """

    index: np.ndarray

    def __post_init__(self) -> None:
        index = _as_index_array(self.index)
        if (index < 0).any():
            raise InvalidArgument(f"stopping time index negative at path {int(np.argmax(index < 0))}")
        object.__setattr__(self, "index", index)

    @staticmethod
    def constant(value: int, n_paths: int) -> "StoppingTime":
        return StoppingTime(np.full(n_paths, value, dtype=np.int64))

    @property
    def n_paths(self) -> int:
        return self.index.shape[0]

    def minimum(self, other: "StoppingTime") -> "StoppingTime":
        return StoppingTime(np.minimum(self.index, other.index))

    def clipped(self, steps: int) -> np.ndarray:
        """Indices with INF (and anything past the grid) mapped to K."""
        return np.minimum(self.index, steps)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StoppingTime):
            return NotImplemented
        return np.array_equal(self.index, other.index)

    def __hash__(self) -> int:
        return hash(self.index.tobytes())


@dataclass(frozen=True, eq=False)
class Psit:
    """
    A predictable set of interval type on a grid.

    :param debut: Per-path debut index (or INF).
    :param closed: Per-path flag, True when the debut belongs to the section.
    """

    grid: TimeGrid
    debut: np.ndarray
    closed: np.ndarray

    def __post_init__(self) -> None:
        debut = _as_index_array(self.debut)
        closed = np.array(self.closed, dtype=bool).reshape(-1)
        if closed.shape != debut.shape:
            raise InvalidArgument("debut and closed flags must have one entry per path")
        if (debut < 0).any():
            raise InvalidArgument(f"negative debut at path {int(np.argmax(debut < 0))}")
        empty = (debut == 0) & ~closed
        if empty.any():
            raise InvalidArgument(f"empty section at path {int(np.argmax(empty))}: debut 0 must be closed")

        # [0, +inf) and [0, +inf] are the same section.
        closed = closed | (debut == INF)
        closed.setflags(write=False)
        object.__setattr__(self, "debut", debut)
        object.__setattr__(self, "closed", closed)

    @property
    def n_paths(self) -> int:
        return self.debut.shape[0]

    @property
    def last_index(self) -> np.ndarray:
        """Per-path last grid index inside B."""
        steps = self.grid.steps
        clipped = np.minimum(self.debut, steps)
        open_end = np.where(self.debut > steps, steps, clipped - 1)
        return np.where(self.closed, clipped, open_end)

    @property
    def mask(self) -> np.ndarray:
        """(n_paths, K + 1) membership of each grid index in B."""
        k = np.arange(self.grid.steps + 1)
        return k[None, :] <= self.last_index[:, None]

    def same_section(self, other: "Psit") -> bool:
        return self.grid == other.grid and np.array_equal(self.last_index, other.last_index)


@dataclass(frozen=True, eq=False)
class FundamentalSequence:
    """
    Pathwise increasing stopping times whose intervals [0, tau_n] exhaust a PSIT.

    :param limit: Optional per-path announced time. Where every term stays
        strictly below the limit the section is open at the limit.
    """

    times: Tuple[StoppingTime, ...]
    limit: Optional[StoppingTime] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", tuple(self.times))
        if not self.times:
            raise InvalidArgument("a fundamental sequence needs at least one stopping time")

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True, eq=False)
class ProcessOnB:
    """
    A process whose values only matter inside the PSIT.
    """

    psit: Psit
    ensemble: PathEnsemble

    def __post_init__(self) -> None:
        if self.psit.grid != self.ensemble.grid:
            raise InvalidArgument("process and PSIT live on different grids")
        if self.psit.n_paths != self.ensemble.n_paths:
            raise InvalidArgument(
                f"PSIT has {self.psit.n_paths} paths, process has {self.ensemble.n_paths}"
            )

    @property
    def grid(self) -> TimeGrid:
        return self.ensemble.grid

    @property
    def values(self) -> np.ndarray:
        return self.ensemble.values

    @property
    def jumps(self) -> np.ndarray:
        return self.ensemble.jumps & self.psit.mask

    @property
    def mask(self) -> np.ndarray:
        return self.psit.mask

    def max_abs_diff_on_b(self, other: "ProcessOnB") -> float:
        if not self.psit.same_section(other.psit):
            raise InvalidArgument("processes live on different PSITs")
        diff = np.abs(self.values - other.values)
        return float(np.max(np.where(self.mask, diff, 0.0)))

    def equals_on_b(self, other: "ProcessOnB", rtol: float = 0.0) -> bool:
        """
        Indistinguishability on B: values (and jump marks) agree at every B index.
        With rtol > 0 values are compared relative to the largest magnitude on B.
        """
        if not self.psit.same_section(other.psit):
            return False
        if not np.array_equal(self.jumps, other.jumps):
            return False
        mask = self.mask
        if rtol == 0.0:
            return bool(np.array_equal(self.values[mask], other.values[mask]))
        scale = max(1.0, float(np.max(np.abs(self.values[mask]))))
        return self.max_abs_diff_on_b(other) <= rtol * scale


@dataclass(frozen=True, eq=False)
class CoupledSequence:
    """
    Pairs (T_n, X^(n)) of increasing stopping times and full-grid processes.
    """

    pairs: Tuple[Tuple[StoppingTime, PathEnsemble], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", tuple(tuple(pair) for pair in self.pairs))
        if not self.pairs:
            raise InvalidArgument("a coupled sequence needs at least one pair")

    @property
    def times(self) -> List[StoppingTime]:
        return [t for t, _ in self.pairs]

    @property
    def processes(self) -> List[PathEnsemble]:
        return [x for _, x in self.pairs]

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class CsViolation:
    """
    One witness against a coupled sequence.

    kind is "order" (T_k > T_l), "coverage" (B not covered by the last T_n) or
    "consistency" (X^(k) != X^(l) at a B index <= T_k).
    """

    kind: str
    path: int
    index: int
    k: int = -1
    l: int = -1

    def describe(self) -> str:
        if self.kind == "coverage":
            return f"coverage: path {self.path}, B index {self.index} lies beyond every T_n"
        return f"{self.kind}: (k={self.k}, l={self.l}), path {self.path}, index {self.index}"


@dataclass(frozen=True)
class CsReport:
    violations: Tuple[CsViolation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations
