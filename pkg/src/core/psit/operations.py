"""
Operations on PSITs, stopping times and coupled sequences.

Every function here is pure: inputs are immutable and outputs are new objects.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np

from src.core.grid_paths.data import PathEnsemble, TimeGrid
from src.core.psit.data import (
    CoupledSequence,
    CsReport,
    CsViolation,
    FundamentalSequence,
    ProcessOnB,
    Psit,
    StoppingTime,
)
from src.core.utils.errors import InvalidArgument, PreconditionViolation

logger = logging.getLogger(__name__)


def _check_paths(expected: int, *times: StoppingTime) -> None:
    for t in times:
        if t.n_paths != expected:
            raise InvalidArgument(f"stopping time has {t.n_paths} paths, expected {expected}")


def psit_from_fs(fs: FundamentalSequence, grid: TimeGrid) -> Psit:
    """
    Builds the PSIT B = U_n [0, tau_n].

    The debut is the last term. With ``fs.limit`` given, paths whose terms stay
    strictly below the limit are announcing it: their debut is the limit and B
    is open there.

    :param fs: A pathwise increasing sequence of stopping times.
    :param grid: The grid the stopping times index into.
    :return: The PSIT.
    """
    n_paths = fs.times[0].n_paths
    _check_paths(n_paths, *fs.times)

    for n in range(len(fs.times) - 1):
        decreasing = fs.times[n + 1].index < fs.times[n].index
        if decreasing.any():
            path = int(np.argmax(decreasing))
            raise InvalidArgument(
                f"fundamental sequence decreases between terms {n + 1} and {n + 2} "
                f"at path {path}: {fs.times[n].index[path]} > {fs.times[n + 1].index[path]}"
            )

    last = fs.times[-1].index
    if fs.limit is None:
        return Psit(grid, last, np.ones(n_paths, dtype=bool))

    _check_paths(n_paths, fs.limit)
    limit = fs.limit.index
    beyond = last > limit
    if beyond.any():
        path = int(np.argmax(beyond))
        raise InvalidArgument(f"term {last[path]} exceeds the announced time {limit[path]} at path {path}")

    attained = last == limit
    return Psit(grid, limit, attained)


def psit_from_debut(T: StoppingTime, F_flags: Sequence[bool], grid: TimeGrid) -> Psit:
    """
    Builds B = [0, T_F) n [0, T_{F^c}]: open at T where the flag is set, closed elsewhere.

    :param T: The debut.
    :param F_flags: Per-path flag, True where B excludes its debut.
    :param grid: The grid.
    :return: The PSIT.
    """
    flags = np.asarray(F_flags, dtype=bool).reshape(-1)
    if flags.shape[0] != T.n_paths:
        raise InvalidArgument(f"{flags.shape[0]} flags for {T.n_paths} paths")

    empty = (T.index == 0) & flags
    if empty.any():
        raise InvalidArgument(f"empty section at path {int(np.argmax(empty))}: T = 0 with F set")

    return Psit(grid, T.index, ~flags)


def canonical_terms(steps: int) -> int:
    """Number of terms canonical_fs emits on a grid with ``steps`` intervals."""
    return max(1, int(np.ceil(np.log2(max(steps, 1)))) + 1)


def canonical_fs(psit: Psit) -> FundamentalSequence:
    """
    The fundamental sequence tau_n = d - ceil(d * 2^-n) on open paths, tau_n = d on closed ones.

    Open paths reach d - 1 after at most log2(K) + 1 terms. A debut past the
    grid end is treated as K + 1 so its terms stop at K.

    :param psit: The PSIT.
    :return: The sequence, with the debut as its limit.
    """
    steps = psit.grid.steps
    debut = psit.debut
    effective = np.where(psit.closed, 0, np.minimum(debut, steps + 1))

    times = []
    previous = np.zeros_like(debut)
    for n in range(1, canonical_terms(steps) + 1):
        open_term = np.maximum(effective - (-(-effective // 2**n)), 0)
        term = np.where(psit.closed, debut, np.maximum(open_term, previous))
        times.append(StoppingTime(term))
        previous = term

    return FundamentalSequence(tuple(times), StoppingTime(debut))


def restrict(X: PathEnsemble, psit: Psit) -> ProcessOnB:
    """
    The restriction of X on B. Values are copied; only B indices carry meaning.
    """
    return ProcessOnB(psit, X)


def _freeze(ensemble: PathEnsemble, index: np.ndarray, strict: bool) -> PathEnsemble:
    values = ensemble.values
    jumps = ensemble.jumps
    steps = ensemble.grid.steps
    index = np.minimum(index, steps)
    rows = np.arange(ensemble.n_paths)

    freeze_value = values[rows, index]
    if strict:
        jump_at = jumps[rows, index]
        previous = values[rows, np.maximum(index - 1, 0)]
        freeze_value = np.where(jump_at, previous, freeze_value)

    k = np.arange(steps + 1)[None, :]
    cleared = k >= index[:, None] if strict else k > index[:, None]

    frozen_values = np.where(cleared, freeze_value[:, None], values)
    return PathEnsemble(ensemble.grid, frozen_values, jumps & ~cleared)


def _check_inside(X: ProcessOnB, T: StoppingTime) -> np.ndarray:
    _check_paths(X.psit.n_paths, T)
    index = T.clipped(X.grid.steps)
    outside = index > X.psit.last_index
    if outside.any():
        path = int(np.argmax(outside))
        raise PreconditionViolation(
            f"stopping time {T.index[path]} leaves B at path {path} "
            f"(last B index {X.psit.last_index[path]})"
        )
    return index


def stop(X: ProcessOnB, T: StoppingTime) -> PathEnsemble:
    """
    The stopped process X^T = X on [0, T], X_T afterwards; jump marks after T are removed.

    :param X: A process on B.
    :param T: A stopping time on B ([0, T] inside B on every path).
    :return: The full-grid stopped process.
    """
    return _freeze(X.ensemble, _check_inside(X, T), strict=False)


def stop_strict(X: ProcessOnB, T: StoppingTime) -> PathEnsemble:
    """
    The process stopped strictly before T: frozen at the pre-jump value X_T - dX_T.
    With X_{0-} = X_0, T = 0 freezes at X_0.

    :param X: A process on B.
    :param T: A stopping time on B.
    :return: The full-grid stopped process, no jump marks at or after T.
    """
    return _freeze(X.ensemble, _check_inside(X, T), strict=True)


def freeze_outside(ensemble: PathEnsemble, psit: Psit) -> ProcessOnB:
    """
    Freezes values after the section at the last B value and drops jump marks there,
    so nothing outside B can leak into later computations.
    """
    return ProcessOnB(psit, _freeze(ensemble, psit.last_index, strict=False))


def validate_cs(cs: CoupledSequence, psit: Psit) -> CsReport:
    """
    Checks a coupled sequence against a PSIT.

    Reports, in order: decreasing T_n, B indices beyond every T_n, and the first
    index where X^(k) and X^(k+1) differ on B n [0, T_k]. Checking neighbours is
    enough because the agreement regions are nested.

    :param cs: The coupled sequence.
    :param psit: The PSIT.
    :return: The report; empty when the sequence is valid.
    """
    for t, x in cs.pairs:
        _check_paths(psit.n_paths, t)
        if x.grid != psit.grid or x.n_paths != psit.n_paths:
            raise InvalidArgument("coupled sequence and PSIT disagree on grid or path count")

    violations: List[CsViolation] = []
    steps = psit.grid.steps
    times = [t.clipped(steps) for t in cs.times]

    for n in range(len(times) - 1):
        for path in np.flatnonzero(cs.times[n + 1].index < cs.times[n].index):
            violations.append(
                CsViolation("order", int(path), int(times[n + 1][path]), n + 1, n + 2)
            )

    last_index = psit.last_index
    for path in np.flatnonzero(times[-1] < last_index):
        violations.append(CsViolation("coverage", int(path), int(times[-1][path]) + 1))

    mask = psit.mask
    k = np.arange(steps + 1)[None, :]
    processes = cs.processes
    for n in range(len(processes) - 1):
        region = mask & (k <= times[n][:, None])
        differs = (processes[n].values != processes[n + 1].values) | (
            processes[n].jumps != processes[n + 1].jumps
        )
        bad = region & differs
        for path in np.flatnonzero(bad.any(axis=1)):
            index = int(np.argmax(bad[path]))
            violations.append(CsViolation("consistency", int(path), index, n + 1, n + 2))

    if violations:
        logger.debug("coupled sequence has %d violations", len(violations))
    return CsReport(tuple(violations))


def glue(cs: CoupledSequence, psit: Psit) -> ProcessOnB:
    """
    Glues a coupled sequence into one process on B:
    X = X^(1) on [0, T_1], X = X^(n) on (T_{n-1}, T_n].

    :param cs: A valid coupled sequence.
    :param psit: The PSIT it covers.
    :return: The glued process (frozen after the section).
    :raises InvalidArgument: with the first violation when the sequence is invalid.
    """
    report = validate_cs(cs, psit)
    if not report.ok:
        raise InvalidArgument(f"invalid coupled sequence: {report.violations[0].describe()}")

    steps = psit.grid.steps
    k = np.arange(steps + 1)[None, :]
    first = cs.processes[0]
    values = first.values.copy()
    jumps = first.jumps.copy()

    for n in range(1, len(cs)):
        segment = k > cs.times[n - 1].clipped(steps)[:, None]
        values = np.where(segment, cs.processes[n].values, values)
        jumps = np.where(segment, cs.processes[n].jumps, jumps)

    return freeze_outside(PathEnsemble(psit.grid, values, jumps), psit)


def coupled_from_fs(X: ProcessOnB, fs: FundamentalSequence) -> CoupledSequence:
    """
    The coupled sequence (tau_n, X^{tau_n}) of a process on B.
    """
    return CoupledSequence(tuple((tau, stop(X, tau)) for tau in fs.times))


def psit_default_horizon(
    T_const: float, tau: StoppingTime, grid: TimeGrid
) -> Tuple[Psit, FundamentalSequence]:
    """
    The investor's horizon B = [0, T] n [0, tau): closed at T without default,
    open at tau where the default comes first.

    :param T_const: Terminal time, a grid node.
    :param tau: Default time, >= 1 on every path (INF for no default).
    :param grid: The grid.
    :return: The PSIT and T_n = tau_n ^ T, with tau_n announcing tau.
    """
    if not (0 < T_const <= grid.horizon * (1 + 1e-12)) or not grid.is_node(T_const):
        raise InvalidArgument(f"terminal time {T_const} must be a positive grid node within the horizon")
    if (tau.index == 0).any():
        raise InvalidArgument(f"empty section at path {int(np.argmax(tau.index == 0))}: default at 0")

    terminal = int(round(T_const / grid.dt))
    n_paths = tau.n_paths
    debut = np.minimum(tau.index, terminal)
    psit = Psit(grid, debut, tau.index > terminal)

    announcing = canonical_fs(psit_from_debut(tau, np.ones(n_paths, dtype=bool), grid))
    cap = StoppingTime.constant(terminal, n_paths)
    times = tuple(t.minimum(cap) for t in announcing.times)
    return psit, FundamentalSequence(times, StoppingTime(debut))

