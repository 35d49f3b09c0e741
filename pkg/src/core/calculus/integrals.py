"""
Integral and differential operators on processes on B.

All integrals share one kernel, the left-endpoint sum

    L[k] = H[0] A[0] + sum_{j=1..k} H[j-1] (A[j] - A[j-1]),   k in B.

Evaluating the integrand at the left endpoint is how predictability shows up
on the grid; in particular the kernel reads H at its left limit, so callers
pass f'(X) where the continuous formula has f'(X_-).
Increments outside B are zero, so every result is constant after the section.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from src.core.calculus.data import IntegralResult, QuadraticDecomposition, Segment
from src.core.grid_paths.data import PathEnsemble
from src.core.psit.data import CoupledSequence, FundamentalSequence, ProcessOnB, Psit, StoppingTime
from src.core.psit.operations import (
    canonical_fs,
    freeze_outside,
    glue,
    stop,
    validate_cs,
)
from src.core.utils.errors import InvalidArgument, PreconditionViolation

logger = logging.getLogger(__name__)


def _shared_psit(*processes: ProcessOnB) -> Psit:
    psit = processes[0].psit
    for other in processes[1:]:
        if not psit.same_section(other.psit):
            raise InvalidArgument("processes live on different PSITs")
    return psit


def _process(psit: Psit, values: np.ndarray, jumps: Optional[np.ndarray] = None) -> ProcessOnB:
    return ProcessOnB(psit, PathEnsemble(psit.grid, values, jumps))


def increments(X: ProcessOnB) -> np.ndarray:
    """X[k] - X[k-1] on B (k >= 1), zero at index 0 and outside B."""
    d = np.zeros_like(X.values)
    d[:, 1:] = np.diff(X.values, axis=1)
    return np.where(X.mask, d, 0.0)


def _kernel(h: np.ndarray, a: np.ndarray, mask: Optional[np.ndarray]) -> np.ndarray:
    da = np.diff(a, axis=1)
    terms = h[:, :-1] * da
    if mask is not None:
        terms = np.where(mask[:, 1:], terms, 0.0)

    initial = h[:, 0] * a[:, 0]
    out = np.empty_like(a)
    out[:, 0] = initial
    np.cumsum(terms, axis=1, out=out[:, 1:])
    out[:, 1:] += initial[:, None]
    return out


def constant_process(psit: Psit, value: float) -> ProcessOnB:
    """c 𝔍_B."""
    return _process(psit, np.full((psit.n_paths, psit.grid.steps + 1), float(value)))


def time_process(psit: Psit) -> ProcessOnB:
    """A = t 𝔍_B, also the bracket <W> of a Brownian driver."""
    times = np.broadcast_to(psit.grid.times, (psit.n_paths, psit.grid.steps + 1))
    return freeze_outside(PathEnsemble(psit.grid, times), psit)


def combine(coefficients: Sequence[float], processes: Sequence[ProcessOnB]) -> ProcessOnB:
    """
    The linear combination sum_i c_i X_i; jump marks are the union of the inputs'.
    """
    psit = _shared_psit(*processes)
    values = np.zeros_like(processes[0].values)
    jumps = np.zeros(values.shape, dtype=bool)
    for c, X in zip(coefficients, processes):
        values = values + c * X.values
        jumps |= X.jumps
    return _process(psit, values, jumps)


def left_limits(X: ProcessOnB) -> ProcessOnB:
    """
    The left-limit process X_-: X_-[k] = X[k-1] for k >= 1 and X_-[0] = X[0].
    """
    values = np.empty_like(X.values)
    values[:, 0] = X.values[:, 0]
    values[:, 1:] = X.values[:, :-1]
    return freeze_outside(PathEnsemble(X.grid, values), X.psit)


def jumps(X: ProcessOnB) -> ProcessOnB:
    """
    The jump process dX: the increment at annotated B indices, 0 elsewhere.
    """
    d = np.where(X.jumps, increments(X), 0.0)
    return _process(X.psit, d)


def summation(X: ProcessOnB) -> ProcessOnB:
    """
    The summation process (sum X)[k] = sum_{j <= k, j in B} X[j].
    """
    terms = np.where(X.mask, X.values, 0.0)
    marks = (terms != 0.0)
    marks[:, 0] = False
    return _process(X.psit, np.cumsum(terms, axis=1), marks)


def predictable_indicator(tau: StoppingTime, psit: Psit) -> ProcessOnB:
    """
    The integrand-side indicator of [0, tau]: 1 at indices < tau.

    Fed to the left-endpoint kernel it keeps exactly the increments up to tau,
    so stop(H.X, tau) = (H * indicator).X. Needs tau >= 1.
    """
    if tau.n_paths != psit.n_paths:
        raise InvalidArgument(f"stopping time has {tau.n_paths} paths, expected {psit.n_paths}")
    if (tau.index < 1).any():
        raise InvalidArgument(f"indicator needs tau >= 1, path {int(np.argmax(tau.index < 1))} has 0")
    index = tau.clipped(psit.grid.steps)
    outside = index > psit.last_index
    if outside.any():
        raise PreconditionViolation(f"stopping time leaves B at path {int(np.argmax(outside))}")

    k = np.arange(psit.grid.steps + 1)[None, :]
    return _process(psit, (k < index[:, None]).astype(float))


def ls_integral(H: ProcessOnB, A: ProcessOnB) -> IntegralResult:
    """
    The Lebesgue-Stieltjes integral on B of H with respect to A.

    :param H: Integrand on B.
    :param A: Finite-variation integrator on the same PSIT.
    :return: H.A with (H.A)_0 = H_0 A_0.
    """
    psit = _shared_psit(H, A)
    values = _kernel(H.values, A.values, psit.mask)
    return IntegralResult(_process(psit, values, A.jumps))


def _merged_times(h_cs: CoupledSequence, a_cs: CoupledSequence) -> list:
    n = max(len(h_cs), len(a_cs))
    h_times = h_cs.times + [h_cs.times[-1]] * (n - len(h_cs))
    a_times = a_cs.times + [a_cs.times[-1]] * (n - len(a_cs))
    return [th.minimum(ta) for th, ta in zip(h_times, a_times)]


def ls_integral_glued(
    H_cs: CoupledSequence, A_cs: CoupledSequence, psit: Psit
) -> IntegralResult:
    """
    Computes each classic integral H^(n).A^(n) on the whole grid and glues them
    on (T_{n-1}, T_n]. When the two sequences use different stopping times the
    pathwise minimum T^H_n ^ T^A_n is used for both.

    :param H_cs: Coupled sequence for the integrand.
    :param A_cs: Coupled sequence for the integrator.
    :param psit: The PSIT both sequences cover.
    :return: The glued integral with its segments.
    """
    for name, cs in (("integrand", H_cs), ("integrator", A_cs)):
        report = validate_cs(cs, psit)
        if not report.ok:
            raise InvalidArgument(f"invalid {name} sequence: {report.violations[0].describe()}")

    times = _merged_times(H_cs, A_cs)
    h_processes = H_cs.processes + [H_cs.processes[-1]] * (len(times) - len(H_cs))
    a_processes = A_cs.processes + [A_cs.processes[-1]] * (len(times) - len(A_cs))

    segments = []
    start = StoppingTime.constant(0, psit.n_paths)
    for T_n, h, a in zip(times, h_processes, a_processes):
        classic = PathEnsemble(psit.grid, _kernel(h.values, a.values, None), a.jumps)
        segments.append(Segment(start, T_n, ProcessOnB(psit, classic)))
        start = T_n

    glued = glue(CoupledSequence(tuple((s.end, s.classic.ensemble) for s in segments)), psit)
    logger.debug("glued %d classic integrals", len(segments))
    return IntegralResult(glued, tuple(segments))


def stoch_integral(
    H: ProcessOnB,
    X: ProcessOnB,
    fs: Optional[FundamentalSequence] = None,
    breakdown: bool = True,
) -> IntegralResult:
    """
    The stochastic integral on B of H with respect to a semimartingale X.

    On the grid every path has finite variation, so the arithmetic is that of
    ls_integral. The breakdown holds the classic pieces H^{tau_n}.X^{tau_n}
    used on (tau_{n-1}, tau_n], which reassemble to the same process.

    :param H: Integrand on B.
    :param X: Integrator on the same PSIT.
    :param fs: Fundamental sequence for the breakdown; canonical_fs by default.
    :param breakdown: Whether to compute the segments.
    :return: H.X with its segments.
    """
    psit = _shared_psit(H, X)
    direct = ls_integral(H, X).process
    if not breakdown:
        return IntegralResult(direct)

    fs = fs if fs is not None else canonical_fs(psit)
    segments = []
    start = StoppingTime.constant(0, psit.n_paths)
    for tau in fs.times:
        h_stopped = stop(H, tau)
        x_stopped = stop(X, tau)
        classic = PathEnsemble(psit.grid, _kernel(h_stopped.values, x_stopped.values, None), x_stopped.jumps)
        segments.append(Segment(start, tau, ProcessOnB(psit, classic)))
        start = tau

    return IntegralResult(direct, tuple(segments))


def quad_covar(X: ProcessOnB, Y: ProcessOnB) -> QuadraticDecomposition:
    """
    The quadratic covariation on B split into initial, continuous and jump parts.

    total[k] = X_0 Y_0 + sum_{j <= k} dX_j dY_j; the jump part sums the products
    at indices annotated on both processes; continuous = total - initial - jump.

    :param X: Process on B.
    :param Y: Process on the same PSIT.
    :return: The decomposition.
    """
    psit = _shared_psit(X, Y)
    products = increments(X) * increments(Y)
    both = X.jumps & Y.jumps

    initial_values = np.broadcast_to((X.values[:, 0] * Y.values[:, 0])[:, None], products.shape)
    total = initial_values + np.cumsum(products, axis=1)
    jump = np.cumsum(np.where(both, products, 0.0), axis=1)
    continuous = total - initial_values - jump

    return QuadraticDecomposition(
        total=_process(psit, total, both),
        continuous=_process(psit, continuous),
        jump=_process(psit, jump, both),
        initial=_process(psit, np.array(initial_values)),
    )
