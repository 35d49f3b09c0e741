"""
Data classes for the calculus module.
"""
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from src.core.psit.data import CoupledSequence, ProcessOnB, Psit, StoppingTime
from src.core.psit.operations import glue

Array = np.ndarray


@dataclass(frozen=True, eq=False)
class Segment:
    """
    One glued piece of a stochastic integral: the classic integral
    H^{tau_n} . X^{tau_n}, used on (start, end].
    """

    start: StoppingTime
    end: StoppingTime
    classic: ProcessOnB


@dataclass(frozen=True, eq=False)
class IntegralResult:
    """
    An integral on B together with its per-segment breakdown (possibly empty).
    Its value at index 0 is H_0 * X_0.
    """

    process: ProcessOnB
    segments: Tuple[Segment, ...] = ()

    def reassemble(self, psit: Psit) -> ProcessOnB:
        """
        Glues the segment breakdown back into one process on B.
        """
        cs = CoupledSequence(tuple((s.end, s.classic.ensemble) for s in self.segments))
        return glue(cs, psit)


@dataclass(frozen=True, eq=False)
class QuadraticDecomposition:
    """
    [X, Y] = X_0 Y_0 + <X^c, Y^c> + sum(dX dY) at every B index.
    """

    total: ProcessOnB
    continuous: ProcessOnB
    jump: ProcessOnB
    initial: ProcessOnB

    def additivity_gap(self) -> float:
        """Largest |total - initial - continuous - jump| on B."""
        gap = self.total.values - self.initial.values - self.continuous.values - self.jump.values
        return float(np.max(np.abs(np.where(self.total.mask, gap, 0.0))))


@dataclass(frozen=True)
class ScalarMap:
    """
    A C^2 map on the reals given by vectorized callables f, f', f''.
    """

    f: Callable[[Array], Array]
    df: Callable[[Array], Array]
    d2f: Callable[[Array], Array]
    name: str = ""


@dataclass(frozen=True)
class VectorMap:
    """
    A C^2 map on R^d. Each callable receives a tuple of d arrays:
    ``grad`` returns d arrays, ``hess`` returns a d x d nested tuple of arrays.
    """

    F: Callable[[Tuple[Array, ...]], Array]
    grad: Callable[[Tuple[Array, ...]], Tuple[Array, ...]]
    hess: Callable[[Tuple[Array, ...]], Tuple[Tuple[Array, ...], ...]]
    name: str = ""
