"""
Data classes for the finance module.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.grid_paths.data import PathEnsemble
from src.core.psit.data import ProcessOnB, Psit, StoppingTime
from src.core.utils.errors import InvalidArgument, PreconditionViolation
from src.core.utils.misc import stable_mean_and_error

DEFAULT_KINDS = ("none", "exponential", "fixed")


@dataclass(frozen=True)
class Regime:
    """
    Drift (1/time) and volatility (1/sqrt(time)) of the driver on one segment.
    """

    drift: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise InvalidArgument(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class DefaultSpec:
    """
    Law of the default time: never, exponential with ``rate`` or fixed at ``value``.
    """

    kind: str = "none"
    rate: Optional[float] = None
    value: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in DEFAULT_KINDS:
            raise InvalidArgument(f"default kind must be one of {DEFAULT_KINDS}, got {self.kind!r}")
        if self.kind == "exponential" and not (self.rate is not None and self.rate > 0):
            raise InvalidArgument(f"exponential default needs a positive rate, got {self.rate}")
        if self.kind == "fixed" and not (self.value is not None and self.value > 0):
            raise InvalidArgument(f"fixed default needs a positive value, got {self.value}")


@dataclass(frozen=True, eq=False)
class RegimeSpec:
    """
    Everything that defines the market's driver: the regimes used on successive
    segments (T_{n-1}, T_n], the default law, the terminal time T and the
    correlation of the per-regime Brownian drivers.

    Segments beyond the last regime keep using the last regime and its driver.
    """

    regimes: Tuple[Regime, ...]
    default: DefaultSpec = field(default_factory=DefaultSpec)
    terminal: float = 1.0
    rho: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "regimes", tuple(self.regimes))
        if not self.regimes:
            raise InvalidArgument("at least one regime is needed")
        rho = np.eye(len(self.regimes)) if self.rho is None else np.asarray(self.rho, dtype=float)
        if rho.shape != (len(self.regimes), len(self.regimes)):
            raise InvalidArgument(f"rho must be {len(self.regimes)}x{len(self.regimes)}, got {rho.shape}")
        object.__setattr__(self, "rho", rho)

    def regime(self, segment: int) -> Regime:
        return self.regimes[min(segment, len(self.regimes) - 1)]

    @property
    def is_constant(self) -> bool:
        return all(r == self.regimes[0] for r in self.regimes)


@dataclass(frozen=True, eq=False)
class Market:
    """
    The market on B: switching times T_n, driver Z, glued Brownian w and price S.

    ``drivers`` and ``switching_times`` are kept so the coupled sequences
    behind Z and w can be rebuilt and checked after the fact.
    """

    spec: RegimeSpec
    psit: Psit
    switching_times: Tuple[StoppingTime, ...]
    drivers: Tuple[PathEnsemble, ...]
    Z: ProcessOnB
    w: ProcessOnB
    S: ProcessOnB
    s0: float

    @property
    def n_paths(self) -> int:
        return self.psit.n_paths

    @property
    def horizon_index(self) -> np.ndarray:
        """Per-path usable horizon: debut if closed, debut - 1 if open."""
        return self.psit.last_index

    @property
    def horizon_time(self) -> np.ndarray:
        return self.psit.grid.times[self.horizon_index]


@dataclass(frozen=True, eq=False)
class Strategy:
    """
    Shares held in the asset and the wealth they induce.

    :param theta: Shares, zero at index 0.
    :param wealth: X = x0 + theta.S on B.
    :param invested: Amount held in the asset (theta * S), when known.
    :param fraction: Share of its own wealth the strategy keeps in the asset, when it is a
        constant-fraction strategy.
    """

    theta: ProcessOnB
    wealth: ProcessOnB
    x0: float
    invested: Optional[ProcessOnB] = None
    fraction: Optional[float] = None

    def __post_init__(self) -> None:
        nonzero = self.theta.values[:, 0] != 0.0
        if nonzero.any():
            path = int(np.argmax(nonzero))
            raise PreconditionViolation(
                f"initial shares must be 0, path {path} holds {self.theta.values[path, 0]}"
            )


@dataclass(frozen=True, eq=False)
class UtilityEstimate:
    """
    Expected log utility at the usable horizon.

    :param per_path: ln X at the horizon, NaN on excluded paths.
    :param valid: Per-path flag, False where wealth is not strictly positive on B.
    """

    per_path: np.ndarray
    valid: np.ndarray

    @property
    def n_valid(self) -> int:
        return int(np.count_nonzero(self.valid))

    @property
    def n_excluded(self) -> int:
        return int(self.valid.shape[0] - self.n_valid)

    @property
    def estimate(self) -> float:
        return stable_mean_and_error(self.per_path[self.valid])[0]

    @property
    def std_error(self) -> float:
        return stable_mean_and_error(self.per_path[self.valid])[1]

    @staticmethod
    def pooled(batches: Sequence["UtilityEstimate"]) -> "UtilityEstimate":
        """Concatenates batch results in path order."""
        return UtilityEstimate(
            np.concatenate([b.per_path for b in batches]),
            np.concatenate([b.valid for b in batches]),
        )


@dataclass(frozen=True, eq=False)
class ScaleSweep:
    """
    Expected log utility of c * theta for each multiplier c.
    """

    multipliers: Tuple[float, ...]
    estimates: Tuple[UtilityEstimate, ...]

    @property
    def argmax(self) -> float:
        values = [e.estimate for e in self.estimates]
        return self.multipliers[int(np.nanargmax(values))]

    def at(self, multiplier: float) -> UtilityEstimate:
        return self.estimates[self.multipliers.index(multiplier)]

    @staticmethod
    def pooled(batches: List["ScaleSweep"]) -> "ScaleSweep":
        multipliers = batches[0].multipliers
        estimates = tuple(
            UtilityEstimate.pooled([b.estimates[i] for b in batches]) for i in range(len(multipliers))
        )
        return ScaleSweep(multipliers, estimates)
