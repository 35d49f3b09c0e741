"""
Defines Python representations of the JSON scenario files.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from src.core.finance.data import DefaultSpec, Regime, RegimeSpec
from src.core.grid_paths.data import RngSpec, TimeGrid


@dataclass
class GridConfig:
    horizon: float
    steps: int

    def to_grid(self) -> TimeGrid:
        return TimeGrid(self.horizon, self.steps)


@dataclass
class RngConfig:
    seed: int = 42
    n_paths: int = 1000

    def to_rng(self) -> RngSpec:
        return RngSpec(self.seed)


@dataclass
class RegimeConfig:
    drift: float
    sigma: float


@dataclass
class DefaultConfig:
    kind: str = "none"
    rate: Optional[float] = None
    value: Optional[float] = None


@dataclass
class MarketConfig:
    """
    Market section. ``terminal`` and ``rho`` are filled in by the parser when
    absent (grid horizon and the identity).
    """

    regimes: List[RegimeConfig]
    s0: float = 1.0
    x0: float = 1.0
    default: DefaultConfig = field(default_factory=DefaultConfig)
    terminal: Optional[float] = None
    rho: Optional[List[List[float]]] = None
    utility: str = "log"

    def to_regime_spec(self) -> RegimeSpec:
        return RegimeSpec(
            regimes=tuple(Regime(r.drift, r.sigma) for r in self.regimes),
            default=DefaultSpec(self.default.kind, self.default.rate, self.default.value),
            terminal=self.terminal,
            rho=None if self.rho is None else np.array(self.rho, dtype=float),
        )


@dataclass
class RunConfig:
    mode: str = "finance"
    multipliers: List[float] = field(default_factory=lambda: [0.5, 0.8, 1.0, 1.2, 2.0])
    outputs: str = "output"
    batch_paths: int = 1000
    budget_slack: float = 5.0
    inject_faults: List[str] = field(default_factory=list)


@dataclass
class ScenarioConfig:
    """
    Complete scenario configuration.
    """

    grid: GridConfig
    market: MarketConfig
    rng: RngConfig = field(default_factory=RngConfig)
    run: RunConfig = field(default_factory=RunConfig)
    threads: int = 1

    @property
    def faults(self) -> Tuple[str, ...]:
        return tuple(self.run.inject_faults)
