"""
Data classes for execution module.
"""
import math
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from src.core.config_parser.data import ScenarioConfig
from src.core.grid_paths.data import RngSpec

SCHEMA_VERSION = 1


class CheckStatus(Enum):
    """
    Possible results of a verification check.
    """

    PASS = auto()
    FAIL = auto()
    ERROR = auto()
    TIMEOUT = auto()


@dataclass
class Measurement:
    """
    What a check measured and what it must satisfy:
    lower <= measured <= tolerance, and ``condition`` must hold.
    """

    measured: float
    tolerance: float = math.inf
    paths_used: int = 0
    lower: Optional[float] = None
    condition: bool = True
    note: str = ""


@dataclass
class CheckContext:
    """
    Input shared by every check of one verification run.
    """

    seed: int = 42
    faults: Tuple[str, ...] = ()
    config: Optional[ScenarioConfig] = None
    _memo: Dict[str, Any] = field(default_factory=dict)

    @property
    def rng(self) -> RngSpec:
        return RngSpec(self.seed)

    def memo(self, key: str, factory: Callable[[], Any]) -> Any:
        """Computes ``factory()`` once per run, for work several checks share."""
        if key not in self._memo:
            self._memo[key] = factory()
        return self._memo[key]


@dataclass(frozen=True)
class CheckSpec:
    """
    A registered check: its name, the function producing its measurement and
    its runtime budget in seconds.
    """

    name: str
    function: Callable[[CheckContext], Measurement]
    budget: float


def _json_number(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


@dataclass
class CheckResult:
    """
    Output data of Runner for one check.
    """

    name: str
    status: CheckStatus
    measured: Optional[float] = None
    tolerance: Optional[float] = None
    lower: Optional[float] = None
    paths_used: int = 0
    wall_time: float = 0.0
    message: str = ""

    def to_dict(self) -> Dict[str, Union[str, int, float, List, None]]:
        """
        Converts the object to a dictionary.
        :return: A dictionary representation of the object.
        """
        tolerance: Union[float, List, None] = _json_number(self.tolerance)
        if self.lower is not None:
            tolerance = [_json_number(self.lower), tolerance]
        return {
            "name": self.name,
            "status": self.status.name,
            "measured": _json_number(self.measured),
            "tolerance": tolerance,
            "paths_used": self.paths_used,
            "wall_time": self.wall_time,
        }


@dataclass
class RunReport:
    """
    Every check run in verify mode, in registry order.
    """

    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.status == CheckStatus.PASS for r in self.results)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "passed": self.passed,
            "checks": [r.to_dict() for r in self.results],
        }


@dataclass
class FinanceOutcome:
    """
    Output of the finance mode: the utility table, path 0 and the summary.
    """

    utility_rows: List[Tuple[float, float, float, int]]
    sample_rows: List[Tuple[float, ...]]
    summary: Dict[str, Any]


@dataclass
class SimulationOutcome:
    """
    Output of the simulate mode: path 0 and horizon statistics.
    """

    sample_rows: List[Tuple[float, ...]]
    summary: Dict[str, Any]
