"""
Parser for the JSON scenario file.
Gets the path to the scenario file as an input and returns
a validated ScenarioConfig as an output.


Example:

{
    "grid": {"horizon": 1.0, "steps": 1000},
    "rng": {"seed": 42, "n_paths": 10000},
    "market": {
        "regimes": [{"drift": 0.1, "sigma": 0.2}],
        "default": {"kind": "fixed", "value": 0.5}
    },
    "run": {"mode": "finance"}
}

becomes

ScenarioConfig(
    grid=GridConfig(horizon=1.0, steps=1000),
    market=MarketConfig(
        regimes=[RegimeConfig(drift=0.1, sigma=0.2)],
        s0=1.0,
        x0=1.0,
        default=DefaultConfig(kind="fixed", rate=None, value=0.5),
        terminal=1.0,
        rho=None,
        utility="log",
    ),
    rng=RngConfig(seed=42, n_paths=10000),
    run=RunConfig(mode="finance", multipliers=[0.5, 0.8, 1.0, 1.2, 2.0], ...),
)

Every mapping is strict: an unknown key is rejected and the closest known
key is suggested.
"""
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from src.core.grid_paths.data import TimeGrid
from src.core.grid_paths.generators import validate_correlation
from src.core.utils.errors import ConfigError, InvalidArgument
from src.core.utils.misc import THREADS_ENV_VAR, suggest_key, worker_count

from .data import (
    DefaultConfig,
    GridConfig,
    MarketConfig,
    RegimeConfig,
    RngConfig,
    RunConfig,
    ScenarioConfig,
)

logger = logging.getLogger(__name__)


@dataclass
class CONFIG_SCHEMA:
    """
    Class that represents the json schema for the scenario file.
    """

    TOP: tuple = ("grid", "rng", "market", "run")
    GRID: tuple = ("horizon", "steps")
    RNG: tuple = ("seed", "n_paths")
    MARKET: tuple = ("s0", "x0", "regimes", "default", "terminal", "rho", "utility")
    REGIME: tuple = ("drift", "sigma")
    DEFAULT: tuple = ("kind", "rate", "value")
    RUN: tuple = ("mode", "multipliers", "outputs", "batch_paths", "budget_slack", "inject_faults")
    MODES: tuple = ("simulate", "verify", "finance")
    DEFAULT_KINDS: tuple = ("none", "exponential", "fixed")
    UTILITIES: tuple = ("log",)
    FAULTS: tuple = ("ibp_sign",)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_integer(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class ConfigParser:
    def __init__(self) -> None:
        self._text = ""

    def parse_from_path(self, path: Path, overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
        """
        Reads, overrides and validates a scenario file.

        :param path: Path to the JSON file.
        :param overrides: Dotted keys (e.g. ``rng.seed``) replacing file values before validation.
        :return: The validated configuration.
        :raises ConfigError: for the first problem found.
        """
        try:
            with open(path, "r") as f:
                self._text = f.read()
        except OSError as e:
            raise ConfigError("<file>", f"cannot read {path}: {e.strerror}")

        try:
            data = json.loads(self._text)
        except json.JSONDecodeError as e:
            raise ConfigError("<document>", e.msg, e.lineno)

        return self.parse_from_json(data, overrides)

    def parse_from_json(self, json_data: Any, overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
        if not isinstance(json_data, dict):
            raise ConfigError("<document>", "top level must be an object")
        for dotted, value in (overrides or {}).items():
            self._override(json_data, dotted, value)

        self._check_keys(json_data, CONFIG_SCHEMA.TOP, "")
        grid = self._grid(self._section(json_data, "grid", required=True))
        rng = self._rng(self._section(json_data, "rng"))
        market = self._market(self._section(json_data, "market", required=True), grid)
        run = self._run(self._section(json_data, "run"))

        try:
            threads = worker_count()
        except ValueError as e:
            raise ConfigError(THREADS_ENV_VAR, str(e))

        config = ScenarioConfig(grid=grid, market=market, rng=rng, run=run, threads=threads)
        logger.info("loaded scenario: mode %s, %d paths, %d steps", run.mode, rng.n_paths, grid.steps)
        return config

    def validate(self, path: Path) -> bool:
        try:
            self.parse_from_path(path)
        except ConfigError:
            return False
        return True

    @staticmethod
    def _override(data: dict, dotted: str, value: Any) -> None:
        *parents, key = dotted.split(".")
        node = data
        for parent in parents:
            node = node.setdefault(parent, {})
        node[key] = value

    def _line_of(self, key: str) -> Optional[int]:
        match = re.search(rf'"{re.escape(key)}"\s*:', self._text)
        if match is None:
            return None
        return self._text.count("\n", 0, match.start()) + 1

    def _error(self, key_path: str, message: str) -> ConfigError:
        key = re.split(r"[.\[]", key_path)[-1].rstrip("]") if key_path else ""
        return ConfigError(key_path, message, self._line_of(key) if key else None)

    def _check_keys(self, data: dict, known: Sequence[str], prefix: str) -> None:
        for key in data:
            if key not in known:
                suggestion = suggest_key(key, known)
                hint = f", did you mean {suggestion!r}?" if suggestion else ""
                raise self._error(f"{prefix}{key}", f"unknown key{hint}")

    def _section(self, data: dict, name: str, required: bool = False) -> dict:
        if name not in data:
            if required:
                raise ConfigError(name, "missing required section")
            return {}
        section = data[name]
        if not isinstance(section, dict):
            raise self._error(name, "must be an object")
        return section

    def _number(self, data: dict, key: str, path: str, default: Any = None, positive: bool = False) -> float:
        if key not in data:
            if default is None:
                raise ConfigError(path, "missing required key")
            return default
        value = data[key]
        if not _is_number(value):
            raise self._error(path, f"expected a number, got {type(value).__name__}")
        if positive and not value > 0:
            raise self._error(path, f"must be positive, got {value}")
        return float(value)

    def _integer(self, data: dict, key: str, path: str, default: Any = None, minimum: int = 1) -> int:
        if key not in data:
            if default is None:
                raise ConfigError(path, "missing required key")
            return default
        value = data[key]
        if not _is_integer(value):
            raise self._error(path, f"expected an integer, got {type(value).__name__}")
        if value < minimum:
            raise self._error(path, f"must be at least {minimum}, got {value}")
        return value

    def _grid(self, data: dict) -> GridConfig:
        self._check_keys(data, CONFIG_SCHEMA.GRID, "grid.")
        horizon = self._number(data, "horizon", "grid.horizon", positive=True)
        steps = self._integer(data, "steps", "grid.steps")
        return GridConfig(horizon, steps)

    def _rng(self, data: dict) -> RngConfig:
        self._check_keys(data, CONFIG_SCHEMA.RNG, "rng.")
        seed = self._integer(data, "seed", "rng.seed", default=RngConfig.seed, minimum=0)
        if seed >= 2**64:
            raise self._error("rng.seed", "must fit in 64 bits")
        n_paths = self._integer(data, "n_paths", "rng.n_paths", default=RngConfig.n_paths)
        return RngConfig(seed, n_paths)

    def _regimes(self, data: dict) -> List[RegimeConfig]:
        if "regimes" not in data:
            raise ConfigError("market.regimes", "missing required key")
        raw = data["regimes"]
        if not isinstance(raw, list) or not raw:
            raise self._error("market.regimes", "must be a non-empty list")

        regimes = []
        for i, item in enumerate(raw):
            prefix = f"market.regimes[{i}]"
            if not isinstance(item, dict):
                raise self._error(prefix, "must be an object")
            self._check_keys(item, CONFIG_SCHEMA.REGIME, prefix + ".")
            drift = self._number(item, "drift", prefix + ".drift")
            sigma = self._number(item, "sigma", prefix + ".sigma", positive=True)
            regimes.append(RegimeConfig(drift, sigma))
        return regimes

    def _default(self, data: dict) -> DefaultConfig:
        if "default" not in data:
            return DefaultConfig()
        raw = data["default"]
        if not isinstance(raw, dict):
            raise self._error("market.default", "must be an object")
        self._check_keys(raw, CONFIG_SCHEMA.DEFAULT, "market.default.")

        kind = raw.get("kind", "none")
        if kind not in CONFIG_SCHEMA.DEFAULT_KINDS:
            raise self._error("market.default.kind", f"must be one of {list(CONFIG_SCHEMA.DEFAULT_KINDS)}")
        if kind == "exponential":
            return DefaultConfig(kind, rate=self._number(raw, "rate", "market.default.rate", positive=True))
        if kind == "fixed":
            return DefaultConfig(kind, value=self._number(raw, "value", "market.default.value", positive=True))
        return DefaultConfig()

    def _market(self, data: dict, grid: GridConfig) -> MarketConfig:
        self._check_keys(data, CONFIG_SCHEMA.MARKET, "market.")
        regimes = self._regimes(data)
        s0 = self._number(data, "s0", "market.s0", default=1.0, positive=True)
        x0 = self._number(data, "x0", "market.x0", default=1.0, positive=True)

        terminal = self._number(data, "terminal", "market.terminal", default=grid.horizon, positive=True)
        if terminal > grid.horizon * (1 + 1e-12) or not TimeGrid(grid.horizon, grid.steps).is_node(terminal):
            raise self._error("market.terminal", f"must be a grid node in (0, {grid.horizon}], got {terminal}")

        rho = data.get("rho")
        if rho is not None:
            if not isinstance(rho, list) or not all(isinstance(r, list) for r in rho):
                raise self._error("market.rho", "must be a list of rows")
            if any(not _is_number(v) for row in rho for v in row):
                raise self._error("market.rho", "entries must be numbers")
            if len(rho) != len(regimes) or any(len(row) != len(regimes) for row in rho):
                raise self._error("market.rho", f"must be {len(regimes)}x{len(regimes)}, one row per regime")
            try:
                validate_correlation(rho)
            except InvalidArgument as e:
                raise self._error("market.rho", str(e))

        utility = data.get("utility", "log")
        if utility not in CONFIG_SCHEMA.UTILITIES:
            raise self._error("market.utility", f"only {list(CONFIG_SCHEMA.UTILITIES)} is supported")

        return MarketConfig(
            regimes=regimes,
            s0=s0,
            x0=x0,
            default=self._default(data),
            terminal=terminal,
            rho=rho,
            utility=utility,
        )

    def _run(self, data: dict) -> RunConfig:
        self._check_keys(data, CONFIG_SCHEMA.RUN, "run.")
        defaults = RunConfig()

        mode = data.get("mode", defaults.mode)
        if mode not in CONFIG_SCHEMA.MODES:
            raise self._error("run.mode", f"must be one of {list(CONFIG_SCHEMA.MODES)}, got {mode!r}")

        multipliers = data.get("multipliers", defaults.multipliers)
        if not isinstance(multipliers, list) or not multipliers:
            raise self._error("run.multipliers", "must be a non-empty list")
        for i, c in enumerate(multipliers):
            if not _is_number(c) or not c > 0:
                raise self._error(f"run.multipliers[{i}]", f"must be a positive number, got {c!r}")

        outputs = data.get("outputs", defaults.outputs)
        if not isinstance(outputs, str) or not outputs:
            raise self._error("run.outputs", "must be a non-empty string")

        batch_paths = self._integer(data, "batch_paths", "run.batch_paths", default=defaults.batch_paths)
        budget_slack = self._number(
            data, "budget_slack", "run.budget_slack", default=defaults.budget_slack, positive=True
        )

        faults = data.get("inject_faults", [])
        if not isinstance(faults, list):
            raise self._error("run.inject_faults", "must be a list")
        for i, fault in enumerate(faults):
            if fault not in CONFIG_SCHEMA.FAULTS:
                raise self._error(f"run.inject_faults[{i}]", f"unknown fault {fault!r}")

        return RunConfig(
            mode=mode,
            multipliers=[float(c) for c in multipliers],
            outputs=outputs,
            batch_paths=batch_paths,
            budget_slack=budget_slack,
            inject_faults=list(faults),
        )


def load_config(path: Path, overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    """
    Loads and validates the scenario file at ``path``.

    :param path: Path to the JSON file.
    :param overrides: Dotted keys applied before validation.
    :return: The validated configuration.
    :raises ConfigError: for the first problem found.
    """
    return ConfigParser().parse_from_path(Path(path), overrides)
