import json

import pytest

from src.core.config_parser.parsers import ConfigParser, load_config
from src.core.utils.errors import ConfigError
from src.core.utils.misc import THREADS_ENV_VAR

MINIMAL = {
    "grid": {"horizon": 1.0, "steps": 100},
    "market": {"regimes": [{"drift": 0.1, "sigma": 0.2}]},
}


def _with(**sections):
    data = json.loads(json.dumps(MINIMAL))
    for name, section in sections.items():
        data[name] = section
    return data


def test_minimal_config_gets_defaults():
    config = ConfigParser().parse_from_json(_with())
    assert config.rng.seed == 42
    assert config.rng.n_paths == 1000
    assert config.run.multipliers == [0.5, 0.8, 1.0, 1.2, 2.0]
    assert config.run.mode == "finance"
    assert config.market.terminal == 1.0
    assert config.market.default.kind == "none"


def test_negative_sigma_names_key_path():
    data = _with(market={"regimes": [{"drift": 0.1, "sigma": -1}]})
    with pytest.raises(ConfigError) as info:
        ConfigParser().parse_from_json(data)
    assert info.value.key_path == "market.regimes[0].sigma"


def test_unknown_key_suggests_closest(tmp_path):
    path = tmp_path / "scenario.json"
    data = _with(market={"regimes": [{"drft": 0.1, "sigma": 0.2}]})
    path.write_text(json.dumps(data, indent=2))
    with pytest.raises(ConfigError, match="did you mean 'drift'") as info:
        ConfigParser().parse_from_path(path)
    assert info.value.key_path == "market.regimes[0].drft"
    assert info.value.line is not None


def test_syntax_error_carries_line(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text('{\n  "grid": {"horizon": 1.0,\n  "steps": }\n}\n')
    with pytest.raises(ConfigError) as info:
        ConfigParser().parse_from_path(path)
    assert info.value.line == 3


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        load_config("does/not/exist.json")


def test_overrides_apply_before_validation():
    config = ConfigParser().parse_from_json(_with(), {"rng.seed": 7, "rng.n_paths": 12})
    assert (config.rng.seed, config.rng.n_paths) == (7, 12)
    with pytest.raises(ConfigError) as info:
        ConfigParser().parse_from_json(_with(), {"rng.n_paths": 0})
    assert info.value.key_path == "rng.n_paths"


@pytest.mark.parametrize(
    "section, value, key_path",
    [
        ("grid", {"horizon": 0, "steps": 10}, "grid.horizon"),
        ("grid", {"horizon": 1.0, "steps": 2.5}, "grid.steps"),
        ("rng", {"seed": -1}, "rng.seed"),
        ("run", {"mode": "trade"}, "run.mode"),
        ("run", {"multipliers": []}, "run.multipliers"),
        ("run", {"inject_faults": ["everything"]}, "run.inject_faults[0]"),
    ],
)
def test_constraint_violations(section, value, key_path):
    with pytest.raises(ConfigError) as info:
        ConfigParser().parse_from_json(_with(**{section: value}))
    assert info.value.key_path == key_path


def test_market_constraints():
    market = {"regimes": [{"drift": 0.1, "sigma": 0.2}], "terminal": 0.555}
    with pytest.raises(ConfigError, match="grid node"):
        ConfigParser().parse_from_json(_with(market=market))

    market = {"regimes": [{"drift": 0.1, "sigma": 0.2}, {"drift": 0.0, "sigma": 0.3}], "rho": [[1, 2], [2, 1]]}
    with pytest.raises(ConfigError) as info:
        ConfigParser().parse_from_json(_with(market=market))
    assert info.value.key_path == "market.rho"

    market = {"regimes": [{"drift": 0.1, "sigma": 0.2}], "default": {"kind": "exponential"}}
    with pytest.raises(ConfigError) as info:
        ConfigParser().parse_from_json(_with(market=market))
    assert info.value.key_path == "market.default.rate"


def test_default_and_rho_are_read():
    market = {
        "regimes": [{"drift": 0.1, "sigma": 0.2}, {"drift": 0.0, "sigma": 0.3}],
        "rho": [[1, 0.5], [0.5, 1]],
        "default": {"kind": "fixed", "value": 0.5},
    }
    config = ConfigParser().parse_from_json(_with(market=market))
    spec = config.market.to_regime_spec()
    assert spec.rho.tolist() == [[1.0, 0.5], [0.5, 1.0]]
    assert spec.default.value == 0.5
    assert not spec.is_constant


def test_malformed_thread_count(monkeypatch):
    monkeypatch.setenv(THREADS_ENV_VAR, "many")
    with pytest.raises(ConfigError) as info:
        ConfigParser().parse_from_json(_with())
    assert info.value.key_path == THREADS_ENV_VAR


def test_validate(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(MINIMAL))
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    parser = ConfigParser()
    assert parser.validate(good)
    assert not parser.validate(bad)
