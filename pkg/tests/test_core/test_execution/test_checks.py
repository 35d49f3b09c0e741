import pytest

from src.core.execution.checks import CHECKS, select
from src.core.execution.data import CheckContext, CheckStatus
from src.core.execution.runner import Runner

ACCEPTANCE = [
    "ibp.exact",
    "ito.square",
    "ito.product",
    "integral.neutrality",
    "integral.linearity",
    "integral.associativity",
    "integral.jump",
    "integral.stop_commutation",
    "glue.oracle",
    "qv.brownian",
    "ito.rate",
    "ito.multi_rate",
    "integral.martingale",
    "exp.rate",
    "exp.sde_residual",
    "finance.switching",
    "finance.horizon_restriction",
    "finance.merton",
    "finance.merton_pathwise",
    "finance.scale_argmax",
    "finance.random_horizon",
    "finance.reproducibility",
]


def _run(name, context=None):
    (spec,) = [s for s in CHECKS if s.name == name]
    return Runner().run(spec, context or CheckContext())


def test_every_check_is_registered_once():
    names = [spec.name for spec in CHECKS]
    assert len(names) == len(set(names))
    assert set(ACCEPTANCE) <= set(names)


def test_select_by_substring():
    names = [spec.name for spec in select("ito")]
    assert names and all("ito" in name for name in names)
    assert select("") == CHECKS


def test_exact_identities_pass():
    for name in ("ibp.exact", "ito.square", "ito.product", "integral.neutrality", "integral.jump"):
        result = _run(name)
        assert result.status == CheckStatus.PASS, (name, result.measured)


def test_flipped_sign_fails_ibp():
    result = _run("ibp.exact", CheckContext(faults=("ibp_sign",)))
    assert result.status == CheckStatus.FAIL
    assert result.measured > 1e-10


def test_glue_oracle_is_exact():
    result = _run("glue.oracle")
    assert result.status == CheckStatus.PASS
    assert result.measured == 0.0


def test_switching_consistency():
    result = _run("finance.switching")
    assert result.status == CheckStatus.PASS
    assert result.paths_used == 1000


@pytest.fixture(scope="module")
def shared_context():
    return CheckContext(seed=42)


@pytest.mark.parametrize(
    "name",
    [
        "ito.rate",
        "exp.rate",
        "finance.merton",
        "finance.merton_pathwise",
        "finance.scale_argmax",
        "finance.random_horizon",
    ],
)
def test_statistical_checks_pass(name, shared_context):
    (spec,) = [s for s in CHECKS if s.name == name]
    result = Runner(slack=float("inf")).run(spec, shared_context)
    assert result.status == CheckStatus.PASS, (name, result.measured, result.message)


def test_merton_pathwise_has_margin(shared_context):
    result = _run("finance.merton_pathwise", shared_context)
    assert result.measured < 0.7 * result.tolerance
