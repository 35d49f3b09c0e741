import time

from src.core.execution.data import CheckContext, CheckSpec, CheckStatus, Measurement, RunReport
from src.core.execution.runner import Runner


def test_run_pass():
    spec = CheckSpec("demo.pass", lambda ctx: Measurement(0.0, 1.0, paths_used=3), budget=10.0)
    result = Runner().run(spec, CheckContext())
    assert result.status == CheckStatus.PASS
    assert result.paths_used == 3
    assert result.wall_time >= 0.0


def test_run_converts_exceptions_to_error():
    def broken(ctx):
        raise ValueError("bad fixture")

    result = Runner().run(CheckSpec("demo.error", broken, budget=1.0), CheckContext())
    assert result.status == CheckStatus.ERROR
    assert "ValueError: bad fixture" in result.message


def test_run_timeout_after_slack():
    def slow(ctx):
        time.sleep(0.05)
        return Measurement(0.0, 1.0)

    result = Runner(slack=1.0).run(CheckSpec("demo.slow", slow, budget=0.001), CheckContext())
    assert result.status == CheckStatus.TIMEOUT


def test_context_memo_runs_factory_once():
    calls = []
    context = CheckContext()
    for _ in range(3):
        context.memo("key", lambda: calls.append(1) or len(calls))
    assert calls == [1]


def test_report_dict():
    ok = Runner().run(CheckSpec("a", lambda ctx: Measurement(0.5, 0.65, lower=0.35), 1.0), CheckContext())
    bad = Runner().run(CheckSpec("b", lambda ctx: Measurement(2.0, 1.0), 1.0), CheckContext())
    report = RunReport([ok, bad])
    data = report.to_dict()
    assert data["schema_version"] == 1
    assert data["passed"] is False
    assert data["checks"][0]["tolerance"] == [0.35, 0.65]
    assert data["checks"][1]["status"] == "FAIL"
    assert set(data["checks"][0]) == {"name", "status", "measured", "tolerance", "paths_used", "wall_time"}
