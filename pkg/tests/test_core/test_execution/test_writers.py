import json

from src.core.execution.data import FinanceOutcome, SimulationOutcome
from src.core.execution.writers import (
    FINANCE_FILES,
    SIMULATE_FILES,
    render_csv,
    render_finance,
    render_json,
    render_simulation,
    write_files,
)


def test_render_csv_uses_round_trip_floats():
    text = render_csv(("c", "value", "n"), [(1.0, 0.1 + 0.2, 3)])
    header, row = text.splitlines()
    assert header == "c,value,n"
    assert float(row.split(",")[1]) == 0.1 + 0.2
    assert row.endswith(",3")


def test_render_json_round_trips():
    data = {"schema_version": 1, "estimate": 0.1 + 0.2}
    text = render_json(data)
    assert text.endswith("\n")
    assert json.loads(text) == data


def test_render_finance_files():
    outcome = FinanceOutcome([(1.0, 0.125, 0.01, 10)], [(0.0, 1.0, 0.0, 0.0, 2.5, 1.0)], {"schema_version": 1})
    files = render_finance(outcome)
    assert tuple(files) == FINANCE_FILES
    assert files["finance_utility.csv"].startswith("c,expected_log_utility,std_error,n_valid_paths\n")
    assert files["finance_sample_path.csv"].startswith("t,S,w,Z,pi,X\n")


def test_write_files(tmp_path):
    outcome = SimulationOutcome([(0.0, 1.0, 0.0, 0.0)], {"schema_version": 1})
    written = write_files(render_simulation(outcome), tmp_path / "out")
    assert [p.name for p in written] == list(SIMULATE_FILES)
    assert json.loads((tmp_path / "out" / "simulate_summary.json").read_text()) == {"schema_version": 1}
