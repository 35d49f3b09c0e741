"""
CSV and JSON serialization of run outputs.

CSV floats carry 17 significant digits and JSON floats use Python's
round-trip repr, so equal results always give byte-identical files.
"""
import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

from src.core.utils.misc import format_float

from .data import FinanceOutcome, RunReport, SimulationOutcome

logger = logging.getLogger(__name__)

UTILITY_HEADER = ("c", "expected_log_utility", "std_error", "n_valid_paths")
FINANCE_PATH_HEADER = ("t", "S", "w", "Z", "pi", "X")
SIMULATE_PATH_HEADER = ("t", "S", "w", "Z")

FINANCE_FILES = ("finance_utility.csv", "finance_sample_path.csv", "finance_summary.json")
SIMULATE_FILES = ("simulate_sample_path.csv", "simulate_summary.json")
VERIFY_FILE = "verify_report.json"


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def render_json(data: Dict[str, Any]) -> str:
    return json.dumps(data, indent=2) + "\n"


def render_finance(outcome: FinanceOutcome) -> Dict[str, str]:
    """File name -> content for the finance mode."""
    return {
        FINANCE_FILES[0]: render_csv(UTILITY_HEADER, outcome.utility_rows),
        FINANCE_FILES[1]: render_csv(FINANCE_PATH_HEADER, outcome.sample_rows),
        FINANCE_FILES[2]: render_json(outcome.summary),
    }


def render_simulation(outcome: SimulationOutcome) -> Dict[str, str]:
    """File name -> content for the simulate mode."""
    return {
        SIMULATE_FILES[0]: render_csv(SIMULATE_PATH_HEADER, outcome.sample_rows),
        SIMULATE_FILES[1]: render_json(outcome.summary),
    }


def render_report(report: RunReport) -> Dict[str, str]:
    return {VERIFY_FILE: render_json(report.to_dict())}


def write_files(files: Dict[str, str], out_dir: Path) -> List[Path]:
    """
    Writes rendered files into ``out_dir``, creating it when needed.

    :param files: File name -> content.
    :param out_dir: Target directory.
    :return: The written paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, content in files.items():
        path = out_dir / name
        with open(path, "w", newline="") as f:
            f.write(content)
        written.append(path)
        logger.info("wrote %s", path)
    return written
