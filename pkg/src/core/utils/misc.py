"""
Contains miscellaneous functions.
"""
import difflib
import math
import os
from typing import Iterable, Optional

import numpy as np

THREADS_ENV_VAR = "PSIT_THREADS"


def worker_count(default: Optional[int] = None) -> int:
    """
    Reads the worker cap from the PSIT_THREADS environment variable.

    :param default: Value used when the variable is unset. Falls back to the CPU count.
    :return: A positive number of workers.
    """
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return default if default is not None else (os.cpu_count() or 1)

    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")

    if value < 1:
        raise ValueError(f"{THREADS_ENV_VAR} must be a positive integer, got {raw!r}")

    return value


def format_float(value: float) -> str:
    """
    Formats a float with 17 significant digits so it round-trips exactly.

    :param value: The value to format.
    :return: The formatted value.
    """
    return f"{value:.17g}"


def suggest_key(key: str, known: Iterable[str]) -> Optional[str]:
    """
    Finds the closest known key for a misspelled one.

    :param key: The unknown key.
    :param known: The keys that are accepted at this level.
    :return: The closest match or None.
    """
    matches = difflib.get_close_matches(key, list(known), n=1, cutoff=0.6)
    return matches[0] if matches else None


def stable_mean_and_error(values: np.ndarray) -> tuple:
    """
    Sample mean and standard error with numpy's pairwise summation.
    The result depends only on the order of ``values``.

    :param values: One-dimensional array of per-path observations.
    :return: (mean, standard error); the error is 0 for fewer than two values.
    """
    n = values.shape[0]
    if n == 0:
        return math.nan, math.nan

    mean = float(np.sum(values) / n)
    if n < 2:
        return mean, 0.0

    centered = values - mean
    variance = float(np.sum(centered * centered) / (n - 1))
    return mean, math.sqrt(variance / n)


def fitted_order(steps: Iterable[float], errors: Iterable[float]) -> float:
    """
    Least-squares slope of log(error) against log(step).

    :param steps: Step sizes of a refinement ladder.
    :param errors: Error measured at each step size.
    :return: The fitted convergence order.
    """
    x = np.log(np.asarray(list(steps), dtype=float))
    y = np.log(np.asarray(list(errors), dtype=float))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
