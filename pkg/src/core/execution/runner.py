"""
Defines the Runner class for executing one verification check.
"""
import logging
import time

from .comparator import ToleranceComparator
from .data import CheckContext, CheckResult, CheckSpec, CheckStatus

logger = logging.getLogger(__name__)


class Runner:
    """
    Runs a check and returns its result, as well as any error that
    occurred during the execution.

    Checks run in-process because ensemble generation may start its own
    worker pool. The budget is enforced after the fact: a check that passes
    but takes longer than ``budget * slack`` seconds is reported as TIMEOUT.
    """

    def __init__(self, slack: float = 5.0) -> None:
        self.slack = slack
        self.comparator = ToleranceComparator()

    def run(self, spec: CheckSpec, context: CheckContext) -> CheckResult:
        """
        Runs the check and compares its measurement.

        :param spec: The check to run.
        :param context: Seed, faults and shared work of this run.
        :return: The result.
        """
        start = time.perf_counter()
        try:
            measurement = spec.function(context)
        except Exception as e:
            wall_time = time.perf_counter() - start
            logger.warning("check %s raised %s: %s", spec.name, type(e).__name__, e)
            return CheckResult(spec.name, CheckStatus.ERROR, wall_time=wall_time, message=f"{type(e).__name__}: {e}")

        wall_time = time.perf_counter() - start
        status = self.comparator.compare(measurement)
        if status == CheckStatus.PASS and wall_time > spec.budget * self.slack:
            status = CheckStatus.TIMEOUT

        if status != CheckStatus.PASS:
            logger.warning("check %s: %s (measured %r)", spec.name, status.name, measurement.measured)

        return CheckResult(
            name=spec.name,
            status=status,
            measured=measurement.measured,
            tolerance=measurement.tolerance,
            lower=measurement.lower,
            paths_used=measurement.paths_used,
            wall_time=wall_time,
            message=measurement.note,
        )
