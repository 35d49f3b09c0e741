"""
Access point for the outside world to the execution module.
VerificationManager is responsible for selecting the registered checks,
running each of them and collecting their results into a report.
"""
import logging
from typing import Optional

from src.core.config_parser.data import ScenarioConfig

from .checks import select
from .data import CheckContext, CheckStatus, RunReport
from .runner import Runner

logger = logging.getLogger(__name__)


class VerificationManager:
    """
    Runs the verification suite for a scenario.
    """

    def __init__(self, config: ScenarioConfig) -> None:
        self.config = config
        self.context = CheckContext(seed=config.rng.seed, faults=tuple(config.faults), config=config)
        self.runner = Runner(slack=config.run.budget_slack)

    def run(self, pattern: Optional[str] = None) -> RunReport:
        """
        Runs every check whose name contains ``pattern`` (all checks by default).

        :param pattern: Substring filter on check names.
        :return: The results, in registry order.
        """
        specs = select(pattern or "")
        if not specs:
            logger.warning("no check matches %r", pattern)

        results = []
        for spec in specs:
            logger.info("running %s", spec.name)
            result = self.runner.run(spec, self.context)
            logger.info("%s: %s in %.2fs", spec.name, result.status.name, result.wall_time)
            results.append(result)

        report = RunReport(results)
        failed = sum(r.status != CheckStatus.PASS for r in results)
        logger.info("%d checks, %d not passing", len(results), failed)
        return report
