"""
Defines the result renderer.

The result renderer is responsible for rendering the outcome of one
verification check, and the summaries of the finance and simulate modes,
as human-readable lines.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

from src.apps.cli.string_consts import COLOR_CODES, REPORT_MESSAGES
from src.core.execution.data import CheckResult, CheckStatus, RunReport


def _number(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.6g}"


def _window(result: CheckResult) -> str:
    if result.lower is not None:
        return f"[{_number(result.lower)}, {_number(result.tolerance)}]"
    return f"<= {_number(result.tolerance)}"


class ResultRendererStrategy(ABC):
    """
    Base class for all result renderer strategies.
    """

    @abstractmethod
    def render(self, result: CheckResult, i: int) -> str:
        """
        Renders the result of a check.
        :param result: The result to render.
        :param i: Position of the check in the report.
        :return: The rendered result.
        """


class ResultRendererStrategyPass(ResultRendererStrategy):
    def render(self, result: CheckResult, i: int) -> str:
        return (
            f"{COLOR_CODES.OK}#{i} {result.name} {REPORT_MESSAGES.CHECK_PASSED}: "
            f"measured {_number(result.measured)} {_window(result)} "
            f"({result.paths_used} paths, {result.wall_time:.2f}s){COLOR_CODES.END}"
        )


class ResultRendererStrategyFail(ResultRendererStrategy):
    def render(self, result: CheckResult, i: int) -> str:
        return (
            f"{COLOR_CODES.FAIL}#{i} {result.name} {REPORT_MESSAGES.CHECK_FAILED}: "
            f"measured {_number(result.measured)}, expected {_window(result)}"
            f"{COLOR_CODES.END}"
        )


class ResultRendererStrategyError(ResultRendererStrategy):
    def render(self, result: CheckResult, i: int) -> str:
        return f"{COLOR_CODES.FAIL}#{i} {result.name} {REPORT_MESSAGES.ERROR}: {result.message}{COLOR_CODES.END}"


class ResultRendererStrategyTimeout(ResultRendererStrategy):
    def render(self, result: CheckResult, i: int) -> str:
        return (
            f"{COLOR_CODES.WARNING}#{i} {result.name} {REPORT_MESSAGES.TIMEOUT}: "
            f"{result.wall_time:.2f}s{COLOR_CODES.END}"
        )


class ResultRenderer:
    """
    Renders check results using the appropriate strategy.
    """

    strategies = {
        CheckStatus.PASS: ResultRendererStrategyPass(),
        CheckStatus.FAIL: ResultRendererStrategyFail(),
        CheckStatus.ERROR: ResultRendererStrategyError(),
        CheckStatus.TIMEOUT: ResultRendererStrategyTimeout(),
    }

    def render(self, result: CheckResult, i: int) -> None:
        """
        Chooses the appropriate strategy and prints the result of a check.

        :param result: The result to render.
        :param i: Position of the check in the report.
        """
        if result.status not in self.strategies:
            raise ValueError(f"Invalid check status {result.status}")
        print(self.strategies[result.status].render(result, i))

    def render_report(self, report: RunReport) -> None:
        if not report.results:
            print(REPORT_MESSAGES.NO_CHECKS)
            return
        passed = sum(r.status == CheckStatus.PASS for r in report.results)
        print(f"Passed checks: {passed}/{len(report.results)}")
        for i, result in enumerate(report.results):
            self.render(result, i + 1)
        if report.passed:
            print(f"{COLOR_CODES.SUCCESS}{REPORT_MESSAGES.ALL_SUCCESSFUL}{COLOR_CODES.END}")
        else:
            print(f"{COLOR_CODES.FAIL}{REPORT_MESSAGES.SOME_FAILED}{COLOR_CODES.END}")

    def render_summary(self, title: str, summary: Dict[str, Any]) -> None:
        print(f"{COLOR_CODES.HEADER}{title}{COLOR_CODES.END}")
        width = max(len(key) for key in summary)
        for key, value in summary.items():
            shown = _number(value) if isinstance(value, float) else str(value)
            print(f"  {key.ljust(width)}  {shown}")
