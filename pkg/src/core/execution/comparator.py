"""
Implementation of the ToleranceComparator class.
"""
import math

from .data import CheckStatus, Measurement


class ToleranceComparator:
    """
    Used to compare what a check measured with what it must satisfy.
    """

    def compare(self, measurement: Measurement) -> CheckStatus:
        """
        Compares the measured value with the tolerance window.

        :param measurement: The data to compare.
        :return: PASS or FAIL.
        """
        measured = measurement.measured
        if measured is None or math.isnan(measured):
            return CheckStatus.FAIL
        if not measurement.condition:
            return CheckStatus.FAIL
        if measured > measurement.tolerance:
            return CheckStatus.FAIL
        if measurement.lower is not None and measured < measurement.lower:
            return CheckStatus.FAIL
        return CheckStatus.PASS
