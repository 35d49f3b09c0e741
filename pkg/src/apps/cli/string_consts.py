"""
Constants for strings used in the program.
"""

from dataclasses import dataclass


@dataclass
class REPORT_MESSAGES:
    """
    Constants for report messages strings.
    """

    CHECK_PASSED: str = "passed"
    CHECK_FAILED: str = "failed"
    ALL_SUCCESSFUL: str = "All checks passed :)"
    SOME_FAILED: str = "Some checks did not pass :("
    ERROR: str = "raised an error"
    TIMEOUT: str = "ran over its time budget"
    NO_CHECKS: str = "No check matches the filter."


@dataclass
class COLOR_CODES:
    """
    Constants for color codes.
    """

    HEADER: str = "\033[95m"
    OK: str = "\033[96m"
    SUCCESS: str = "\033[92m"
    WARNING: str = "\033[93m"
    FAIL: str = "\033[91m"
    END: str = "\033[0m"


@dataclass
class EXIT_CODES:
    """
    Process exit codes.
    """

    SUCCESS: int = 0
    CHECK_FAILURE: int = 1
    CONFIG_ERROR: int = 2
    RUNTIME_ERROR: int = 3
