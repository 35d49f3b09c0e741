"""
Exception types shared by the core packages.
"""
from typing import Optional


class InvalidArgument(ValueError):
    """
    Raised when an operation receives input it cannot work with.
    The message always carries the witness (path, index, pair, ...).
    """


class PreconditionViolation(ValueError):
    """
    Raised when an input is well formed but breaks an operation's precondition,
    e.g. a stopping time that leaves the set it is supposed to live on.
    """


class PricePositivityError(InvalidArgument):
    def __init__(self, path: int, index: int, increment: float) -> None:
        self.path = path
        self.index = index
        self.increment = increment
        super().__init__(
            f"price would leave (0, inf): path {path}, index {index}, "
            f"1 + dZ = {1.0 + increment!r}"
        )


class ConfigError(ValueError):
    """
    Raised for every configuration problem. Carries the key path
    (e.g. ``market.regimes[0].sigma``) and, for syntax errors, the line number.
    """

    def __init__(self, key_path: str, message: str, line: Optional[int] = None) -> None:
        self.key_path = key_path
        self.line = line
        location = f"line {line}: " if line is not None else ""
        super().__init__(f"{location}{key_path}: {message}")
