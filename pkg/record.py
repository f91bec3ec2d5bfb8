"""
Contains information used to define a report criterion: its name, its threshold and how a
measured value is compared with it.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

Threshold = Union[float, Tuple[float, float]]


def at_most(measured: float, threshold: float) -> bool:
    """
    Passes when measured <= threshold
    """
    return measured <= threshold


def at_least(measured: float, threshold: float) -> bool:
    """
    Passes when measured >= threshold
    """
    return measured >= threshold


def greater_than(measured: float, threshold: float) -> bool:
    """
    Passes when measured > threshold
    """
    return measured > threshold


def within(measured: float, threshold: Tuple[float, float]) -> bool:
    """
    Passes when measured lies in the closed interval threshold
    """
    low, high = threshold
    return low <= measured <= high


def format_threshold(threshold: Threshold) -> str:
    """
    Formats a threshold for the report file, intervals as low:high
    """
    if isinstance(threshold, tuple):
        return f"{threshold[0]!r}:{threshold[1]!r}"
    return repr(float(threshold))


@dataclass(frozen=True)
class CriterionResult:
    """
    One row of the report file
    """

    criterion: str
    measured: float
    threshold: Threshold
    passed: bool

    def as_row(self) -> Tuple[str, str, str, str]:
        """
        The row as report file fields
        """
        return (
            self.criterion,
            repr(float(self.measured)),
            format_threshold(self.threshold),
            "PASS" if self.passed else "FAIL",
        )

    def summary_line(self) -> str:
        """
        One-line PASS/FAIL summary for the console
        """
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{verdict} {self.criterion}: measured {self.measured:.6g}, "
            f"threshold {format_threshold(self.threshold)}"
        )


class Record:
    """
    Defines a report criterion

    Args:
        name: The criterion name written to the report
        threshold: The default threshold, a number or a (low, high) interval
        comparison: Callable (measured, threshold) -> bool deciding a pass
    """

    def __init__(
        self,
        name: str,
        threshold: Threshold,
        comparison: Callable[[float, Threshold], bool] = at_most,
    ):
        self.name = name
        self.threshold = threshold
        self.comparison = comparison

    def evaluate(self, measured: float, threshold: Optional[Threshold] = None) -> CriterionResult:
        """
        Compares a measured value with the threshold. Non-finite values always fail.
        @param measured (float): The measured value
        @param threshold (Optional[Threshold]): Overrides the default threshold
        @return (CriterionResult): The report row
        """
        threshold = self.threshold if threshold is None else threshold
        passed = math.isfinite(measured) and self.comparison(measured, threshold)
        return CriterionResult(self.name, float(measured), threshold, bool(passed))
