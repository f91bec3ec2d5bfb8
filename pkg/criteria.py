"""
Contains the criteria checked by the experiments and reported in report.csv
"""

from enum import Enum

from record import Record, at_least, at_most, greater_than, within


class Criteria(Enum):
    """
    Report criteria. Thresholds that depend on the run (epsilon) are supplied at evaluation.
    """

    DISTANCE_AT_T = Record("distance_at_T", 0.05, at_most)
    LAMBDA_LIMIT = Record("lambda_limit", 0.05, at_most)
    W_DECAY_RATE = Record("w_decay_rate", 0.0, greater_than)
    WALL_RESIDUAL = Record("wall_residual", 5e-3, at_most)
    REDUCTION_ERROR = Record("reduction_error", 1e-10, at_most)
    KERNEL_EIGENVALUE = Record("kernel_eigenvalue", 1e-3, at_most)
    KERNEL_OVERLAP = Record("kernel_overlap", 0.999, at_least)
    SECOND_EIGENVALUE = Record("second_eigenvalue", (-1.05, -0.90), within)

    @property
    def record(self) -> Record:
        """
        The record defining this criterion
        """
        return self.value

    def evaluate(self, measured: float, threshold=None):
        """
        Evaluates a measured value against this criterion
        """
        return self.value.evaluate(measured, threshold)
