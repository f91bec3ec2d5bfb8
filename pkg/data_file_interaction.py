"""
Contains the data_file_interaction classes which are used to write and read the CSV outputs.
"""

import os
from dataclasses import dataclass
from io import StringIO
from typing import Iterable, Sequence, TextIO, Tuple

import numpy as np  # pylint: disable=import-error

from config import Schema
from field_core import Grid, PairField, ScalarField, SpinField
from record import CriterionResult


@dataclass
class DataArrays:
    """
    A data transfer object to store the columns of one CSV file.
    """

    header: str
    columns: Tuple[np.ndarray, ...]
    fmt: str = Schema.FLOAT_FORMAT


class DataFile:
    """
    A data transfer object to store and format data to write to file.
    """

    @staticmethod
    def create_file_data(data_arrays: DataArrays, out_file: TextIO) -> "DataFile":
        """
        Create a data transfer object and format its contents.
        @param data_arrays (DataArrays): The columns and header to write
        @param out_file (TextIO): The file to write to
        @return (DataFile): The formatted data file
        """
        data_file = DataFile(data_arrays, out_file)
        data_file.save_file = data_file._format_columns()  # pylint: disable=protected-access
        return data_file

    def __init__(self, data_arrays: DataArrays, out_file: TextIO) -> None:
        """
        Initialize the data transfer object.
        @param data_arrays (DataArrays): The columns and header to write
        @param out_file (TextIO): The file to write to
        """
        self.data_arrays: DataArrays = data_arrays
        self.out_file: TextIO = out_file
        self.save_file = None

    def _format_columns(self) -> str:
        """
        A private method to format the columns as CSV text with the header line first.
        @return (str): The file contents
        """
        table = np.column_stack(self.data_arrays.columns)
        formatted = StringIO()
        np.savetxt(
            formatted,
            table,
            delimiter=",",
            fmt=self.data_arrays.fmt,
            header=self.data_arrays.header,
            comments="",
        )
        return formatted.getvalue()

    def write_to_file(self) -> None:
        """
        Write the formatted contents to the output file.
        @return (None): None
        """
        self.out_file.write(self.save_file)


def write_data_file(path: str, data_arrays: DataArrays) -> str:
    """
    Formats and writes one CSV file, creating its directory if needed
    @param path (str): The file path
    @param data_arrays (DataArrays): The contents
    @return (str): The path written
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, mode="w", encoding="utf-8", newline="") as out_file:
        DataFile.create_file_data(data_arrays, out_file).write_to_file()
    return path


def snapshot_file_name(time: float) -> str:
    """
    snap_<t>.csv with t to 6 decimals
    """
    return Schema.SNAPSHOT_FILE_NAME.format(t=time)


def spin_snapshot_arrays(u: SpinField) -> DataArrays:
    """
    x,u1,u2,u3 columns of a spin field
    """
    return DataArrays(
        Schema.SPIN_SNAPSHOT_HEADER,
        (u.grid.nodes, u.values[:, 0], u.values[:, 1], u.values[:, 2]),
    )


def scalar_snapshot_arrays(f: ScalarField) -> DataArrays:
    """
    x,f columns of a scalar field
    """
    return DataArrays(Schema.SCALAR_SNAPSHOT_HEADER, (f.grid.nodes, f.values))


def diagnostics_arrays(records: Sequence) -> DataArrays:
    """
    t,delta,norm_drift,sigma_est,theta_est,w_h2,lyapunov columns of the diagnostics records
    """
    table = np.array([record.as_row() for record in records], dtype=float).reshape(-1, 7)
    return DataArrays(Schema.DIAGNOSTICS_HEADER, tuple(table.T))


def spectrum_arrays(eigenvalues: np.ndarray, overlaps: np.ndarray) -> DataArrays:
    """
    index,eigenvalue,overlap_sech columns, indices from 1
    """
    indices = np.arange(1, len(eigenvalues) + 1)
    return DataArrays(Schema.SPECTRUM_HEADER, (indices, eigenvalues, overlaps))


def reduce_check_arrays(lhs: PairField, rhs: PairField) -> DataArrays:
    """
    x,lhs1,lhs2,rhs1,rhs2,abs_err columns of the lift-project comparison
    """
    error = np.max(np.abs(lhs.stack() - rhs.stack()), axis=0)
    return DataArrays(
        Schema.REDUCE_CHECK_HEADER,
        (lhs.grid.nodes, lhs.r1.values, lhs.r2.values, rhs.r1.values, rhs.r2.values, error),
    )


def residual_sweep_arrays(rows: Iterable[Tuple[float, int, float]]) -> DataArrays:
    """
    delta,n_points,residual columns of a travelling wall residual sweep
    """
    table = np.array(list(rows), dtype=float).reshape(-1, 3)
    return DataArrays(Schema.RESIDUAL_SWEEP_HEADER, tuple(table.T))


def report_arrays(results: Iterable[CriterionResult]) -> DataArrays:
    """
    criterion,measured,threshold,pass columns of the report
    """
    table = np.array([result.as_row() for result in results], dtype=str).reshape(-1, 4)
    return DataArrays(Schema.REPORT_HEADER, tuple(table.T), fmt="%s")


def read_spin_snapshot(path: str) -> SpinField:
    """
    Reads a spin field written by spin_snapshot_arrays
    @param path (str): The snapshot file
    @return (SpinField): The field on the grid recovered from the x column
    """
    table = np.genfromtxt(path, delimiter=",", skip_header=1)
    grid = Grid(float(table[-1, 0]), table.shape[0])
    return SpinField(grid, table[:, 1:4])


def summary_arrays(quantities: Iterable[Tuple[str, float]]) -> DataArrays:
    """
    quantity,value rows of a run summary
    """
    rows = [(name, Schema.FLOAT_FORMAT % value) for name, value in quantities]
    table = np.array(rows, dtype=str).reshape(-1, 2)
    return DataArrays(Schema.SUMMARY_HEADER, tuple(table.T), fmt="%s")
