"""CSV layout for observation and cost matrices (one row per state)."""

import logging
import os

import numpy as np
import pandas as pd

from social_learning.exceptions import ConfigError

logger = logging.getLogger(__name__)


def read_matrix_csv(path: str) -> np.ndarray:
    """
    Load a matrix written as CSV.

    A header row is optional; a first column of non-numeric row labels is
    dropped.

    Args:
        path: CSV file path

    Returns:
        2-D float array
    """
    if not os.path.exists(path):
        raise ConfigError(f"Matrix file not found: {path}")

    frame = pd.read_csv(path, header=None)
    # Drop a header row or a label column when present
    if frame.shape[0] > 0 and not _is_numeric_row(frame.iloc[0]):
        frame = frame.iloc[1:]
    if frame.shape[1] > 0 and not _is_numeric_column(frame.iloc[:, 0]):
        frame = frame.iloc[:, 1:]

    try:
        matrix = frame.astype(float).to_numpy()
    except ValueError as e:
        raise ConfigError(f"Matrix file {path} has non-numeric cells: {e}")

    logger.info(f"Loaded {matrix.shape[0]}x{matrix.shape[1]} matrix from {path}")
    return matrix


def write_matrix_csv(matrix: np.ndarray, path: str, row_prefix: str = "row",
                     column_prefix: str = "col") -> None:
    """Write a matrix with labelled rows and columns."""
    matrix = np.asarray(matrix, dtype=float)
    frame = pd.DataFrame(
        matrix,
        index=[f"{row_prefix}_{i}" for i in range(matrix.shape[0])],
        columns=[f"{column_prefix}_{j}" for j in range(matrix.shape[1])],
    )
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, float_format="%.17g")


def _is_numeric_row(row: pd.Series) -> bool:
    return pd.to_numeric(row.iloc[1:] if row.size > 1 else row, errors="coerce").notna().all()


def _is_numeric_column(column: pd.Series) -> bool:
    return pd.to_numeric(column, errors="coerce").notna().all()
