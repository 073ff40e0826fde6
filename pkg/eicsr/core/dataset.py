"""
Column-major numeric dataset with a designated target.

Arrays are stored read-only so a Dataset can be shared freely between
workers. Non-finite rows are rejected at ingestion.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from eicsr.core.exceptions import DatasetError
from eicsr.services.logger import get_logger

logger = get_logger(__name__)


def _frozen(values: NDArray[np.float64]) -> NDArray[np.float64]:
    values.flags.writeable = False
    return values


class Dataset:
    """
    Input columns X (shape d x n) plus target y (length n).

    Attributes:
        names: column names, x1..xd when none were supplied
        target_name: name of the target column
        dropped_rows: rows removed at ingestion for non-finite values
    """

    __slots__ = ("X", "y", "names", "target_name", "dropped_rows")

    def __init__(
        self,
        X: NDArray[np.float64],
        y: NDArray[np.float64],
        names: Sequence[str],
        target_name: str = "y",
        dropped_rows: int = 0,
    ) -> None:
        self.X = _frozen(np.array(X, dtype=np.float64, copy=True))
        self.y = _frozen(np.array(y, dtype=np.float64, copy=True))
        self.names = tuple(names)
        self.target_name = target_name
        self.dropped_rows = dropped_rows

    @property
    def n_rows(self) -> int:
        return int(self.y.shape[0])

    @property
    def arity(self) -> int:
        return int(self.X.shape[0])

    @classmethod
    def from_arrays(
        cls,
        X: ArrayLike,
        y: ArrayLike,
        names: Sequence[str] | None = None,
        target_name: str = "y",
    ) -> Dataset:
        """
        Build a dataset from a row-major (n x d) or 1-D input array.

        Rows containing NaN or +-Inf in any column are dropped.
        """
        x_arr = np.asarray(X, dtype=np.float64)
        if x_arr.ndim == 1:
            x_arr = x_arr[:, None]
        y_arr = np.asarray(y, dtype=np.float64).reshape(-1)
        if x_arr.ndim != 2 or x_arr.shape[0] != y_arr.shape[0]:
            raise DatasetError(
                "inputs and target must have the same number of rows",
                x_shape=list(x_arr.shape),
                y_shape=list(y_arr.shape),
            )
        if names is None:
            names = [f"x{i + 1}" for i in range(x_arr.shape[1])]
        names = list(names)
        if len(names) != x_arr.shape[1]:
            raise DatasetError("one name per input column is required", names=names)
        if len(set(names) | {target_name}) != len(names) + 1:
            raise DatasetError("column names collide", names=names, target=target_name)

        finite = np.isfinite(x_arr).all(axis=1) & np.isfinite(y_arr)
        dropped = int((~finite).sum())
        if dropped:
            logger.warning(f"Dropping {dropped} non-finite rows at ingestion")
        if not finite.any():
            raise DatasetError("dataset has no finite rows", dropped_rows=dropped)
        return cls(x_arr[finite].T, y_arr[finite], names, target_name, dropped)

    @classmethod
    def from_csv(cls, path: str | Path, target: str | None = None) -> Dataset:
        """
        Load a UTF-8 CSV with a header row; the target defaults to the last column.
        """
        header = pd.read_csv(path, header=None, nrows=1, encoding="utf-8").iloc[0]
        columns = [str(name).strip() for name in header.tolist()]
        if len(set(columns)) != len(columns):
            raise DatasetError("duplicate column names in CSV header", columns=columns)
        if len(columns) < 2:
            raise DatasetError("CSV needs at least one input column and a target", columns=columns)

        frame = pd.read_csv(path, encoding="utf-8", decimal=".")
        frame.columns = columns
        target = target or columns[-1]
        if target not in columns:
            raise DatasetError(f"target column {target!r} not found", columns=columns)
        inputs = [c for c in columns if c != target]
        try:
            X = frame[inputs].to_numpy(dtype=np.float64)
            y = frame[target].to_numpy(dtype=np.float64)
        except ValueError as exc:
            raise DatasetError(f"non-numeric value in {path}: {exc}") from exc
        logger.info(f"Loaded {path}: rows={len(frame)}, inputs={len(inputs)}, target={target}")
        return cls.from_arrays(X, y, names=inputs, target_name=target)

    @classmethod
    def uniform(
        cls,
        n_vars: int,
        n_rows: int,
        low: float,
        high: float,
        rng: np.random.Generator,
    ) -> Dataset:
        """Inputs drawn i.i.d. Uniform(low, high); target zero (probe data)."""
        X = rng.uniform(low, high, size=(n_rows, n_vars))
        return cls.from_arrays(X, np.zeros(n_rows))

    def subset(self, indices: ArrayLike) -> Dataset:
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.X[:, idx], self.y[idx], self.names, self.target_name)

    def with_target(self, y: ArrayLike) -> Dataset:
        """Same inputs with a new target; rows where the new target is non-finite are dropped."""
        return Dataset.from_arrays(self.X.T, y, names=self.names, target_name=self.target_name)

    def __repr__(self) -> str:
        return f"Dataset(rows={self.n_rows}, arity={self.arity}, target={self.target_name!r})"
