"""
Batch evaluation of expressions over a Dataset.
"""
from dataclasses import dataclass

import numpy as np

from eicsr.core.dataset import Dataset
from eicsr.core.exceptions import ArityError
from eicsr.core.expression import Binary, Constant, Expression, Unary, Variable, max_variable_index
from eicsr.core.operators import Array, apply_binary, apply_unary


@dataclass(frozen=True)
class EvalResult:
    values: Array
    nonfinite_count: int


def check_arity(e: Expression, data: Dataset) -> None:
    highest = max_variable_index(e)
    if highest >= data.arity:
        raise ArityError(
            f"variable x{highest + 1} is out of range for a dataset with {data.arity} inputs",
            index=highest,
            arity=data.arity,
        )


def evaluate_array(e: Expression, X: Array) -> Array:
    """Evaluate on a (d, n) input matrix without arity checks."""
    if isinstance(e, Variable):
        return X[e.index].astype(np.float64, copy=True)
    if isinstance(e, Constant):
        return np.full(X.shape[1], e.value, dtype=np.float64)
    if isinstance(e, Unary):
        return apply_unary(e.op, evaluate_array(e.child, X))
    if isinstance(e, Binary):
        return apply_binary(e.op, evaluate_array(e.left, X), evaluate_array(e.right, X))
    raise TypeError(f"not an expression: {e!r}")


def evaluate(e: Expression, data: Dataset) -> EvalResult:
    """
    Evaluate e on every row of data.

    Domain faults (log of non-positive, sqrt of negative, division by zero,
    poles, overflow) produce NaN or Inf and are counted, never raised.

    Raises:
        ArityError: a variable index is >= the dataset arity
    """
    check_arity(e, data)
    values = evaluate_array(e, data.X)
    return EvalResult(values=values, nonfinite_count=int((~np.isfinite(values)).sum()))
