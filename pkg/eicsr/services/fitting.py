"""
Coefficient fitting and fitness.

A searched formula is treated as a dictionary of additive terms; their
coefficients and an intercept are fitted by linear least squares, which
replaces nonlinear constant optimization.
"""
import math

import numpy as np

from eicsr.core.dataset import Dataset
from eicsr.core.evaluate import check_arity, evaluate, evaluate_array
from eicsr.core.exceptions import DegenerateFitError
from eicsr.core.expression import (
    Binary,
    Constant,
    Expression,
    Unary,
    additive_terms,
    variables_used,
)
from eicsr.core.operators import Array, BinaryOp, UnaryOp
from eicsr.schemas.config import FitnessConfig
from eicsr.schemas.state import FittedModel

NMSE_SENTINEL = math.inf


def _strip_scale(term: Expression) -> tuple[float, Expression]:
    """Split a term into (constant factor, remaining structure)."""
    scale = 1.0
    while True:
        if isinstance(term, Unary) and term.op is UnaryOp.NEG:
            scale, term = -scale, term.child
        elif isinstance(term, Binary) and term.op is BinaryOp.MUL:
            if isinstance(term.left, Constant) and variables_used(term.right):
                scale, term = scale * term.left.value, term.right
            elif isinstance(term.right, Constant) and variables_used(term.left):
                scale, term = scale * term.right.value, term.left
            else:
                return scale, term
        else:
            return scale, term


def design_terms(e: Expression) -> tuple[Expression, ...]:
    """
    Additive terms of e that carry a variable, with constant factors removed.

    Pure-constant terms are dropped; the intercept absorbs them.
    """
    terms = []
    for term in additive_terms(e):
        if not variables_used(term):
            continue
        _, core = _strip_scale(term)
        terms.append(core)
    return tuple(terms)


def _solve(A: Array, b: Array, ridge_lambda: float) -> Array:
    """Least squares on centred columns; ridge only when the design is rank deficient."""
    k = A.shape[1]
    if k == 0:
        return np.zeros(0)
    scale = np.max(np.abs(A), axis=0)
    live = scale > 0
    coef = np.zeros(k)
    if not live.any():
        return coef
    A_live = A[:, live] / scale[live]
    norms = np.linalg.norm(A_live, axis=0)
    live_idx = np.flatnonzero(live)
    keep = norms > 0
    A_live = A_live[:, keep] / norms[keep]
    try:
        solution, _, rank, _ = np.linalg.lstsq(A_live, b, rcond=None)
        if rank < A_live.shape[1]:
            gram = A_live.T @ A_live + ridge_lambda * np.eye(A_live.shape[1])
            solution = np.linalg.solve(gram, A_live.T @ b)
    except np.linalg.LinAlgError as exc:
        raise DegenerateFitError(f"least squares failed: {exc}") from exc
    cols = live_idx[keep]
    coef[cols] = solution / (scale[cols] * norms[keep])
    return coef


def fit_linear(e: Expression, data: Dataset, cfg: FitnessConfig | None = None) -> FittedModel:
    """
    Fit y ~ intercept + sum(c_i * term_i) over the additive terms of e.

    Rows where any term is non-finite are dropped.

    Raises:
        DegenerateFitError: Var(y) = 0, finite terms on fewer than half the rows,
            or fewer than #terms + 1 usable rows
        ArityError: a variable index is out of range
    """
    cfg = cfg or FitnessConfig()
    check_arity(e, data)
    terms = design_terms(e)
    n = data.n_rows

    if n == 0 or float(np.var(data.y)) == 0.0:
        raise DegenerateFitError("target has zero variance", rows=n)

    if terms:
        T = np.column_stack([evaluate_array(t, data.X) for t in terms])
    else:
        T = np.empty((n, 0))
    mask = np.isfinite(T).all(axis=1)
    used = int(mask.sum())
    if used < len(terms) + 1 or used < 0.5 * n:
        raise DegenerateFitError(
            "too few rows with finite term values",
            rows=n,
            finite_rows=used,
            terms=len(terms),
        )

    T_used, y = T[mask], data.y[mask]
    y_var = float(np.var(y))
    if y_var == 0.0:
        raise DegenerateFitError("target has zero variance on usable rows", rows=used)

    with np.errstate(all="ignore"):
        t_mean = T_used.mean(axis=0)
        y_mean = float(y.mean())
        coef = _solve(T_used - t_mean, y - y_mean, cfg.ridge_lambda)
        intercept = y_mean - float(t_mean @ coef)
        residual = y - (T_used @ coef + intercept)
        nmse = float(np.mean(residual**2)) / y_var

    if not (math.isfinite(nmse) and math.isfinite(intercept) and np.isfinite(coef).all()):
        raise DegenerateFitError("fit produced non-finite values", rows=used)

    return FittedModel(
        source=e,
        terms=terms,
        coefficients=np.append(coef, intercept),
        nmse=nmse,
        r2=1.0 - nmse,
        rows_used=used,
    )


def fitted_expression(model: FittedModel, cfg: FitnessConfig | None = None) -> Expression:
    """
    The fitted formula with coefficients substituted as single constants.

    Coefficients within coef_tol of 1 are dropped, terms whose coefficient is
    within coef_tol of 0 are removed, and a negligible intercept is omitted.
    """
    cfg = cfg or FitnessConfig()
    tol = cfg.coef_tol
    # (negative, magnitude expression) pairs
    pieces: list[tuple[bool, Expression]] = []
    for term, c in zip(model.terms, model.term_coefficients):
        c = float(c)
        if abs(c) <= tol:
            continue
        body = term if abs(abs(c) - 1.0) <= tol else Binary(BinaryOp.MUL, Constant(abs(c)), term)
        pieces.append((c < 0, body))
    intercept = model.intercept
    if abs(intercept) > tol or not pieces:
        pieces.append((intercept < 0, Constant(abs(intercept))))

    negative, result = pieces[0]
    if negative:
        if isinstance(result, Constant):
            result = Constant(-result.value)
        elif (
            isinstance(result, Binary)
            and result.op is BinaryOp.MUL
            and isinstance(result.left, Constant)
        ):
            result = Binary(BinaryOp.MUL, Constant(-result.left.value), result.right)
        else:
            result = Unary(UnaryOp.NEG, result)
    for negative, body in pieces[1:]:
        result = Binary(BinaryOp.SUB if negative else BinaryOp.ADD, result, body)
    return result


def r2_score(e: Expression, data: Dataset) -> float | None:
    """R2 of a fitted formula on (held-out) data; None if predictions are non-finite."""
    predicted = evaluate(e, data)
    y_var = float(np.var(data.y))
    if predicted.nonfinite_count or y_var == 0.0:
        return None
    with np.errstate(all="ignore"):
        mse = float(np.mean((data.y - predicted.values) ** 2))
    r2 = 1.0 - mse / y_var
    return r2 if math.isfinite(r2) else None


def fitness(complexity: int, nmse: float, cfg: FitnessConfig | None = None) -> float:
    """eta^C / (1 + NMSE); the NMSE sentinel gives 0."""
    cfg = cfg or FitnessConfig()
    if not math.isfinite(nmse):
        return 0.0
    return float(cfg.eta**complexity / (1.0 + nmse))


def fitness_alpha(
    complexity: int,
    nmse: float,
    eic: float,
    cfg: FitnessConfig | None = None,
) -> float:
    """fitness(C, NMSE) - alpha * EIC; may be negative."""
    cfg = cfg or FitnessConfig()
    return fitness(complexity, nmse, cfg) - cfg.alpha * eic
