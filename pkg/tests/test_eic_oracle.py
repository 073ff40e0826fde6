"""
EIC against an independent digit-rounding oracle.

The oracle evaluates each formula twice in 50-digit decimal arithmetic: once
exactly, and once rounding every operator output to 7 significant digits.
Rounding is dithered (the value is scaled by 10^u, u ~ U(0, 1), before
rounding) so the relative rounding error has a mantissa-independent variance
kappa * sigma_from_n(7), with kappa = E[1/m^2] = 0.99 / (2 ln 10) for a
log-uniform mantissa m in [1, 10). The engine run with sigma_r^2 equal to that
variance must report the same digit loss.
"""
import math
from decimal import Decimal, localcontext

import numpy as np
import pytest

from eicsr.core.dataset import Dataset
from eicsr.core.expression import (
    Binary,
    Constant,
    Expression,
    Path,
    Unary,
    Variable,
    complexity,
    to_string,
)
from eicsr.core.operators import BinaryOp, UnaryOp
from eicsr.core.parser import parse
from eicsr.schemas.config import EicConfig, GeneratorConfig
from eicsr.services.eic import calculate_eic, sigma_from_n
from eicsr.services.genfilter import generate

DIGITS = 7
PRECISION = 50
DRAWS = 9
ROWS = 64
KAPPA = 0.99 / (2.0 * math.log(10.0))
ROUNDING_VAR = KAPPA * sigma_from_n(DIGITS)
TOLERANCE = 0.5

_UNARY = {
    UnaryOp.SQRT: lambda v: v.sqrt(),
    UnaryOp.EXP: lambda v: v.exp(),
    UnaryOp.LOG: lambda v: v.ln(),
    UnaryOp.NEG: lambda v: -v,
}
_BINARY = {
    BinaryOp.ADD: lambda a, b: a + b,
    BinaryOp.SUB: lambda a, b: a - b,
    BinaryOp.MUL: lambda a, b: a * b,
    BinaryOp.DIV: lambda a, b: a / b,
}


def _round_sig(value: Decimal, digits: int) -> Decimal:
    if value == 0:
        return value
    return value.quantize(Decimal(1).scaleb(value.adjusted() - digits + 1))


def _dithered(value: Decimal, u: float) -> Decimal:
    scale = Decimal(10) ** Decimal(u)
    return _round_sig(value * scale, DIGITS) / scale


def _oracle_pass(e: Expression, X: np.ndarray, rng: np.random.Generator) -> dict[Path, float]:
    """Node EICs of one rounding draw."""
    rows = X.shape[1]
    result: dict[Path, float] = {}

    def walk(node: Expression, path: Path) -> tuple[list[Decimal], list[Decimal]]:
        if isinstance(node, Variable):
            values = [Decimal(float(v)) for v in X[node.index]]
            return values, values
        if isinstance(node, Constant):
            values = [Decimal(node.value)] * rows
            return values, values
        if isinstance(node, Unary):
            rounded_c, clean_c = walk(node.child, path + (0,))
            fn = _UNARY[node.op]
            raw = [fn(v) for v in rounded_c]
            clean = [fn(v) for v in clean_c]
        else:
            assert isinstance(node, Binary)
            rounded_l, clean_l = walk(node.left, path + (0,))
            rounded_r, clean_r = walk(node.right, path + (1,))
            fn = _BINARY[node.op]
            raw = [fn(a, b) for a, b in zip(rounded_l, rounded_r)]
            clean = [fn(a, b) for a, b in zip(clean_l, clean_r)]
        dither = rng.uniform(0.0, 1.0, size=rows)
        rounded = [_dithered(v, float(u)) for v, u in zip(raw, dither)]
        rel = [float((r - c) / c) for r, c in zip(rounded, clean) if c != 0]
        result[path] = math.log10(float(np.var(rel)) / ROUNDING_VAR)
        return rounded, clean

    with localcontext() as ctx:
        ctx.prec = PRECISION
        walk(e, ())
    return result


def oracle_eic(e: Expression, data: Dataset, seed: int = 0) -> float:
    """Overall EIC from per-node medians over DRAWS rounding draws."""
    rng = np.random.default_rng(seed)
    passes = [_oracle_pass(e, data.X, rng) for _ in range(DRAWS)]
    if not passes[0]:
        return 0.0
    medians = [float(np.median([p[path] for p in passes])) for path in passes[0]]
    return max(0.0, max(medians))


def engine_eic(e: Expression, data: Dataset) -> float:
    cfg = EicConfig(sigma_r=math.sqrt(ROUNDING_VAR), repeats=DRAWS, seed=3)
    return calculate_eic(e, data, cfg).overall


@pytest.fixture(scope="module")
def rows() -> Dataset:
    return Dataset.uniform(2, ROWS, 1.0, 2.0, np.random.default_rng(21))


@pytest.mark.parametrize(
    "text",
    [
        "x1 + x2",
        "x1 * x2 / (x1 + x2)",
        "(x1 + 1000) - 1000",
        "(x1 + 100000) - 100000",
        "exp(x1 * 10)",
        "sqrt(x1 * x2) * exp(x1)",
        "log(x1 + 10000)",
        "x1 / (x2 + 1000)",
    ],
)
def test_engine_agrees_with_rounding_oracle(rows, text):
    e = parse(text)
    assert engine_eic(e, rows) == pytest.approx(oracle_eic(e, rows), abs=TOLERANCE)


@pytest.mark.slow
def test_random_small_formulas_agree_with_oracle(rows):
    cfg = GeneratorConfig(
        n_vars=2,
        min_binary_ops=1,
        max_binary_ops=3,
        max_unary_ops=1,
        unary_weights={UnaryOp.SQRT: 1.0, UnaryOp.EXP: 1.0, UnaryOp.LOG: 1.0},
        binary_weights={op: 1.0 for op in _BINARY},
        leaf_constant_prob=0.25,
        int_constant_max=5,
        seed=9,
    )
    rng = np.random.default_rng(9)
    compared = 0
    disagreements: list[tuple[str, float, float]] = []
    while compared < 50:
        e = generate(cfg, rng)
        if complexity(e) > 7:
            continue
        report = calculate_eic(e, rows, EicConfig(sigma_r=math.sqrt(ROUNDING_VAR)))
        if report.invalid_samples or any(node.capped for node in report.per_node.values()):
            continue
        ours = engine_eic(e, rows)
        if ours >= 8.0:
            continue
        compared += 1
        theirs = oracle_eic(e, rows)
        if abs(ours - theirs) > TOLERANCE:
            disagreements.append((to_string(e), ours, theirs))
    assert not disagreements, disagreements
