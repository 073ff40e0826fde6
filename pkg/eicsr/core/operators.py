"""
Operator inventory.

Each operator maps to a numpy ufunc-style callable applied element-wise.
Non-total operators are NOT protected: log(v <= 0), sqrt(v < 0), division by
zero and poles return NaN/Inf so numerical fragility stays visible.
New operators are added by extending the enums and the two tables below.
"""
from enum import Enum
from typing import Callable

import numpy as np
from numpy.typing import NDArray

Array = NDArray[np.float64]


class UnaryOp(str, Enum):
    SIN = "sin"
    COS = "cos"
    TAN = "tan"
    EXP = "exp"
    LOG = "log"
    SQRT = "sqrt"
    ABS = "abs"
    NEG = "neg"
    INV = "inv"


class BinaryOp(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    POW = "pow"


def _inv(x: Array) -> Array:
    return np.divide(1.0, x)


UNARY_FUNCTIONS: dict[UnaryOp, Callable[[Array], Array]] = {
    UnaryOp.SIN: np.sin,
    UnaryOp.COS: np.cos,
    UnaryOp.TAN: np.tan,
    UnaryOp.EXP: np.exp,
    UnaryOp.LOG: np.log,
    UnaryOp.SQRT: np.sqrt,
    UnaryOp.ABS: np.abs,
    UnaryOp.NEG: np.negative,
    UnaryOp.INV: _inv,
}

BINARY_FUNCTIONS: dict[BinaryOp, Callable[[Array, Array], Array]] = {
    BinaryOp.ADD: np.add,
    BinaryOp.SUB: np.subtract,
    BinaryOp.MUL: np.multiply,
    BinaryOp.DIV: np.divide,
    # negative base with a non-integer exponent gives NaN under float power
    BinaryOp.POW: np.power,
}

# infix symbols used by the printer and parser
BINARY_SYMBOLS: dict[BinaryOp, str] = {
    BinaryOp.ADD: "+",
    BinaryOp.SUB: "-",
    BinaryOp.MUL: "*",
    BinaryOp.DIV: "/",
    BinaryOp.POW: "^",
}

# functions callable as name(...) in formula text; neg is written as prefix '-'
FUNCTION_NAMES: dict[str, UnaryOp] = {op.value: op for op in UnaryOp if op is not UnaryOp.NEG}


def apply_unary(op: UnaryOp, x: Array) -> Array:
    with np.errstate(all="ignore"):
        return UNARY_FUNCTIONS[op](x)


def apply_binary(op: BinaryOp, a: Array, b: Array) -> Array:
    with np.errstate(all="ignore"):
        return BINARY_FUNCTIONS[op](a, b)
