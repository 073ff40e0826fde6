"""
Expression tree model.

Formulas are immutable trees of four node kinds. Frozen dataclasses give
structural equality and hashing for free, so identical formulas compare
equal and can key caches.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence, Union

from eicsr.core.operators import BINARY_SYMBOLS, BinaryOp, UnaryOp

Path = tuple[int, ...]


@dataclass(frozen=True, slots=True)
class Variable:
    """Input column reference; `index` is 0-based (printed as x{index+1})."""

    index: int


@dataclass(frozen=True, slots=True)
class Constant:
    value: float


@dataclass(frozen=True, slots=True)
class Unary:
    op: UnaryOp
    child: Expression


@dataclass(frozen=True, slots=True)
class Binary:
    op: BinaryOp
    left: Expression
    right: Expression


Expression = Union[Variable, Constant, Unary, Binary]


def children(e: Expression) -> tuple[Expression, ...]:
    if isinstance(e, Unary):
        return (e.child,)
    if isinstance(e, Binary):
        return (e.left, e.right)
    return ()


def complexity(e: Expression) -> int:
    """Symbol count: operators + variables + constants."""
    return 1 + sum(complexity(c) for c in children(e))


def depth(e: Expression) -> int:
    """Edges on the longest root-to-leaf path (a leaf has depth 0)."""
    kids = children(e)
    if not kids:
        return 0
    return 1 + max(depth(c) for c in kids)


def iter_nodes(e: Expression, path: Path = ()) -> Iterator[tuple[Path, Expression]]:
    """Pre-order walk yielding (path, node); child i of a node extends the path by i."""
    yield path, e
    for i, child in enumerate(children(e)):
        yield from iter_nodes(child, path + (i,))


def node_at(e: Expression, path: Sequence[int]) -> Expression:
    node = e
    for i in path:
        node = children(node)[i]
    return node


def replace_at(e: Expression, path: Sequence[int], subtree: Expression) -> Expression:
    if not path:
        return subtree
    head, rest = path[0], path[1:]
    if isinstance(e, Unary) and head == 0:
        return Unary(e.op, replace_at(e.child, rest, subtree))
    if isinstance(e, Binary):
        if head == 0:
            return Binary(e.op, replace_at(e.left, rest, subtree), e.right)
        if head == 1:
            return Binary(e.op, e.left, replace_at(e.right, rest, subtree))
    raise IndexError(f"path {tuple(path)} does not exist")


def variables_used(e: Expression) -> set[int]:
    return {node.index for _, node in iter_nodes(e) if isinstance(node, Variable)}


def count_constants(e: Expression) -> int:
    return sum(1 for _, node in iter_nodes(e) if isinstance(node, Constant))


def count_operators(e: Expression) -> int:
    return sum(1 for _, node in iter_nodes(e) if isinstance(node, (Unary, Binary)))


def max_variable_index(e: Expression) -> int:
    """Largest variable index used, -1 when the formula has no variables."""
    return max(variables_used(e), default=-1)


def path_to_str(path: Path) -> str:
    return ".".join(str(i) for i in path) if path else "root"


# ---------------------------------------------------------------------------
# Additive decomposition
# ---------------------------------------------------------------------------

def additive_terms(e: Expression) -> list[Expression]:
    """
    Flatten root-level add/sub into signed terms.

    Subtracted terms are wrapped in neg so that summing the returned terms
    reproduces e. Products are never distributed.
    """
    if isinstance(e, Binary) and e.op is BinaryOp.ADD:
        return additive_terms(e.left) + additive_terms(e.right)
    if isinstance(e, Binary) and e.op is BinaryOp.SUB:
        return additive_terms(e.left) + [_negate(t) for t in additive_terms(e.right)]
    return [e]


def _negate(e: Expression) -> Expression:
    if isinstance(e, Unary) and e.op is UnaryOp.NEG:
        return e.child
    return Unary(UnaryOp.NEG, e)


def sum_terms(terms: Sequence[Expression]) -> Expression:
    """Left-folded sum; the inverse of additive_terms up to term signs."""
    if not terms:
        return Constant(0.0)
    total = terms[0]
    for term in terms[1:]:
        total = Binary(BinaryOp.ADD, total, term)
    return total


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5

_BINARY_PREC = {
    BinaryOp.ADD: _PREC_ADD,
    BinaryOp.SUB: _PREC_ADD,
    BinaryOp.MUL: _PREC_MUL,
    BinaryOp.DIV: _PREC_MUL,
    BinaryOp.POW: _PREC_POW,
}


def _precedence(e: Expression) -> int:
    if isinstance(e, Binary):
        return _BINARY_PREC[e.op]
    if isinstance(e, Unary):
        return _PREC_NEG if e.op is UnaryOp.NEG else _PREC_ATOM
    if isinstance(e, Constant) and e.value < 0:
        return _PREC_NEG
    return _PREC_ATOM


def _format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_string(e: Expression, names: Sequence[str] | None = None) -> str:
    """
    Infix text with minimal parentheses; parse(to_string(e)) == e.

    Variables print as x1..xd unless column `names` are given.
    """
    if isinstance(e, Variable):
        if names is not None and e.index < len(names):
            return names[e.index]
        return f"x{e.index + 1}"
    if isinstance(e, Constant):
        return _format_number(e.value)
    if isinstance(e, Unary):
        inner = to_string(e.child, names)
        if e.op is UnaryOp.NEG:
            # a bare literal after "-" would re-parse as a negative constant
            if _precedence(e.child) < _PREC_POW or isinstance(e.child, Constant):
                inner = f"({inner})"
            return f"-{inner}"
        return f"{e.op.value}({inner})"

    prec = _BINARY_PREC[e.op]
    left = to_string(e.left, names)
    right = to_string(e.right, names)
    left_prec = _precedence(e.left)
    right_prec = _precedence(e.right)
    if e.op is BinaryOp.POW:
        # right-associative: the left operand needs parens at equal precedence
        if left_prec <= prec:
            left = f"({left})"
        if right_prec < prec:
            right = f"({right})"
    else:
        if left_prec < prec:
            left = f"({left})"
        if right_prec <= prec:
            right = f"({right})"
    return f"{left} {BINARY_SYMBOLS[e.op]} {right}"
