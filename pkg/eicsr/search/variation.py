"""
Random trees, mutation and crossover shared by GP and MCTS.

Every operator takes an explicit numpy Generator and never mutates its
inputs (expressions are immutable).
"""
from collections import Counter
from typing import Literal

import numpy as np

from eicsr.core.expression import (
    Binary,
    Constant,
    Expression,
    Path,
    Unary,
    Variable,
    complexity,
    iter_nodes,
    node_at,
    replace_at,
)
from eicsr.core.operators import BinaryOp
from eicsr.schemas.config import PrimitiveConfig

MUTATION_KINDS = ("subtree", "operator", "constant", "delete")
MAX_RETRIES = 8


class PrimitiveSet:
    """Operators and leaves available to a search on `n_vars` inputs."""

    def __init__(self, n_vars: int, cfg: PrimitiveConfig | None = None) -> None:
        self.cfg = cfg or PrimitiveConfig()
        self.n_vars = n_vars
        self.unary = list(self.cfg.unary_ops)
        self.binary = list(self.cfg.binary_ops)

    def random_constant(self, rng: np.random.Generator) -> Constant:
        return Constant(round(float(rng.uniform(self.cfg.constant_low, self.cfg.constant_high)), 3))

    def random_leaf(self, rng: np.random.Generator) -> Expression:
        if rng.random() < self.cfg.constant_prob:
            return self.random_constant(rng)
        return Variable(int(rng.integers(self.n_vars)))

    def random_tree(
        self,
        rng: np.random.Generator,
        depth: int,
        method: Literal["grow", "full"] = "grow",
    ) -> Expression:
        """
        Random tree of depth <= `depth` ("full": every branch reaches `depth`).
        """
        if depth <= 0:
            return self.random_leaf(rng)
        n_ops = len(self.unary) + len(self.binary)
        if method == "grow":
            n_leaf_kinds = self.n_vars + (1 if self.cfg.constant_prob > 0 else 0)
            if rng.random() < n_leaf_kinds / (n_leaf_kinds + n_ops):
                return self.random_leaf(rng)
        choice = int(rng.integers(n_ops))
        if choice < len(self.unary):
            return Unary(self.unary[choice], self.random_tree(rng, depth - 1, method))
        op = self.binary[choice - len(self.unary)]
        left = self.random_tree(rng, depth - 1, method)
        right = self.random_tree(rng, depth - 1, method)
        return Binary(op, left, right)


def random_path(e: Expression, rng: np.random.Generator) -> Path:
    paths = [path for path, _ in iter_nodes(e)]
    return paths[int(rng.integers(len(paths)))]


class Mutator:
    """
    Applies one of four mutation kinds.

    A kind that cannot apply to the input (no operator to change, nothing to
    delete) or that would exceed `max_nodes` is retried with a fresh kind, up
    to MAX_RETRIES times; after that the input is returned unchanged.
    `counts` records how often each kind was applied.
    """

    def __init__(self, primitives: PrimitiveSet, max_nodes: int) -> None:
        self.primitives = primitives
        self.max_nodes = max_nodes
        self.counts: Counter[str] = Counter()

    def mutate(self, e: Expression, rng: np.random.Generator) -> Expression:
        for _ in range(MAX_RETRIES):
            kind = MUTATION_KINDS[int(rng.integers(len(MUTATION_KINDS)))]
            result = self.apply(kind, e, rng)
            if result is not None and complexity(result) <= self.max_nodes:
                self.counts[kind] += 1
                return result
        return e

    def apply(self, kind: str, e: Expression, rng: np.random.Generator) -> Expression | None:
        if kind == "subtree":
            return self._subtree(e, rng)
        if kind == "operator":
            return self._operator(e, rng)
        if kind == "constant":
            return self._constant(e, rng)
        if kind == "delete":
            return self._delete(e, rng)
        raise ValueError(f"unknown mutation kind {kind!r}")

    def _subtree(self, e: Expression, rng: np.random.Generator) -> Expression:
        depth = int(rng.integers(0, 3))
        return replace_at(e, random_path(e, rng), self.primitives.random_tree(rng, depth))

    def _operator(self, e: Expression, rng: np.random.Generator) -> Expression | None:
        candidates = []
        for path, node in iter_nodes(e):
            if isinstance(node, Unary) and any(op is not node.op for op in self.primitives.unary):
                candidates.append(path)
            elif isinstance(node, Binary) and any(
                op is not node.op for op in self.primitives.binary
            ):
                candidates.append(path)
        if not candidates:
            return None
        path = candidates[int(rng.integers(len(candidates)))]
        node = node_at(e, path)
        if isinstance(node, Unary):
            options = [op for op in self.primitives.unary if op is not node.op]
            swapped: Expression = Unary(options[int(rng.integers(len(options)))], node.child)
        else:
            assert isinstance(node, Binary)
            choices = [op for op in self.primitives.binary if op is not node.op]
            swapped = Binary(choices[int(rng.integers(len(choices)))], node.left, node.right)
        return replace_at(e, path, swapped)

    def _constant(self, e: Expression, rng: np.random.Generator) -> Expression:
        constants = [path for path, node in iter_nodes(e) if isinstance(node, Constant)]
        if constants and rng.random() < 0.5:
            path = constants[int(rng.integers(len(constants)))]
            node = node_at(e, path)
            assert isinstance(node, Constant)
            scale, shift = 0.1 * rng.standard_normal(2)
            perturbed = node.value * (1.0 + scale) + shift
            return replace_at(e, path, Constant(round(float(perturbed), 3)))
        path = random_path(e, rng)
        op = BinaryOp.MUL if rng.random() < 0.5 else BinaryOp.ADD
        inserted = Binary(op, self.primitives.random_constant(rng), node_at(e, path))
        return replace_at(e, path, inserted)

    def _delete(self, e: Expression, rng: np.random.Generator) -> Expression | None:
        internal = [path for path, node in iter_nodes(e) if isinstance(node, (Unary, Binary))]
        if not internal:
            return None
        path = internal[int(rng.integers(len(internal)))]
        node = node_at(e, path)
        if isinstance(node, Unary):
            return replace_at(e, path, node.child)
        assert isinstance(node, Binary)
        kept = node.left if rng.random() < 0.5 else node.right
        return replace_at(e, path, kept)


def crossover(
    a: Expression,
    b: Expression,
    rng: np.random.Generator,
    max_nodes: int,
) -> tuple[Expression, Expression]:
    """
    Swap uniformly chosen subtrees of a and b.

    Falls back to the parents when no size-respecting swap is found in
    MAX_RETRIES draws.
    """
    for _ in range(MAX_RETRIES):
        path_a = random_path(a, rng)
        path_b = random_path(b, rng)
        child_a = replace_at(a, path_a, node_at(b, path_b))
        child_b = replace_at(b, path_b, node_at(a, path_a))
        if complexity(child_a) <= max_nodes and complexity(child_b) <= max_nodes:
            return child_a, child_b
    return a, b
