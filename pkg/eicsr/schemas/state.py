"""
In-memory search state.
Candidates, fitted models, Pareto fronts and MCTS tree nodes. These hold numpy
arrays and parent links, so they are plain dataclasses rather than pydantic
models; `to_record()` converts to the serializable schema.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Generic, Protocol, TypeVar

from eicsr.core.expression import Expression, to_string
from eicsr.core.operators import Array
from eicsr.schemas.response import CandidateRecord, PairRecord


@dataclass(frozen=True)
class FittedModel:
    """
    Linear model over the additive terms of a formula.

    coefficients holds one entry per term followed by the intercept.
    """

    source: Expression
    terms: tuple[Expression, ...]
    coefficients: Array
    nmse: float
    r2: float
    rows_used: int

    @property
    def intercept(self) -> float:
        return float(self.coefficients[-1])

    @property
    def term_coefficients(self) -> Array:
        return self.coefficients[:-1]


@dataclass(frozen=True)
class Candidate:
    """
    Scored formula.

    `expr` is the raw searched structure, `fitted` the formula with fitted
    coefficients substituted (what complexity and EIC are measured on).
    `model` is None when the fit degenerated; nmse is then +inf.
    """

    expr: Expression
    fitted: Expression
    model: FittedModel | None
    eic: float
    fitness: float
    complexity: int

    @property
    def nmse(self) -> float:
        return self.model.nmse if self.model is not None else math.inf

    @property
    def r2(self) -> float:
        return self.model.r2 if self.model is not None else -math.inf

    @property
    def formula(self) -> str:
        return to_string(self.fitted)

    def to_record(self) -> CandidateRecord:
        return CandidateRecord(
            formula=self.formula,
            r2=self.r2,
            nmse=self.nmse,
            complexity=self.complexity,
            eic=self.eic,
            fitness=self.fitness,
        )


class Scored(Protocol):
    """Anything ranked on the (complexity, nmse) plane."""

    @property
    def complexity(self) -> int: ...

    @property
    def nmse(self) -> float: ...


S = TypeVar("S", bound=Scored)


@dataclass
class ParetoFront(Generic[S]):
    """Successive non-dominated tiers over (complexity, nmse); tier 0 is best."""

    tiers: list[list[S]] = field(default_factory=list)

    @property
    def first(self) -> list[S]:
        return self.tiers[0] if self.tiers else []

    def tier_of(self, member: S) -> int:
        for k, tier in enumerate(self.tiers):
            if any(c is member for c in tier):
                return k
        raise ValueError("not a member of this front")


@dataclass(frozen=True)
class Pair:
    """Two front members, one from each front, with their selection distance."""

    a: CandidateRecord
    b: CandidateRecord
    distance: float

    def to_record(self) -> PairRecord:
        return PairRecord(a=self.a, b=self.b, distance=self.distance)


@dataclass
class PairSelection:
    pairs: list[Pair] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(eq=False)
class MctsNode:
    """
    Search-tree node. visits counts every backpropagation through the node,
    which equals the number of expansions in its subtree.
    """

    candidate: Candidate
    parent: MctsNode | None = None
    children: list[MctsNode] = field(default_factory=list)
    visits: int = 0
    total_reward: float = 0.0

    @property
    def mean_reward(self) -> float:
        return self.total_reward / self.visits if self.visits > 0 else 0.0

    def ucb(self, c: float) -> float:
        if self.visits == 0:
            return math.inf
        parent_visits = self.parent.visits if self.parent is not None else self.visits
        return self.mean_reward + c * math.sqrt(math.log(max(parent_visits, 1)) / self.visits)
