"""
Configuration models for the EIC engine, searches, generator and bench.

All models are frozen; field constraints carry the documented invariants so
invalid hyperparameters fail with a pydantic ValidationError.
"""
from __future__ import annotations

import math
import re
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from eicsr.core.exceptions import BudgetZeroError
from eicsr.core.operators import BinaryOp, UnaryOp

_BUDGET_RE = re.compile(r"^\s*(\d+(?:\.\d*)?)\s*(s|sec|gen|it|iter)?\s*$")


class Budget(BaseModel):
    """
    Search budget: a step count (generations or iterations) or wall-clock seconds.
    """

    model_config = ConfigDict(frozen=True)

    unit: Literal["steps", "seconds"] = Field(default="steps")
    amount: float = Field(default=50, ge=0)

    @classmethod
    def parse(cls, text: str) -> Budget:
        """
        Accepts "60s", "200gen", "5000it" or a bare integer step count.
        """
        match = _BUDGET_RE.match(text)
        if match is None:
            raise ValueError(f"invalid budget {text!r}; use e.g. 60s, 200gen or 5000it")
        amount, unit = match.groups()
        if unit in ("s", "sec"):
            return cls(unit="seconds", amount=float(amount))
        return cls(unit="steps", amount=int(float(amount)))

    @property
    def steps(self) -> int | None:
        return int(self.amount) if self.unit == "steps" else None

    @property
    def seconds(self) -> float | None:
        return self.amount if self.unit == "seconds" else None

    def require_nonzero(self) -> None:
        if self.amount <= 0 or (self.unit == "steps" and int(self.amount) == 0):
            raise BudgetZeroError("search budget is empty", budget=self.model_dump())

    def __str__(self) -> str:
        return f"{self.amount:g}s" if self.unit == "seconds" else f"{int(self.amount)} steps"


class EicConfig(BaseModel):
    """Noise-injection parameters for calculate_eic."""

    model_config = ConfigDict(frozen=True)

    sigma_r: float = Field(default=1e-6, gt=0, le=1e-2, description="Relative noise std")
    eic_cap: float = Field(default=16.0, gt=0, description="Maximum reported EIC")
    min_valid_fraction: float = Field(default=0.5, gt=0, le=1)
    rel_guard: float = Field(default=1e-300, ge=0, description="|y| threshold for usable samples")
    repeats: int = Field(default=1, ge=1, description="Noise passes aggregated by median")
    seed: int = Field(default=0, ge=0)

    @property
    def sigma_r2(self) -> float:
        return self.sigma_r**2


class FitnessConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    eta: float = Field(default=0.999, gt=0, lt=1, description="Complexity discount base")
    alpha: float = Field(default=0.01, ge=0, description="EIC penalty weight")
    ridge_lambda: float = Field(default=1e-8, ge=0)
    coef_tol: float = Field(
        default=1e-9,
        ge=0,
        description="Coefficients this close to 0 or 1 are pruned from the fitted formula",
    )


DEFAULT_UNARY: tuple[UnaryOp, ...] = (
    UnaryOp.SIN,
    UnaryOp.COS,
    UnaryOp.EXP,
    UnaryOp.LOG,
    UnaryOp.SQRT,
)
DEFAULT_BINARY: tuple[BinaryOp, ...] = (BinaryOp.ADD, BinaryOp.SUB, BinaryOp.MUL, BinaryOp.DIV)


class PrimitiveConfig(BaseModel):
    """Operators and leaves available to the search variation operators."""

    model_config = ConfigDict(frozen=True)

    unary_ops: tuple[UnaryOp, ...] = Field(default=DEFAULT_UNARY)
    binary_ops: tuple[BinaryOp, ...] = Field(default=DEFAULT_BINARY, min_length=1)
    constant_prob: float = Field(default=0.2, ge=0, le=1, description="Leaf is a constant")
    constant_low: float = Field(default=-5.0)
    constant_high: float = Field(default=5.0)


class GpConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    population_size: int = Field(default=256, ge=2)
    tournament_size: int = Field(default=4, ge=1)
    crossover_prob: float = Field(default=0.7, ge=0, le=1)
    mutation_prob: float = Field(default=0.3, ge=0, le=1)
    max_nodes: int = Field(default=50, ge=3)
    elitism: int = Field(default=1, ge=0)
    init_min_depth: int = Field(default=2, ge=1)
    init_max_depth: int = Field(default=5, ge=1)
    budget: Budget = Field(default_factory=lambda: Budget(unit="steps", amount=50))
    seed: int = Field(default=0, ge=0)
    primitives: PrimitiveConfig = Field(default_factory=PrimitiveConfig)
    fitness_cfg: FitnessConfig = Field(default_factory=lambda: FitnessConfig(alpha=0.002))
    eic_cfg: EicConfig = Field(default_factory=EicConfig)

    @model_validator(mode="after")
    def check_depths(self) -> GpConfig:
        if self.init_min_depth > self.init_max_depth:
            raise ValueError("init_min_depth must not exceed init_max_depth")
        if self.elitism >= self.population_size:
            raise ValueError("elitism must be smaller than population_size")
        return self


class MctsConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    ucb_c: float = Field(default=math.sqrt(2), ge=0, description="UCB exploration constant")
    max_children: int = Field(default=16, ge=1)
    max_nodes: int = Field(default=50, ge=3)
    root_depth: int = Field(default=2, ge=1)
    budget: Budget = Field(default_factory=lambda: Budget(unit="steps", amount=1000))
    seed: int = Field(default=0, ge=0)
    primitives: PrimitiveConfig = Field(default_factory=PrimitiveConfig)
    fitness_cfg: FitnessConfig = Field(default_factory=lambda: FitnessConfig(alpha=0.01))
    eic_cfg: EicConfig = Field(default_factory=EicConfig)


def _default_unary_weights() -> dict[UnaryOp, float]:
    return {op: 1.0 for op in UnaryOp}


def _default_binary_weights() -> dict[BinaryOp, float]:
    return {
        BinaryOp.ADD: 1.0,
        BinaryOp.SUB: 1.0,
        BinaryOp.MUL: 1.0,
        BinaryOp.DIV: 1.0,
        BinaryOp.POW: 0.5,
    }


class GeneratorConfig(BaseModel):
    """Random formula generator knobs."""

    model_config = ConfigDict(frozen=True)

    min_binary_ops: int = Field(default=2, ge=0)
    max_binary_ops: int = Field(default=8, ge=0)
    max_unary_ops: int = Field(default=4, ge=0)
    n_vars: int = Field(default=2, ge=1, description="Arity d")
    unary_weights: dict[UnaryOp, float] = Field(default_factory=_default_unary_weights)
    binary_weights: dict[BinaryOp, float] = Field(default_factory=_default_binary_weights)
    leaf_constant_prob: float = Field(default=0.4, ge=0, lt=1)
    int_constant_prob: float = Field(default=0.5, ge=0, le=1)
    int_constant_max: int = Field(default=5, ge=0)
    real_constant_bound: float = Field(default=10.0, gt=0)
    seed: int = Field(default=0, ge=0)

    @field_validator("unary_weights", "binary_weights")
    @classmethod
    def validate_weights(cls, v: dict[Any, float]) -> dict[Any, float]:
        if any(w <= 0 or not math.isfinite(w) for w in v.values()):
            raise ValueError("operator weights must be positive and finite")
        return v

    @model_validator(mode="after")
    def check_operators(self) -> GeneratorConfig:
        if self.min_binary_ops > self.max_binary_ops:
            raise ValueError("min_binary_ops must not exceed max_binary_ops")
        if self.max_binary_ops > 0 and not self.binary_weights:
            raise ValueError("binary_weights is empty but max_binary_ops > 0")
        if self.max_unary_ops > 0 and not self.unary_weights:
            raise ValueError("unary_weights is empty but max_unary_ops > 0")
        return self


class FilterConfig(BaseModel):
    """EIC rejection filter and its probe-data law."""

    model_config = ConfigDict(frozen=True)

    theta: float = Field(default=2.0, gt=0, description="Accept formulas with EIC <= theta")
    max_retries: int = Field(default=1000, ge=1)
    probe_rows: int = Field(default=256, ge=2)
    probe_low: float = Field(default=1.0)
    probe_high: float = Field(default=5.0)
    probe_seed: int = Field(default=0, ge=0)
    eic_cfg: EicConfig = Field(default_factory=EicConfig)

    @model_validator(mode="after")
    def check_range(self) -> FilterConfig:
        if self.probe_low >= self.probe_high:
            raise ValueError("probe_low must be below probe_high")
        return self


class BenchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    noise_eta: float = Field(default=0.0, ge=0, description="Target noise level, std = eta*Std[y]")
    split: float = Field(default=0.75, gt=0, lt=1, description="Train fraction")
    trials: int = Field(default=10, ge=1)
    method: Literal["gp", "mcts"] = Field(default="mcts")
    n_rows: int = Field(default=200, ge=4, description="Rows generated per built-in problem")
    r2_threshold: float = Field(default=0.8, description="Report retention filter on test R2")
    record_runtime: bool = Field(default=False, description="Measure wall-clock runtime per trial")
    seed: int = Field(default=0, ge=0)
    gp: GpConfig = Field(default_factory=GpConfig)
    mcts: MctsConfig = Field(default_factory=MctsConfig)
    eic_cfg: EicConfig = Field(default_factory=EicConfig)

    @property
    def alpha(self) -> float:
        search = self.gp if self.method == "gp" else self.mcts
        return search.fitness_cfg.alpha
