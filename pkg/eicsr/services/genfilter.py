"""
Random formula corpora.

Formulas are sampled with uniformly distributed binary-tree shapes (empty-node
counting over prefix sequences), decorated with unary operators and filled
with weighted operators and random leaves. An optional EIC rejection filter
regenerates a formula until its EIC on fixed probe data is at most theta.
Corpora are compared through feature histograms with JS and KL divergences.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.stats import entropy

from eicsr.core.dataset import Dataset
from eicsr.core.exceptions import BinMismatchError, EmptyCorpusError, FilterExhaustedError
from eicsr.core.expression import (
    Binary,
    Constant,
    Expression,
    Unary,
    Variable,
    complexity,
    count_constants,
    count_operators,
    iter_nodes,
    node_at,
    replace_at,
    to_string,
    variables_used,
)
from eicsr.core.operators import Array, UnaryOp
from eicsr.schemas.config import FilterConfig, GeneratorConfig
from eicsr.schemas.response import CorpusRecord, DivergenceRow
from eicsr.services.eic import calculate_eic
from eicsr.services.logger import get_logger

logger = get_logger(__name__)

FEATURES = ("variables", "constants", "operators", "length")
MAX_COUNT_BIN = 20
MAX_LENGTH_BIN = 60
SMOOTHING = 1e-10


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def count_trees(empty: int, ops: int) -> int:
    """
    Number of binary trees obtainable from `empty` empty nodes by placing `ops` operators.
    """
    if empty == 0:
        return 0
    if ops == 0:
        return 1
    return count_trees(empty - 1, ops) + count_trees(empty + 1, ops - 1)


def _shape(n_binary: int, rng: np.random.Generator) -> list[bool]:
    """Prefix sequence of a uniformly drawn tree shape; True marks an operator."""
    sequence: list[bool] = []
    empty, ops = 1, n_binary
    while ops > 0:
        total = count_trees(empty, ops)
        probs = np.array(
            [count_trees(empty - k + 1, ops - 1) / total for k in range(empty)], dtype=np.float64
        )
        skipped = int(rng.choice(empty, p=probs / probs.sum()))
        sequence.extend([False] * skipped)
        sequence.append(True)
        empty, ops = empty - skipped + 1, ops - 1
    sequence.extend([False] * empty)
    return sequence


class _Filler:
    def __init__(self, cfg: GeneratorConfig, rng: np.random.Generator) -> None:
        self.cfg = cfg
        self.rng = rng
        self.binary_ops = list(cfg.binary_weights)
        weights = np.array([cfg.binary_weights[op] for op in self.binary_ops])
        self.binary_p = weights / weights.sum()
        self.unary_ops = list(cfg.unary_weights)
        weights = np.array([cfg.unary_weights[op] for op in self.unary_ops])
        self.unary_p = weights / weights.sum() if len(weights) else weights

    def leaf(self) -> Expression:
        cfg, rng = self.cfg, self.rng
        if rng.random() >= cfg.leaf_constant_prob:
            return Variable(int(rng.integers(cfg.n_vars)))
        if rng.random() < cfg.int_constant_prob:
            return Constant(float(rng.integers(-cfg.int_constant_max, cfg.int_constant_max + 1)))
        bound = cfg.real_constant_bound
        return Constant(round(float(rng.uniform(-bound, bound)), 3))

    def build(self, tokens: Iterator[bool]) -> Expression:
        if next(tokens):
            op = self.binary_ops[int(self.rng.choice(len(self.binary_ops), p=self.binary_p))]
            left = self.build(tokens)
            right = self.build(tokens)
            return Binary(op, left, right)
        return self.leaf()

    def unary_op(self) -> UnaryOp:
        return self.unary_ops[int(self.rng.choice(len(self.unary_ops), p=self.unary_p))]


def _draw(cfg: GeneratorConfig, rng: np.random.Generator) -> Expression:
    n_binary = int(rng.integers(cfg.min_binary_ops, cfg.max_binary_ops + 1))
    n_unary = int(rng.integers(cfg.max_unary_ops + 1)) if cfg.unary_weights else 0
    filler = _Filler(cfg, rng)
    tree = filler.build(iter(_shape(n_binary, rng)))
    for _ in range(n_unary):
        paths = [path for path, _ in iter_nodes(tree)]
        path = paths[int(rng.integers(len(paths)))]
        tree = replace_at(tree, path, Unary(filler.unary_op(), node_at(tree, path)))
    return tree


def generate(cfg: GeneratorConfig, rng: np.random.Generator) -> Expression:
    """
    Random unary-binary formula.

    The binary count b ~ U{min_binary_ops..max_binary_ops} and unary count
    u ~ U{0..max_unary_ops} are drawn first; the binary shape is uniform among
    shapes with b operators and each unary operator is inserted above a
    uniformly chosen node. Formulas without any variable are redrawn whole.
    """
    tree = _draw(cfg, rng)
    while not variables_used(tree):
        tree = _draw(cfg, rng)
    return tree


def probe_dataset(gcfg: GeneratorConfig, fcfg: FilterConfig) -> Dataset:
    """The fixed input sample formulas are EIC-scored on during filtering."""
    rng = np.random.default_rng(fcfg.probe_seed)
    return Dataset.uniform(gcfg.n_vars, fcfg.probe_rows, fcfg.probe_low, fcfg.probe_high, rng)


@dataclass(frozen=True)
class FilteredSample:
    expr: Expression
    attempts: int
    eic: float


def _filtered(
    gcfg: GeneratorConfig,
    fcfg: FilterConfig,
    rng: np.random.Generator,
    probe: Dataset,
) -> FilteredSample:
    for attempt in range(1, fcfg.max_retries + 1):
        expr = generate(gcfg, rng)
        eic = calculate_eic(expr, probe, fcfg.eic_cfg).overall
        if eic <= fcfg.theta:
            return FilteredSample(expr, attempt, eic)
    raise FilterExhaustedError(
        f"no formula with EIC <= {fcfg.theta} in {fcfg.max_retries} attempts",
        theta=fcfg.theta,
        max_retries=fcfg.max_retries,
    )


def generate_filtered(
    gcfg: GeneratorConfig,
    fcfg: FilterConfig,
    rng: np.random.Generator,
    probe: Dataset | None = None,
) -> tuple[Expression, int]:
    """
    Generate until a formula scores EIC <= theta on the probe data.

    Returns:
        (formula, attempts used)

    Raises:
        FilterExhaustedError: max_retries formulas were all rejected
    """
    sample = _filtered(gcfg, fcfg, rng, probe or probe_dataset(gcfg, fcfg))
    return sample.expr, sample.attempts


def build_corpus(
    count: int,
    gcfg: GeneratorConfig,
    fcfg: FilterConfig | None = None,
    seed: int | None = None,
) -> list[CorpusRecord]:
    """
    `count` formulas, each from its own stream keyed by (seed, item index).

    Without fcfg the corpus is unfiltered; EIC is still reported on the
    default probe data.
    """
    seed = gcfg.seed if seed is None else seed
    scoring = fcfg or FilterConfig()
    probe = probe_dataset(gcfg, scoring)
    records = []
    for index in range(count):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
        if fcfg is not None:
            sample = _filtered(gcfg, fcfg, rng, probe)
        else:
            expr = generate(gcfg, rng)
            sample = FilteredSample(expr, 1, calculate_eic(expr, probe, scoring.eic_cfg).overall)
        records.append(
            CorpusRecord(
                formula=to_string(sample.expr),
                eic=sample.eic,
                attempts=sample.attempts,
                complexity=complexity(sample.expr),
            )
        )
    attempts = sum(r.attempts for r in records)
    logger.info(
        f"Corpus built: count={count}, filtered={fcfg is not None}, "
        f"acceptance={count / attempts if attempts else 1.0:.3f}"
    )
    return records


# ---------------------------------------------------------------------------
# Feature histograms and divergences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureHistogram:
    """
    Smoothed, normalised distributions of four formula features.

    Count features use bins 0..20 plus an overflow bin; length uses 1..60 plus
    an overflow bin.
    """

    distributions: dict[str, Array] = field(default_factory=dict)
    size: int = 0
    epsilon: float = SMOOTHING

    def __getitem__(self, feature: str) -> Array:
        return self.distributions[feature]


def formula_features(e: Expression) -> dict[str, int]:
    return {
        "variables": len(variables_used(e)),
        "constants": count_constants(e),
        "operators": count_operators(e),
        "length": complexity(e),
    }


def _normalise(counts: Array, epsilon: float) -> Array:
    p = counts / counts.sum() + epsilon
    return p / p.sum()


def featurize(corpus: Sequence[Expression], epsilon: float = SMOOTHING) -> FeatureHistogram:
    """
    Raises:
        EmptyCorpusError: corpus has no formulas
    """
    if not corpus:
        raise EmptyCorpusError("cannot featurize an empty corpus")
    counts = {
        "variables": np.zeros(MAX_COUNT_BIN + 2),
        "constants": np.zeros(MAX_COUNT_BIN + 2),
        "operators": np.zeros(MAX_COUNT_BIN + 2),
        "length": np.zeros(MAX_LENGTH_BIN + 1),
    }
    for e in corpus:
        for name, value in formula_features(e).items():
            if name == "length":
                counts[name][min(value, MAX_LENGTH_BIN + 1) - 1] += 1
            else:
                counts[name][min(value, MAX_COUNT_BIN + 1)] += 1
    return FeatureHistogram(
        distributions={name: _normalise(c, epsilon) for name, c in counts.items()},
        size=len(corpus),
        epsilon=epsilon,
    )


def _check_layout(p: FeatureHistogram, q: FeatureHistogram) -> None:
    if set(p.distributions) != set(q.distributions) or any(
        p[name].shape != q[name].shape for name in p.distributions
    ):
        raise BinMismatchError(
            "histograms have different bin layouts",
            left={k: len(v) for k, v in p.distributions.items()},
            right={k: len(v) for k, v in q.distributions.items()},
        )


def js_divergence(p: FeatureHistogram, q: FeatureHistogram) -> dict[str, float]:
    """Per-feature Jensen-Shannon divergence in bits, within [0, 1]."""
    _check_layout(p, q)
    result = {}
    for name in p.distributions:
        m = 0.5 * (p[name] + q[name])
        js = 0.5 * entropy(p[name], m, base=2) + 0.5 * entropy(q[name], m, base=2)
        result[name] = float(min(max(js, 0.0), 1.0))
    return result


def kl_divergence(p: FeatureHistogram, q: FeatureHistogram) -> dict[str, float]:
    """Per-feature KL(p || q) in bits over the smoothed distributions."""
    _check_layout(p, q)
    return {name: float(max(entropy(p[name], q[name], base=2), 0.0)) for name in p.distributions}


def compare_corpora(
    corpora: Mapping[str, Sequence[Expression]],
    reference: Sequence[Expression],
) -> list[DivergenceRow]:
    """
    Divergence of each corpus from the reference, feature by feature.

    js_reduction is the relative JS drop against the first corpus listed.
    """
    ref = featurize(reference)
    rows: list[DivergenceRow] = []
    baseline: dict[str, float] | None = None
    for name, corpus in corpora.items():
        hist = featurize(corpus)
        js = js_divergence(hist, ref)
        kl = kl_divergence(hist, ref)
        for feature in FEATURES:
            reduction = None
            if baseline is not None and baseline[feature] > 0:
                reduction = (baseline[feature] - js[feature]) / baseline[feature]
            rows.append(
                DivergenceRow(
                    corpus=name,
                    feature=feature,
                    js=js[feature],
                    kl=kl[feature],
                    js_reduction=reduction,
                )
            )
        if baseline is None:
            baseline = js
    return rows
