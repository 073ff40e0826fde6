"""
Effective Information Criterion.

A formula is evaluated twice in lockstep: once exactly (clean) and once with
multiplicative Gaussian noise of relative std sigma_r injected at every
operator output (leaves stay exact). At each operator node the relative noise
variance delta_r2 = Var[(noisy - clean) / clean] is measured and the node EIC
is log10(delta_r2 / sigma_r2), the decimal digits lost to the subformula.
The formula's EIC is the max over its nodes and 0.

Noise for a node is drawn from a stream keyed by (seed, repeat, node path), so
results do not depend on evaluation order.
"""
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from eicsr.core.dataset import Dataset
from eicsr.core.evaluate import check_arity
from eicsr.core.exceptions import DomainError, InsufficientDataError
from eicsr.core.expression import (
    Binary,
    Constant,
    Expression,
    Path,
    Unary,
    Variable,
    node_at,
    path_to_str,
    to_string,
)
from eicsr.core.operators import Array, apply_binary, apply_unary
from eicsr.schemas.config import EicConfig
from eicsr.schemas.response import EicReport, NodeEic
from eicsr.services.logger import get_logger

logger = get_logger(__name__)


def n_from_sigma(sigma_r2: float) -> float:
    """Significant digits N carried by relative noise of variance sigma_r2."""
    if not sigma_r2 > 0:
        raise DomainError("relative noise variance must be positive", sigma_r2=sigma_r2)
    return 1.0 - 0.5 * math.log10(12.0 * sigma_r2)


def sigma_from_n(n: float) -> float:
    """Relative noise variance equivalent to N significant digits."""
    return (1.0 / 12.0) * 10.0 ** (2.0 * (1.0 - n))


def digit_loss(sigma_r2: float, delta_r2: float) -> float:
    """
    N - M: significant digits in minus significant digits out.

    A node EIC equals twice this value; EIC is measured on variances while
    digits scale with the standard deviation.
    """
    return n_from_sigma(sigma_r2) - n_from_sigma(delta_r2)


@dataclass(frozen=True)
class _NodeStats:
    eic: float
    delta_r2: float | None
    valid: int
    invalid: int
    capped: bool


def _noise(cfg: EicConfig, repeat: int, path: Path, n: int) -> Array:
    seq = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(repeat, *path))
    return np.random.default_rng(seq).standard_normal(n) * cfg.sigma_r


def _node_stats(noisy: Array, clean: Array, cfg: EicConfig) -> _NodeStats:
    n = clean.shape[0]
    with np.errstate(all="ignore"):
        rel = (noisy - clean) / clean
    valid = np.isfinite(noisy) & np.isfinite(clean) & (np.abs(clean) > cfg.rel_guard)
    valid &= np.isfinite(rel)
    n_valid = int(valid.sum())

    if n_valid == 0 or n_valid < cfg.min_valid_fraction * n:
        return _NodeStats(cfg.eic_cap, None, n_valid, n - n_valid, True)

    with np.errstate(all="ignore"):
        delta_r2 = float(np.var(rel[valid]))
    if not math.isfinite(delta_r2):
        return _NodeStats(cfg.eic_cap, None, n_valid, n - n_valid, True)
    if delta_r2 == 0.0:
        return _NodeStats(-cfg.eic_cap, 0.0, n_valid, n - n_valid, False)

    raw = math.log10(delta_r2 / cfg.sigma_r2)
    eic = min(max(raw, -cfg.eic_cap), cfg.eic_cap)
    return _NodeStats(eic, delta_r2, n_valid, n - n_valid, raw > cfg.eic_cap)


def _noisy_pass(
    e: Expression,
    X: Array,
    cfg: EicConfig,
    repeat: int,
    root_path: Path,
) -> dict[Path, _NodeStats]:
    stats: dict[Path, _NodeStats] = {}
    n = X.shape[1]

    def walk(node: Expression, path: Path) -> tuple[Array, Array]:
        if isinstance(node, Variable):
            values = X[node.index].astype(np.float64, copy=True)
            return values, values
        if isinstance(node, Constant):
            values = np.full(n, node.value, dtype=np.float64)
            return values, values
        if isinstance(node, Unary):
            noisy_c, clean_c = walk(node.child, path + (0,))
            noisy = apply_unary(node.op, noisy_c)
            clean = apply_unary(node.op, clean_c)
        elif isinstance(node, Binary):
            noisy_l, clean_l = walk(node.left, path + (0,))
            noisy_r, clean_r = walk(node.right, path + (1,))
            noisy = apply_binary(node.op, noisy_l, noisy_r)
            clean = apply_binary(node.op, clean_l, clean_r)
        else:
            raise TypeError(f"not an expression: {node!r}")

        eps = _noise(cfg, repeat, root_path + path, n)
        with np.errstate(all="ignore"):
            noisy = noisy + eps * noisy
        stats[path] = _node_stats(noisy, clean, cfg)
        return noisy, clean

    walk(e, ())
    return stats


def _median_stats(passes: Sequence[_NodeStats], cfg: EicConfig) -> _NodeStats:
    if len(passes) == 1:
        return passes[0]
    eic = float(np.median([p.eic for p in passes]))
    deltas = [p.delta_r2 for p in passes if p.delta_r2 is not None]
    delta_r2 = float(np.median(deltas)) if len(deltas) == len(passes) else None
    valid = min(p.valid for p in passes)
    invalid = max(p.invalid for p in passes)
    return _NodeStats(eic, delta_r2, valid, invalid, eic >= cfg.eic_cap)


def calculate_eic(
    e: Expression,
    data: Dataset,
    cfg: EicConfig | None = None,
    root_path: Sequence[int] = (),
) -> EicReport:
    """
    Score the digits a formula loses under finite-precision evaluation.

    Args:
        e: Formula to score
        data: Input rows (the target is ignored)
        cfg: Noise parameters; defaults to EicConfig()
        root_path: Path of e inside a larger formula. Noise streams are keyed by
            root_path + local path, so a subformula scored with its path sees the
            same noise it sees inside the parent.

    Raises:
        InsufficientDataError: fewer than 2 rows
        ArityError: a variable index is out of range
    """
    cfg = cfg or EicConfig()
    if data.n_rows < 2:
        raise InsufficientDataError("EIC needs at least 2 rows", rows=data.n_rows)
    check_arity(e, data)

    root = tuple(root_path)
    passes = [_noisy_pass(e, data.X, cfg, repeat, root) for repeat in range(cfg.repeats)]
    merged = {path: _median_stats([p[path] for p in passes], cfg) for path in passes[0]}

    per_node: dict[str, NodeEic] = {}
    for path in sorted(merged):
        stats = merged[path]
        per_node[path_to_str(path)] = NodeEic(
            path=path_to_str(path),
            formula=to_string(node_at(e, path)),
            eic=stats.eic,
            delta_r2=stats.delta_r2,
            valid_samples=stats.valid,
            invalid_samples=stats.invalid,
            capped=stats.capped,
        )

    # leaves contribute 0 to the max
    highest = max([0.0, *(s.eic for s in merged.values())])
    overall = min(highest, cfg.eic_cap)
    root_stats = merged.get(())
    invalid = max(sum(s.invalid for s in p.values()) for p in passes)

    report = EicReport(
        formula=to_string(e),
        overall=overall,
        per_node=per_node,
        delta_r2_root=root_stats.delta_r2 if root_stats is not None else 0.0,
        invalid_samples=invalid,
        clipped=highest >= cfg.eic_cap,
        sigma_r=cfg.sigma_r,
        repeats=cfg.repeats,
    )
    logger.debug(f"EIC {report.formula}: overall={overall:.4f}, nodes={len(per_node)}")
    return report


def eic_sigma_invariance(
    e: Expression,
    data: Dataset,
    sigmas: Sequence[float],
    cfg: EicConfig | None = None,
) -> float:
    """Max pairwise |EIC difference| across the given sigma_r values."""
    cfg = cfg or EicConfig()
    scores = [
        calculate_eic(e, data, cfg.model_copy(update={"sigma_r": sigma})).overall
        for sigma in sigmas
    ]
    if not scores:
        return 0.0
    return max(scores) - min(scores)
