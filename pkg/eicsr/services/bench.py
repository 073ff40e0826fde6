"""
Bench Service - multi-trial search experiments and their reports.

Each problem x trial is an independent, fully seeded job: split, add noise to
the training targets, search, then score the best candidate on the clean
test split. Jobs fan out over worker threads and are reassembled in
problem x trial order, so reports do not depend on scheduling.
"""
import asyncio
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
import pandas as pd

from eicsr.core.config import settings
from eicsr.core.dataset import Dataset
from eicsr.core.evaluate import evaluate
from eicsr.core.exceptions import DegenerateFitError, InsufficientDataError
from eicsr.core.expression import Expression
from eicsr.core.parser import parse
from eicsr.schemas.config import BenchConfig, EicConfig
from eicsr.schemas.response import BenchReport, BenchRow, ProblemSummary
from eicsr.schemas.state import Candidate
from eicsr.search.gp import gp_search
from eicsr.search.mcts import mcts_search
from eicsr.services.eic import calculate_eic
from eicsr.services.fitting import r2_score
from eicsr.services.logger import get_logger

logger = get_logger(__name__)

Category = Literal["physics", "pathological", "custom"]

CSV_COLUMNS = [
    "problem",
    "trial",
    "method",
    "alpha",
    "noise_eta",
    "r2",
    "nmse",
    "complexity",
    "eic",
    "runtime_s",
]

TRUTH_EIC_ROWS = 256


@dataclass(frozen=True)
class BenchProblem:
    """
    A benchmark problem: a ground-truth formula with an input range, or a
    fixed dataset (truth unknown).
    """

    name: str
    category: Category
    truth: Expression | None = None
    n_vars: int = 1
    low: float = 1.0
    high: float = 5.0
    data: Dataset | None = None

    @classmethod
    def from_formula(
        cls,
        name: str,
        category: Category,
        text: str,
        n_vars: int,
        low: float = 1.0,
        high: float = 5.0,
    ) -> "BenchProblem":
        return cls(
            name=name, category=category, truth=parse(text), n_vars=n_vars, low=low, high=high
        )

    @classmethod
    def from_dataset(cls, name: str, data: Dataset) -> "BenchProblem":
        return cls(name=name, category="custom", n_vars=data.arity, data=data)


_PHYSICS = [
    ("product", "x1*x2", 2),
    ("ratio", "x1*x2/x3", 3),
    ("kinetic_energy", "0.5*x1*x2^2", 2),
    ("inverse_square", "x1*x2/x3^2", 3),
    ("hypotenuse", "sqrt(x1^2+x2^2)", 2),
    ("decay", "x1/exp(x2)", 2),
    ("projection", "x1*sin(x2/4)", 2),
    ("divider", "x1/(x2+x3)", 3),
    ("volume", "x1*x2*x3", 3),
    ("pendulum_period", "2*3.14159*sqrt(x1/x2)", 2),
]

_PATHOLOGICAL = [
    ("shifted_cancel", "(x1+1e10)-1e10", 1),
    ("nullified_cancel", "0*((x1+1e100)-1e100)+x1", 1),
    ("mild_cancel", "(x1+1e6)-1e6", 1),
    ("double_exp", "exp(exp(x1))", 1),
    ("sin_double_exp", "sin(exp(exp(x1)))", 1),
    ("fast_sine", "sin(1e4*x1)", 1),
    ("near_pole", "1/(x1*1.000001-x1)", 1),
    ("root_cancel", "(x1^2+1e8)^0.5-1e4", 1),
    ("nested_trig_exp", "cos(sin(exp(x1*x2)))", 2),
    ("tangent", "tan(x1*x2)", 2),
]


def builtin_suite(
    category: Literal["all", "physics", "pathological"] = "all",
) -> list[BenchProblem]:
    """Ten physics-style ground truths and ten numerically pathological formulas on (1, 5)."""
    problems = []
    if category in ("all", "physics"):
        problems += [BenchProblem.from_formula(n, "physics", t, d) for n, t, d in _PHYSICS]
    if category in ("all", "pathological"):
        problems += [
            BenchProblem.from_formula(n, "pathological", t, d) for n, t, d in _PATHOLOGICAL
        ]
    return problems


def problem_dataset(problem: BenchProblem, n_rows: int, seed: int) -> Dataset:
    """The problem's fixed dataset, or n_rows inputs drawn on its range with y = truth(x)."""
    if problem.data is not None:
        return problem.data
    assert problem.truth is not None
    rng = np.random.default_rng(seed)
    inputs = Dataset.uniform(problem.n_vars, n_rows, problem.low, problem.high, rng)
    return inputs.with_target(evaluate(problem.truth, inputs).values)


def ground_truth_eic(
    problem: BenchProblem,
    cfg: EicConfig | None = None,
    rows: int = TRUTH_EIC_ROWS,
    seed: int = 0,
) -> float | None:
    """EIC of the ground-truth formula on `rows` fresh inputs; None without a truth."""
    if problem.truth is None:
        return None
    rng = np.random.default_rng(seed)
    probe = Dataset.uniform(problem.n_vars, rows, problem.low, problem.high, rng)
    return calculate_eic(problem.truth, probe, cfg).overall


def add_noise(data: Dataset, eta: float, seed: int) -> Dataset:
    """
    Copy of data with y + N(0, (eta * Std[y])^2) noise.

    eta = 0 or a constant target returns the input unchanged.
    """
    if eta < 0:
        raise ValueError("noise level must be non-negative")
    scale = eta * float(np.std(data.y))
    if scale == 0.0:
        return data
    rng = np.random.default_rng(seed)
    return data.with_target(data.y + rng.normal(0.0, scale, size=data.n_rows))


def split(data: Dataset, frac: float, seed: int) -> tuple[Dataset, Dataset]:
    """
    Seeded uniform row partition; the train part has floor(frac * n + 0.5) rows.

    Both parts keep their rows in source order.

    Raises:
        InsufficientDataError: fewer than 2 rows
    """
    if not 0.0 < frac < 1.0:
        raise ValueError("split fraction must lie in (0, 1)")
    n = data.n_rows
    if n < 2:
        raise InsufficientDataError("split needs at least 2 rows", rows=n)
    n_train = min(max(math.floor(frac * n + 0.5), 1), n - 1)
    order = np.random.default_rng(seed).permutation(n)
    return data.subset(np.sort(order[:n_train])), data.subset(np.sort(order[n_train:]))


def _search(train: Dataset, cfg: BenchConfig, seed: int) -> list[Candidate]:
    if cfg.method == "gp":
        return gp_search(train, cfg.gp.model_copy(update={"seed": seed}))
    return mcts_search(train, cfg.mcts.model_copy(update={"seed": seed}))


def _run_trial(
    problem: BenchProblem,
    problem_index: int,
    trial: int,
    cfg: BenchConfig,
    truth_eic: float | None,
) -> BenchRow:
    row = BenchRow(
        problem=problem.name,
        category=problem.category,
        trial=trial,
        method=cfg.method,
        alpha=cfg.alpha,
        noise_eta=cfg.noise_eta,
        truth_eic=truth_eic,
    )
    start = time.perf_counter()
    try:
        data_seq = np.random.SeedSequence(cfg.seed, spawn_key=(problem_index,))
        data_seed = int(data_seq.generate_state(1)[0])
        split_seed, noise_seed, search_seed = (
            int(s)
            for s in np.random.SeedSequence(
                cfg.seed, spawn_key=(problem_index, trial)
            ).generate_state(3)
        )
        data = problem_dataset(problem, cfg.n_rows, data_seed)
        train, test = split(data, cfg.split, split_seed)
        train = add_noise(train, cfg.noise_eta, noise_seed)

        archive = _search(train, cfg, search_seed)
        if not archive:
            raise DegenerateFitError("search produced no finite candidate")
        best = max(archive, key=lambda c: (c.fitness, -c.complexity))
        update = {
            "formula": best.formula,
            "r2": r2_score(best.fitted, test),
            "nmse": best.nmse,
            "complexity": best.complexity,
            "eic": best.eic,
            "archive_size": len(archive),
            "archive_mean_eic": float(np.mean([c.eic for c in archive])),
        }
    except Exception as e:
        logger.error(f"Trial failed: problem={problem.name}, trial={trial}: {e}")
        update = {"error": f"{type(e).__name__}: {e}"}

    if cfg.record_runtime:
        update["runtime_s"] = time.perf_counter() - start
    return row.model_copy(update=update)


def _mean(values: Sequence[float]) -> float | None:
    return float(np.mean(values)) if values else None


def summarize(
    rows: Sequence[BenchRow],
    problem: str,
    category: str,
    threshold: float,
    truth_eic: float | None = None,
) -> ProblemSummary:
    """
    Means over the rows that produced a candidate; R2 means use finite test R2 only.
    """
    ok = [r for r in rows if r.error is None]
    finite = [r.r2 for r in ok if r.r2 is not None]
    return ProblemSummary(
        problem=problem,
        category=category,
        truth_eic=truth_eic,
        mean_r2=_mean(finite),
        mean_complexity=_mean([r.complexity for r in ok if r.complexity is not None]),
        mean_eic=_mean([r.eic for r in ok if r.eic is not None]),
        mean_runtime_s=_mean([r.runtime_s for r in rows]) or 0.0,
        trials=len(rows),
        retained=sum(1 for r2 in finite if r2 > threshold),
        nonfinite=len(ok) - len(finite),
        failed=len(rows) - len(ok),
    )


class BenchService:
    """
    Runs every problem x trial of a bench concurrently.

    Workers are threads bounded by a semaphore of `threads` (EICSR_THREADS
    by default).
    """

    def __init__(self, cfg: BenchConfig | None = None, threads: int | None = None) -> None:
        self.cfg = cfg or BenchConfig()
        self.threads = threads or settings.threads

    async def run(self, problems: Sequence[BenchProblem]) -> BenchReport:
        """
        Args:
            problems: non-empty problem list

        Returns:
            BenchReport with rows in problem x trial order
        """
        if not problems:
            raise ValueError("bench needs at least one problem")
        cfg = self.cfg
        logger.info(
            f"Bench: problems={len(problems)}, trials={cfg.trials}, method={cfg.method}, "
            f"alpha={cfg.alpha}, noise={cfg.noise_eta}, threads={self.threads}"
        )
        truth = [ground_truth_eic(p, cfg.eic_cfg, seed=cfg.seed) for p in problems]
        semaphore = asyncio.Semaphore(self.threads)

        async def guarded(index: int, trial: int) -> BenchRow:
            async with semaphore:
                return await asyncio.to_thread(
                    _run_trial, problems[index], index, trial, cfg, truth[index]
                )

        rows = await asyncio.gather(
            *(guarded(i, t) for i in range(len(problems)) for t in range(cfg.trials))
        )

        summaries = []
        for i, problem in enumerate(problems):
            mine = rows[i * cfg.trials : (i + 1) * cfg.trials]
            summaries.append(
                summarize(mine, problem.name, problem.category, cfg.r2_threshold, truth[i])
            )
        known = [t for t in truth if t is not None]
        aggregate = summarize(rows, "all", "all", cfg.r2_threshold, _mean(known))

        logger.info(
            f"Bench finished: rows={len(rows)}, failed={aggregate.failed}, "
            f"retained={aggregate.retained}"
        )
        return BenchReport(
            method=cfg.method,
            alpha=cfg.alpha,
            noise_eta=cfg.noise_eta,
            trials=cfg.trials,
            seed=cfg.seed,
            r2_threshold=cfg.r2_threshold,
            rows=list(rows),
            problems=summaries,
            aggregate=aggregate,
        )


def run_bench(
    problems: Sequence[BenchProblem],
    cfg: BenchConfig | None = None,
    threads: int | None = None,
) -> BenchReport:
    """Blocking entry point around BenchService.run."""
    return asyncio.run(BenchService(cfg, threads).run(problems))


def write_csv(report: BenchReport, path: str | Path) -> None:
    frame = pd.DataFrame([row.model_dump(include=set(CSV_COLUMNS)) for row in report.rows])
    frame.reindex(columns=CSV_COLUMNS).to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} bench rows to {path}")
