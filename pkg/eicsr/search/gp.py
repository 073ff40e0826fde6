"""
Genetic programming over expression trees.

Population evolves by tournament selection, crossover, mutation and elitist
replacement under fitness_alpha. Every evaluated candidate is offered to a
Pareto archive over complexity and EIC-penalised accuracy, which is the
search result.
"""
import time

import numpy as np

from eicsr.core.dataset import Dataset
from eicsr.core.expression import Expression, complexity
from eicsr.schemas.config import GpConfig
from eicsr.schemas.state import Candidate
from eicsr.search.variation import Mutator, PrimitiveSet, crossover
from eicsr.services.evaluation import CandidateEvaluator
from eicsr.services.logger import get_logger
from eicsr.services.ranking import ParetoArchive

logger = get_logger(__name__)

# spawn-key namespaces for the per-run random streams
_INIT_STREAM = 0
_GENERATION_STREAM = 1


def rank_key(candidate: Candidate, draw: int) -> tuple[float, int, float, int]:
    """Higher fitness first, then lower complexity, lower EIC, earlier draw."""
    return (-candidate.fitness, candidate.complexity, candidate.eic, draw)


class GeneticProgramming:
    """
    One GP run on a training dataset.

    Attributes:
        archive: non-dominated set of all evaluated candidates
        history: best population fitness after initialisation and each generation
        generations: generations completed
    """

    def __init__(self, data: Dataset, cfg: GpConfig | None = None) -> None:
        self.data = data
        self.cfg = cfg or GpConfig()
        self.primitives = PrimitiveSet(data.arity, self.cfg.primitives)
        self.mutator = Mutator(self.primitives, self.cfg.max_nodes)
        self.evaluator = CandidateEvaluator(data, self.cfg.fitness_cfg, self.cfg.eic_cfg)
        self.archive = ParetoArchive(
            alpha=self.cfg.fitness_cfg.alpha, max_complexity=self.cfg.max_nodes
        )
        self.history: list[float] = []
        self.generations = 0

    def _rng(self, *key: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.cfg.seed, spawn_key=key))

    def initial_population(self) -> list[Expression]:
        """Ramped half-and-half over depths init_min_depth..init_max_depth."""
        rng = self._rng(_INIT_STREAM)
        depths = list(range(self.cfg.init_min_depth, self.cfg.init_max_depth + 1))
        population = []
        for i in range(self.cfg.population_size):
            depth = depths[i % len(depths)]
            method = "full" if (i // len(depths)) % 2 == 0 else "grow"
            tree = self.primitives.random_tree(rng, depth, method)
            while complexity(tree) > self.cfg.max_nodes:
                depth = max(1, depth - 1)
                tree = self.primitives.random_tree(rng, depth, "grow")
            population.append(tree)
        return population

    def _score(self, population: list[Expression]) -> list[Candidate]:
        scored = [self.evaluator.evaluate(e) for e in population]
        self.archive.extend(scored)
        return scored

    def _tournament(self, scored: list[Candidate], rng: np.random.Generator) -> Candidate:
        draws = rng.integers(len(scored), size=self.cfg.tournament_size)
        winner = min(range(len(draws)), key=lambda k: rank_key(scored[draws[k]], k))
        return scored[draws[winner]]

    def _next_generation(
        self, scored: list[Candidate], rng: np.random.Generator
    ) -> list[Expression]:
        cfg = self.cfg
        ranked = sorted(range(len(scored)), key=lambda i: rank_key(scored[i], i))
        offspring = [scored[i].expr for i in ranked[: cfg.elitism]]
        while len(offspring) < cfg.population_size:
            roll = rng.random()
            if roll < cfg.crossover_prob:
                a = self._tournament(scored, rng).expr
                b = self._tournament(scored, rng).expr
                offspring.extend(crossover(a, b, rng, cfg.max_nodes))
            elif roll < cfg.crossover_prob + cfg.mutation_prob:
                offspring.append(self.mutator.mutate(self._tournament(scored, rng).expr, rng))
            else:
                offspring.append(self._tournament(scored, rng).expr)
        return offspring[: cfg.population_size]

    def run(self) -> list[Candidate]:
        """
        Evolve until the budget is spent and return the archive.

        Raises:
            BudgetZeroError: the budget allows no generation
        """
        cfg = self.cfg
        cfg.budget.require_nonzero()
        logger.info(
            f"GP search: rows={self.data.n_rows}, population={cfg.population_size}, "
            f"budget={cfg.budget}, alpha={cfg.fitness_cfg.alpha}, seed={cfg.seed}"
        )
        start = time.perf_counter()
        scored = self._score(self.initial_population())
        self.history.append(max(c.fitness for c in scored))

        while True:
            if cfg.budget.steps is not None and self.generations >= cfg.budget.steps:
                break
            seconds = cfg.budget.seconds
            if seconds is not None and time.perf_counter() - start >= seconds:
                break
            rng = self._rng(_GENERATION_STREAM, self.generations)
            scored = self._score(self._next_generation(scored, rng))
            self.generations += 1
            self.history.append(max(c.fitness for c in scored))
            logger.debug(
                f"Generation {self.generations}: best={self.history[-1]:.6f}, "
                f"archive={len(self.archive)}, evaluated={self.evaluator.evaluations}"
            )

        logger.info(
            f"GP finished: generations={self.generations}, archive={len(self.archive)}, "
            f"evaluated={self.evaluator.evaluations}"
        )
        return self.archive.members


def gp_search(data: Dataset, cfg: GpConfig | None = None) -> list[Candidate]:
    """Run GP and return the final Pareto archive."""
    return GeneticProgramming(data, cfg).run()
