"""
Monte Carlo tree search over formulas.

Each tree node holds a scored candidate. An iteration descends from the root
by UCB until it reaches a node with room for another child, expands that node
with one mutation of its formula, scores the new candidate and
backpropagates its fitness_alpha as the reward. There are no rollouts.
"""
import time

import numpy as np

from eicsr.core.dataset import Dataset
from eicsr.schemas.config import MctsConfig
from eicsr.schemas.state import Candidate, MctsNode
from eicsr.search.variation import Mutator, PrimitiveSet
from eicsr.services.evaluation import CandidateEvaluator
from eicsr.services.logger import get_logger
from eicsr.services.ranking import ParetoArchive

logger = get_logger(__name__)

_ROOT_STREAM = 0
_ITERATION_STREAM = 1


def select_child(node: MctsNode, ucb_c: float) -> MctsNode:
    """Child with the highest UCB score; unvisited children score +inf, ties go to the oldest."""
    best = node.children[0]
    best_score = best.ucb(ucb_c)
    for child in node.children[1:]:
        score = child.ucb(ucb_c)
        if score > best_score:
            best, best_score = child, score
    return best


def backpropagate(node: MctsNode, reward: float) -> None:
    """Add one visit and `reward` to node and every ancestor."""
    current: MctsNode | None = node
    while current is not None:
        current.visits += 1
        current.total_reward += reward
        current = current.parent


class MonteCarloTreeSearch:
    """
    One MCTS run on a training dataset.

    Attributes:
        root: search-tree root, a seeded random formula of depth root_depth
        archive: non-dominated set of all evaluated candidates
        iterations: expansions performed
    """

    def __init__(self, data: Dataset, cfg: MctsConfig | None = None) -> None:
        self.data = data
        self.cfg = cfg or MctsConfig()
        self.primitives = PrimitiveSet(data.arity, self.cfg.primitives)
        self.mutator = Mutator(self.primitives, self.cfg.max_nodes)
        self.evaluator = CandidateEvaluator(data, self.cfg.fitness_cfg, self.cfg.eic_cfg)
        self.archive = ParetoArchive(
            alpha=self.cfg.fitness_cfg.alpha, max_complexity=self.cfg.max_nodes
        )
        self.iterations = 0

        rng = self._rng(_ROOT_STREAM)
        root_expr = self.primitives.random_tree(rng, self.cfg.root_depth, "full")
        root_candidate = self.evaluator.evaluate(root_expr)
        self.archive.offer(root_candidate)
        self.root = MctsNode(candidate=root_candidate)

    def _rng(self, *key: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.cfg.seed, spawn_key=key))

    def select(self) -> MctsNode:
        node = self.root
        while len(node.children) >= self.cfg.max_children:
            node = select_child(node, self.cfg.ucb_c)
        return node

    def step(self) -> Candidate:
        """One select / expand / score / backpropagate iteration."""
        rng = self._rng(_ITERATION_STREAM, self.iterations)
        parent = self.select()
        expr = self.mutator.mutate(parent.candidate.expr, rng)
        candidate = self.evaluator.evaluate(expr)
        child = MctsNode(candidate=candidate, parent=parent)
        parent.children.append(child)
        backpropagate(child, candidate.fitness)
        self.archive.offer(candidate)
        self.iterations += 1
        return candidate

    def run(self) -> list[Candidate]:
        """
        Iterate until the budget is spent and return the archive.

        Raises:
            BudgetZeroError: the budget allows no iteration
        """
        cfg = self.cfg
        cfg.budget.require_nonzero()
        logger.info(
            f"MCTS search: rows={self.data.n_rows}, budget={cfg.budget}, "
            f"ucb_c={cfg.ucb_c:.4f}, alpha={cfg.fitness_cfg.alpha}, seed={cfg.seed}"
        )
        start = time.perf_counter()
        while True:
            if cfg.budget.steps is not None and self.iterations >= cfg.budget.steps:
                break
            seconds = cfg.budget.seconds
            if seconds is not None and time.perf_counter() - start >= seconds:
                break
            self.step()
            if self.iterations % 500 == 0:
                logger.debug(
                    f"Iteration {self.iterations}: root mean reward="
                    f"{self.root.mean_reward:.6f}, archive={len(self.archive)}"
                )

        logger.info(
            f"MCTS finished: iterations={self.iterations}, archive={len(self.archive)}, "
            f"evaluated={self.evaluator.evaluations}"
        )
        return self.archive.members


def mcts_search(data: Dataset, cfg: MctsConfig | None = None) -> list[Candidate]:
    """Run MCTS and return the final Pareto archive."""
    return MonteCarloTreeSearch(data, cfg).run()
