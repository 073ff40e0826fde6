"""
Candidate Evaluation Service - fitting, EIC and fitness for searched formulas.

Caches scored candidates by expression structure for the lifetime of a search.
"""
from eicsr.core.dataset import Dataset
from eicsr.core.exceptions import DegenerateFitError, InsufficientDataError
from eicsr.core.expression import Expression, complexity
from eicsr.schemas.config import EicConfig, FitnessConfig
from eicsr.schemas.state import Candidate
from eicsr.services.eic import calculate_eic
from eicsr.services.fitting import NMSE_SENTINEL, fit_linear, fitness_alpha, fitted_expression
from eicsr.services.logger import get_logger

logger = get_logger(__name__)


class CandidateEvaluator:
    """
    Scores expressions on one training dataset.

    Structurally equal expressions share one cached Candidate, so recurring
    formulas are fitted and EIC-scored once.
    """

    def __init__(
        self,
        data: Dataset,
        fitness_cfg: FitnessConfig | None = None,
        eic_cfg: EicConfig | None = None,
    ) -> None:
        self.data = data
        self.fitness_cfg = fitness_cfg or FitnessConfig()
        self.eic_cfg = eic_cfg or EicConfig()
        self._candidates: dict[Expression, Candidate] = {}
        self._eic: dict[Expression, float] = {}
        self.hits = 0

    @property
    def evaluations(self) -> int:
        """Distinct expressions scored so far."""
        return len(self._candidates)

    def eic(self, e: Expression) -> float:
        cached = self._eic.get(e)
        if cached is not None:
            return cached
        try:
            value = calculate_eic(e, self.data, self.eic_cfg).overall
        except InsufficientDataError:
            value = self.eic_cfg.eic_cap
        self._eic[e] = value
        return value

    def evaluate(self, expr: Expression) -> Candidate:
        """
        Fit, score and cache one expression.

        A degenerate fit yields the NMSE sentinel (fitness 0) instead of an error.
        """
        cached = self._candidates.get(expr)
        if cached is not None:
            self.hits += 1
            return cached

        try:
            model = fit_linear(expr, self.data, self.fitness_cfg)
            fitted = fitted_expression(model, self.fitness_cfg)
            nmse = model.nmse
        except DegenerateFitError as e:
            logger.debug(f"Degenerate fit: {e.message}")
            model, fitted, nmse = None, expr, NMSE_SENTINEL

        eic = self.eic(fitted)
        size = complexity(fitted)
        candidate = Candidate(
            expr=expr,
            fitted=fitted,
            model=model,
            eic=eic,
            fitness=fitness_alpha(size, nmse, eic, self.fitness_cfg),
            complexity=size,
        )
        self._candidates[expr] = candidate
        return candidate
