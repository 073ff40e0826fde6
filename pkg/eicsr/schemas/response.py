"""
Output schemas.
Every machine-readable artifact eicsr writes (JSON, JSONL, CSV rows) is one
of these models.
"""
from typing import Any, List

from pydantic import BaseModel, Field


class NodeEic(BaseModel):
    """
    EIC of a single operator node.
    """

    path: str = Field(..., description="Child-index path from the root, 'root' for the root")
    formula: str = Field(..., description="Printed subformula rooted at this node")
    eic: float = Field(..., description="Node EIC clamped to [-eic_cap, eic_cap]")
    delta_r2: float | None = Field(
        default=None,
        description="Observed relative-noise variance; None when no finite estimate exists",
    )
    valid_samples: int = Field(..., ge=0)
    invalid_samples: int = Field(..., ge=0)
    capped: bool = Field(
        default=False,
        description="Too few valid samples, or the raw value exceeded the cap",
    )


class EicReport(BaseModel):
    """
    Result of calculate_eic.

    `overall` is the max over all node EICs and 0, clamped to [0, eic_cap].
    """

    formula: str = Field(..., description="Printed formula")
    overall: float = Field(..., ge=0)
    per_node: dict[str, NodeEic] = Field(default_factory=dict)
    delta_r2_root: float | None = Field(
        default=0.0,
        description="Relative-noise variance at the formula output (0 for a leaf)",
    )
    invalid_samples: int = Field(default=0, ge=0, description="Excluded samples summed over nodes")
    clipped: bool = Field(default=False, description="True if the cap was applied")
    sigma_r: float = Field(..., gt=0)
    repeats: int = Field(default=1, ge=1)

    class Config:
        json_schema_extra = {
            "example": {
                "formula": "(x1 + 1e100) - 1e100",
                "overall": 16.0,
                "per_node": {},
                "delta_r2_root": None,
                "invalid_samples": 256,
                "clipped": True,
                "sigma_r": 1e-6,
                "repeats": 1,
            }
        }


class CandidateRecord(BaseModel):
    """
    One archive member as written by `eicsr search`.
    """

    formula: str
    r2: float
    nmse: float = Field(..., ge=0)
    complexity: int = Field(..., ge=1)
    eic: float = Field(..., ge=0)
    fitness: float


class SearchResponse(BaseModel):
    method: str
    seed: int
    alpha: float
    eta: float
    budget: str
    steps: int = Field(..., ge=0, description="Generations or iterations completed")
    evaluations: int = Field(..., ge=0, description="Distinct candidates scored")
    best: CandidateRecord | None = None
    archive: List[CandidateRecord] = Field(default_factory=list)


class CorpusRecord(BaseModel):
    """One generated formula, one line of a JSONL corpus."""

    formula: str
    eic: float = Field(..., ge=0)
    attempts: int = Field(..., ge=1)
    complexity: int = Field(..., ge=1)


class DivergenceRow(BaseModel):
    corpus: str
    feature: str
    js: float = Field(..., ge=0)
    kl: float = Field(..., ge=0)
    js_reduction: float | None = Field(
        default=None,
        description="Relative JS reduction against the first corpus on the same feature",
    )


class BenchRow(BaseModel):
    """
    One problem x trial outcome.
    """

    problem: str
    category: str
    trial: int = Field(..., ge=0)
    method: str
    alpha: float
    noise_eta: float
    formula: str | None = None
    r2: float | None = Field(default=None, description="Clean test R2; None when non-finite")
    nmse: float | None = Field(default=None, description="Training NMSE of the best candidate")
    complexity: int | None = None
    eic: float | None = None
    archive_size: int = 0
    archive_mean_eic: float | None = None
    truth_eic: float | None = None
    runtime_s: float = 0.0
    error: str | None = None


class ProblemSummary(BaseModel):
    problem: str
    category: str
    truth_eic: float | None = None
    mean_r2: float | None = None
    mean_complexity: float | None = None
    mean_eic: float | None = None
    mean_runtime_s: float = 0.0
    trials: int = 0
    retained: int = Field(default=0, description="Trials whose test R2 exceeds the threshold")
    nonfinite: int = Field(default=0, description="Trials with non-finite test predictions")
    failed: int = 0


class BenchReport(BaseModel):
    method: str
    alpha: float
    noise_eta: float
    trials: int
    seed: int
    r2_threshold: float
    rows: List[BenchRow] = Field(default_factory=list)
    problems: List[ProblemSummary] = Field(default_factory=list)
    aggregate: ProblemSummary


class PairRecord(BaseModel):
    a: CandidateRecord
    b: CandidateRecord
    distance: float = Field(..., description="dC^2 + dR2^2 - dEIC^2")


class ErrorResponse(BaseModel):
    """
    Standard error payload written to stderr by the command surface.
    """

    error: str = Field(..., description="Error type or code")
    message: str = Field(..., description="Human-readable error message")
    details: dict[str, Any] | None = Field(default=None, description="Optional error details")

    class Config:
        json_schema_extra = {
            "example": {
                "error": "SyntaxError",
                "message": "unexpected end of input at offset 4",
                "details": {"offset": 4},
            }
        }
