from typing import Literal

from pydantic import BaseModel, Field, NonNegativeFloat, PositiveInt, computed_field

HEADER_PREFIX = "# config: "


class CheckClause(BaseModel):
    name: str
    passed: bool
    max_violation: NonNegativeFloat = 0.0
    witness: list[float] | None = None
    detail: str = ""

    model_config = {"frozen": True}


class CheckReport(BaseModel):
    name: str
    clauses: list[CheckClause]
    direction: Literal["increasing", "decreasing", "constant", "none"] | None = None
    skipped: list[float] = []

    model_config = {"frozen": True}

    @computed_field
    @property
    def passed(self) -> bool:
        return all(clause.passed for clause in self.clauses)

    def failed_clauses(self) -> list[CheckClause]:
        return [clause for clause in self.clauses if not clause.passed]


class RiskEstimate(BaseModel):
    mean: NonNegativeFloat
    std_error: NonNegativeFloat
    n: PositiveInt
    seed: int
    loss: str
    lam: NonNegativeFloat = Field(alias="lambda")

    model_config = {"frozen": True, "populate_by_name": True}


class RiskRow(BaseModel):
    lam: NonNegativeFloat = Field(alias="lambda")
    estimator: str
    loss: str
    risk: NonNegativeFloat
    std_error: NonNegativeFloat
    n: PositiveInt
    seed: int

    model_config = {"frozen": True, "populate_by_name": True}


class ExactRiskRow(BaseModel):
    lam: NonNegativeFloat = Field(alias="lambda")
    estimator: str
    loss: str
    risk: NonNegativeFloat
    # always empty: quadrature uses no random draws
    seed: int | None = None

    model_config = {"frozen": True, "populate_by_name": True}


class EstimateLine(BaseModel):
    estimator: str
    first: float
    second: float

    model_config = {"frozen": True}


class DatasetSummary(BaseModel):
    n: int
    mean1: float
    mean2: float
    var1: NonNegativeFloat
    var2: NonNegativeFloat
    pooled_variance: NonNegativeFloat
    correlation: float | None = Field(default=None, ge=-1.0, le=1.0)
    degenerate: bool = False

    model_config = {"frozen": True}


class RunConfig(BaseModel):
    """Fully resolved settings of one CLI run, written into every output header."""

    command: Literal["estimate", "simulate", "exact", "analyze", "verify"]
    sigma: float | None = Field(default=None, gt=0)
    rho: float | None = Field(default=None, gt=-1.0, lt=1.0)
    loss: str | None = None
    estimators: list[str] = []
    lambda_min: float | None = Field(default=None, ge=0)
    lambda_max: float | None = Field(default=None, ge=0)
    lambda_step: float | None = Field(default=None, gt=0)
    n: int | None = Field(default=None, ge=2)
    seed: int | None = Field(default=None, ge=0, lt=2**64)
    x1: float | None = None
    x2: float | None = None
    input: str | None = None
    output: str | None = None
    format: Literal["csv", "json"] = "csv"
    tol: float | None = Field(default=None, gt=0)
    quick: bool = False
    workers: PositiveInt = 1

    model_config = {"frozen": True, "allow_inf_nan": False}

    def header(self) -> str:
        return f"{HEADER_PREFIX}{self.model_dump_json()}\n"

    @classmethod
    def from_header(cls, text: str) -> "RunConfig":
        for line in text.splitlines():
            if line.startswith(HEADER_PREFIX):
                return cls.model_validate_json(line[len(HEADER_PREFIX) :])
        raise ValueError("no config header found")


class RiskTable(BaseModel):
    config: RunConfig
    rows: list[RiskRow] | list[ExactRiskRow]


class AnalysisReport(BaseModel):
    config: RunConfig
    summary: DatasetSummary
    estimates: list[EstimateLine]
    reference: dict[str, tuple[float, float]] | None = None


class EstimateReport(BaseModel):
    config: RunConfig
    estimates: list[EstimateLine]


class VerificationReport(BaseModel):
    config: RunConfig
    reports: list[CheckReport]

    @computed_field
    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports)
