"""
State schema for the approximation pipeline.

Defines the run configuration, the report records emitted by every command,
and the dataclass that flows through the LangGraph pipeline.
"""

import os
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, field_validator, model_validator

from algebra import format_cx, format_rat, parse_rat

load_dotenv()

DEFAULT_PRECISION = int(os.getenv("KNOTVASS_PRECISION", "256"))
DEFAULT_CAP = int(os.getenv("KNOTVASS_CAP", "16"))
DEFAULT_NMAX_SUM = int(os.getenv("KNOTVASS_NMAX_SUM", "200"))
LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING")

RatField = Annotated[Fraction, PlainSerializer(format_rat, return_type=str)]


class RunConfig(BaseModel):
    """Everything one CLI command needs; CLI flags override environment defaults."""
    command: Literal["poly", "approx", "verify", "lambda"] = "approx"
    pd_path: Optional[str] = None
    braid: Optional[str] = None
    table_path: Optional[str] = None
    which: Optional[Literal["homflypt", "dubrovnik_delta", "dubrovnik", "kauffman"]] = None
    q_max: int = 4
    n_max: int = 6
    N_max: int = DEFAULT_NMAX_SUM
    precision_bits: int = DEFAULT_PRECISION
    crossing_cap: int = DEFAULT_CAP
    output_format: Literal["json", "tsv", "text"] = "text"
    seed: int = 0
    only: Optional[str] = None
    mutate: int = 0

    @field_validator("n_max", "N_max")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("bounds must be positive")
        return value

    @field_validator("precision_bits")
    @classmethod
    def _precision(cls, value: int) -> int:
        if value < 64:
            raise ValueError("precision_bits must be at least 64")
        return value

    @field_validator("crossing_cap")
    @classmethod
    def _cap(cls, value: int) -> int:
        if value < 1:
            raise ValueError("crossing_cap must be at least 1")
        return value

    @field_validator("mutate")
    @classmethod
    def _mutate(cls, value: int) -> int:
        if value < 0:
            raise ValueError("mutate counts injected faults and cannot be negative")
        return value

    @model_validator(mode="after")
    def _one_input(self) -> "RunConfig":
        given = [p for p in (self.pd_path, self.braid, self.table_path) if p]
        if len(given) > 1:
            raise ValueError("give at most one of --pd, --braid, --table")
        return self

    @property
    def which_or_default(self) -> str:
        return self.which or "homflypt"


class Monomial(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    k: int
    j: int
    coefficient: RatField


class PolyReport(BaseModel):
    """Polynomials of one link, each as a sorted monomial list."""
    name: str
    mu: int
    crossings: int
    writhe: int
    polynomials: Dict[str, List[Monomial]] = Field(default_factory=dict)
    rendered: Dict[str, str] = Field(default_factory=dict)


class CoeffTableFile(BaseModel):
    """On-disk coefficient table: {"mu": m, "d": d, "entries": [[k, j, "num/den"], ...]}."""
    mu: int
    d: int
    entries: List[Tuple[int, int, str]] = Field(default_factory=list)

    @field_validator("mu")
    @classmethod
    def _mu(cls, value: int) -> int:
        if value < 1:
            raise ValueError("mu must be at least 1")
        return value

    @field_validator("d")
    @classmethod
    def _d(cls, value: int) -> int:
        if value < 0:
            raise ValueError("d must be non-negative")
        return value

    def rational_entries(self) -> Dict[Tuple[int, int], Fraction]:
        out: Dict[Tuple[int, int], Fraction] = {}
        for k, j, text in self.entries:
            out[(k, j)] = out.get((k, j), Fraction(0)) + parse_rat(text)
        return out


class ApproxReport(BaseModel):
    """Partial sums v^N_{kj} of the lambda series against the exact coefficient a_{kj}."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    target: Tuple[int, int]
    exact_value: RatField
    sequence: List[Tuple[int, Any]] = Field(default_factory=list)
    stabilized_at: Optional[int] = None
    max_abs_error_tail: float = 0.0
    final_error: float = 0.0
    tail_non_increasing: bool = True
    terms_needed: Optional[int] = None
    N_max: int = 0
    precision_bits: int = DEFAULT_PRECISION

    def rendered_sequence(self) -> List[Tuple[int, str]]:
        return [(m, format_cx(value, self.precision_bits)) for m, value in self.sequence]


class CoefficientRow(BaseModel):
    """One output row of `approx`."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    k: int
    j: int
    exact: RatField
    stationary_at: Optional[int] = None
    N_max: int
    final_error: float
    tail_non_increasing: bool
    terms_needed: Optional[int] = None


class ApproxSummary(BaseModel):
    name: str
    which: str
    mu: int
    d: int
    b_round_trip: bool
    rows: List[CoefficientRow] = Field(default_factory=list)
    sequences: Dict[str, List[Tuple[int, str]]] = Field(default_factory=dict)


class SingularSampleResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    diagram_id: str
    singular_count: int
    value: Optional[RatField] = None
    error: Optional[str] = None


class OrderCheckReport(BaseModel):
    invariant_name: str
    claimed_order: int
    singular_samples: List[SingularSampleResult] = Field(default_factory=list)
    all_zero_at_q_plus_1: bool = False


class CheckOutcome(BaseModel):
    passed: bool
    reason: str


class VerifyReport(BaseModel):
    all_passed: bool
    score: float
    checks: Dict[str, CheckOutcome] = Field(default_factory=dict)


class LambdaRow(BaseModel):
    m: int
    n: int
    recurrence: str
    closed_form: Optional[str] = None
    quadrature: str
    dev_closed_form: Optional[float] = None
    dev_quadrature: float
    flagged: bool = False


class StepRecord(BaseModel):
    """Log of one pipeline step."""
    step: str
    params: dict
    output: Any
    timestamp: datetime = Field(default_factory=datetime.now)


@dataclass
class ApproxState:
    """
    State carried through the approximation graph.

    Each node reads what earlier nodes produced and returns a dict of updates.
    """
    run_config: RunConfig = field(default_factory=RunConfig)

    # Input
    name: str = ""
    diagram: Optional[Any] = None
    polynomial: Optional[Any] = None
    mu: int = 0
    table: Optional[Any] = None

    # Intermediate quantities
    w_values: Dict[int, List[Fraction]] = field(default_factory=dict)  # {q: [w_{N,q} for N=1..q+mu]}
    b_round_trip: Dict[int, bool] = field(default_factory=dict)  # {q: recovered == direct}
    stationarity: Dict[int, Optional[int]] = field(default_factory=dict)  # {j: first stationary n}

    # Results
    approx_reports: List[ApproxReport] = field(default_factory=list)
    rows: List[CoefficientRow] = field(default_factory=list)
    certified: bool = False

    # Step tracking
    steps: List[StepRecord] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    created_at: datetime = field(default_factory=datetime.now)

    def log_step(self, step: str, params: dict, output: Any) -> None:
        if self.steps is None:
            self.steps = []
        self.steps.append(StepRecord(step=step, params=params, output=output))

    def summary(self) -> ApproxSummary:
        return ApproxSummary(
            name=self.name,
            which=self.run_config.which_or_default,
            mu=self.mu,
            d=self.table.degree_d if self.table is not None else 0,
            b_round_trip=all(self.b_round_trip.values()),
            rows=list(self.rows),
            sequences={
                f"{r.target[0]},{r.target[1]}": r.rendered_sequence() for r in self.approx_reports
            },
        )
