"""Pydantic models for reports, records and JSON documents."""
from datetime import datetime
from fractions import Fraction
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_serializer

SCHEMA_VERSION = 1


class AuditResult(BaseModel):
    """Outcome of one inequality audit."""
    check: str
    lhs: float
    rhs: float
    holds: bool
    details: Dict[str, Any] = Field(default_factory=dict)


class RationalAudit(BaseModel):
    """Exact equality audit over the rationals."""
    check: str
    lhs: Fraction
    rhs: Fraction
    holds: bool

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @field_serializer("lhs", "rhs")
    def _rational(self, value: Fraction) -> str:
        return str(value)


class GoldenRational(BaseModel):
    """Rational stored as numerator/denominator strings."""
    numerator: str
    denominator: str

    @classmethod
    def from_fraction(cls, value: Fraction) -> "GoldenRational":
        return cls(numerator=str(value.numerator), denominator=str(value.denominator))

    def to_fraction(self) -> Fraction:
        return Fraction(int(self.numerator), int(self.denominator))


class MomentCounterexample(BaseModel):
    """First index tuple on which the two mixtures disagree."""
    sx: List[List[int]]
    sy: List[List[int]]
    size: int
    plus_value: str
    minus_value: str


class MomentReport(BaseModel):
    """Result of comparing all moments up to a total size."""
    n: int
    m: int
    k: int
    max_size: int
    agree: bool
    checked: int
    counterexample: Optional[MomentCounterexample] = None


class MatchProbabilityResult(BaseModel):
    """Exact matching probability with its sampled and enumerated counterparts."""
    n: int
    m: int
    block_sizes: List[int]
    exact: Fraction
    enumerated: Optional[Fraction] = None
    estimate: float
    standard_error: float
    samples: int

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @field_serializer("exact", "enumerated")
    def _rational(self, value: Optional[Fraction]) -> Optional[str]:
        return None if value is None else str(value)


class OracleResult(BaseModel):
    """Optimal one-way classical advantage from exhaustive search."""
    n: int
    m: int
    c: int
    advantage: GoldenRational
    best_partition: List[int]
    partitions_searched: int


class DecompositionReport(BaseModel):
    """Validation report for a state decomposition."""
    d: int
    components: int
    reconstruction_residual: float
    max_abs_coefficient: float
    coefficient_bound: float
    max_witness_residual: float
    witness_residuals: List[float]
    complex_path: bool
    valid: bool


class EncodedMatrix(BaseModel):
    """Complex matrix as base64 of little-endian row-major complex128 bytes."""
    shape: List[int]
    data: str


class EncodedFamily(BaseModel):
    outcomes: List[int]
    operators: List[EncodedMatrix]


class TwoWayProtocolDocument(BaseModel):
    """Serialized two-way entangled protocol."""
    schema_version: int = SCHEMA_VERSION
    kind: str = "two-way"
    n: int
    d: int
    m: int
    c: int
    shared: EncodedMatrix
    alice: Dict[str, EncodedFamily]
    bob: Dict[str, EncodedFamily]
    accept: List[int]


class SmpProtocolDocument(BaseModel):
    """Serialized SMP protocol with every input tabulated."""
    schema_version: int = SCHEMA_VERSION
    kind: str = "smp"
    n: int
    c: int
    alice: List[EncodedMatrix]
    bob: List[EncodedMatrix]
    referee_effect: EncodedMatrix


class DecompositionDocument(BaseModel):
    """Serialized decomposition with its report."""
    schema_version: int = SCHEMA_VERSION
    d: int
    coefficients: List[float]
    kinds: List[str]
    source_pairs: List[List[int]]
    phases: List[bool]
    witness_a: List[EncodedMatrix]
    witness_b: List[EncodedMatrix]
    report: DecompositionReport


class ForrInstanceDocument(BaseModel):
    """Forrelation instance with ±1 vectors stored as 0/1 bitstrings."""
    schema_version: int = SCHEMA_VERSION
    n: int
    epsilon: float
    x: str
    y: str
    label: str
    seed: Optional[int] = None


class BhmInstanceDocument(BaseModel):
    """Boolean Hidden Matching instance."""
    schema_version: int = SCHEMA_VERSION
    n: int
    x: str
    edges: List[List[int]]
    y: str
    label: str


class HardDistributionDocument(BaseModel):
    schema_version: int = SCHEMA_VERSION
    kind: str
    n: int
    m: int
    k: int


class RunRecord(BaseModel):
    """One line of the run log."""
    schema_version: int = SCHEMA_VERSION
    timestamp: datetime = Field(default_factory=datetime.now)
    subcommand: str
    config: Dict[str, Any]
    seed: int
    jobs: int = 1
    metrics: Dict[str, Any] = Field(default_factory=dict)
    checks: Dict[str, bool] = Field(default_factory=dict)
    passed: bool = True
    error: Optional[str] = None
