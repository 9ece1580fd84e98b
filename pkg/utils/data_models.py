# data_models.py
from datetime import datetime, timezone
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from stokes.stokes_system import BoundaryConditionSpec, Condition

"""Data models for run configuration documents, reports and endpoint payloads."""


class SolverConfig(BaseModel):
    """Solver overrides; unset fields keep the case defaults."""
    model_config = ConfigDict(extra="forbid")

    polynomial_degree: Optional[int] = Field(None, ge=0, json_schema_extra={"example": 100})
    laurent_degree: Optional[int] = Field(None, ge=1, json_schema_extra={"example": 50})
    lightning_poles: Optional[int] = Field(None, ge=0, json_schema_extra={"example": 24})
    sigma: Optional[float] = Field(None, gt=0, json_schema_extra={"example": 4.0})
    use_aaa: Optional[bool] = None
    aaa_tol: Optional[float] = Field(None, gt=0, json_schema_extra={"example": 1e-8})
    aaa_max_degree: Optional[int] = Field(None, ge=0, json_schema_extra={"example": 100})
    weighting: Optional[Literal["uniform", "spacing"]] = None

    def overrides(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True)


class EdgeCondition(BaseModel):
    """Boundary condition on one polygon edge with constant targets."""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["no_slip", "velocity", "outflow", "parallel", "pair"] = Field(
        "no_slip", json_schema_extra={"example": "velocity"})
    u: float = 0.0
    v: float = 0.0
    pressure: float = 0.0
    functionals: Optional[Tuple[str, str]] = Field(None, json_schema_extra={"example": ["psi", "un"]})
    values: Tuple[float, float] = (0.0, 0.0)

    @model_validator(mode="after")
    def check_pair(self) -> "EdgeCondition":
        if self.kind == "pair" and self.functionals is None:
            raise ValueError("A 'pair' condition needs two functionals")
        return self

    def to_spec(self) -> BoundaryConditionSpec:
        if self.kind == "no_slip":
            return BoundaryConditionSpec.no_slip()
        if self.kind == "velocity":
            return BoundaryConditionSpec.velocity(self.u, self.v)
        if self.kind == "outflow":
            return BoundaryConditionSpec.outflow(self.pressure)
        if self.kind == "parallel":
            return BoundaryConditionSpec.parallel(self.pressure)
        first, second = self.functionals
        return BoundaryConditionSpec(Condition(first, self.values[0]), Condition(second, self.values[1]))


class CircleHoleSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    center: Tuple[float, float] = Field(..., json_schema_extra={"example": [0.5, 0.5]})
    radius: float = Field(..., gt=0, json_schema_extra={"example": 0.2})
    laurent_degree: int = Field(30, ge=1)
    u: float = 0.0
    v: float = 0.0
    omega: float = 0.0
    samples: int = Field(200, ge=2)


class PolygonDomainSpec(BaseModel):
    """Explicit polygon (counterclockwise vertices); edge k joins vertex k and k+1."""
    model_config = ConfigDict(extra="forbid")

    vertices: List[Tuple[float, float]] = Field(..., min_length=3,
                                                json_schema_extra={"example": [[0, 0], [1, 0], [1, 1], [0, 1]]})
    edges: List[EdgeCondition]
    samples_per_edge: int = Field(100, ge=2)
    lightning_poles: int = Field(24, ge=0)
    sigma: Optional[float] = Field(None, gt=0, description="Defaults to the STOKES_SIGMA setting")
    polynomial_degree: int = Field(30, ge=0)
    holes: List[CircleHoleSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_edges(self) -> "PolygonDomainSpec":
        if len(self.edges) != len(self.vertices):
            raise ValueError(f"{len(self.edges)} edge conditions for {len(self.vertices)} vertices")
        return self


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid: Tuple[int, int] = Field((200, 200), json_schema_extra={"example": [200, 100]})
    bbox: Optional[Tuple[float, float, float, float]] = Field(None, json_schema_extra={"example": [-2, 2, 0, 1]})
    levels: Optional[List[float]] = None
    accuracy_target: Optional[float] = Field(None, ge=0, json_schema_extra={"example": 6})
    write_grid: bool = True
    field_csv: str = "field.csv"
    poles_csv: str = "poles.csv"
    report_json: str = "report.json"
    contour_svg: str = "psi.svg"

    @model_validator(mode="after")
    def check_grid(self) -> "OutputConfig":
        if min(self.grid) < 2:
            raise ValueError(f"Grid resolution must be at least 2x2, got {self.grid}")
        if self.bbox is not None and (self.bbox[0] >= self.bbox[1] or self.bbox[2] >= self.bbox[3]):
            raise ValueError(f"Bounding box must be (xmin, xmax, ymin, ymax), got {self.bbox}")
        return self


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    parameter: str = Field("lam", json_schema_extra={"example": "lam"})
    values: List[float] = Field(..., min_length=1, json_schema_extra={"example": [0.2, 0.4, 0.6]})
    table_csv: str = "sweep.csv"


class RunConfig(BaseModel):
    """Configuration document: a built-in case or an explicit polygon, plus solver and output settings."""
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = 1
    case: Optional[str] = Field(None, json_schema_extra={"example": "two-cylinder"})
    parameters: Dict[str, Any] = Field(default_factory=dict, json_schema_extra={"example": {"case": "d"}})
    domain: Optional[PolygonDomainSpec] = None
    solver: SolverConfig = Field(default_factory=SolverConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    sweep: Optional[SweepConfig] = None

    @model_validator(mode="after")
    def check_source(self) -> "RunConfig":
        if (self.case is None) == (self.domain is None):
            raise ValueError("Exactly one of 'case' and 'domain' must be given")
        return self


class SegmentResidual(BaseModel):
    name: str = Field(..., json_schema_extra={"example": "inner cylinder"})
    max_error: float = Field(..., json_schema_extra={"example": 3.1e-13})
    rms_error: float = Field(..., json_schema_extra={"example": 8.4e-14})


class BranchJump(BaseModel):
    hole: int = Field(..., json_schema_extra={"example": 0})
    velocity_jump: float = Field(..., json_schema_extra={"example": 0.0})
    velocity_scale: float = Field(..., json_schema_extra={"example": 2.3})
    psi_jump: Optional[float] = Field(None, json_schema_extra={"example": -0.41})
    psi_jump_spread: float = Field(..., json_schema_extra={"example": 1e-15})
    points: int = Field(..., json_schema_extra={"example": 64})


class EddyReport(BaseModel):
    """Signed extremum of psi - psi_c; the first entry is the through-flow at the mouth."""
    x: float = Field(..., json_schema_extra={"example": -0.58})
    y: float = Field(..., json_schema_extra={"example": 0.05})
    psi: float = Field(..., json_schema_extra={"example": -2.1e-4})


class RunReport(BaseModel):
    case: str = Field(..., json_schema_extra={"example": "two-cylinder"})
    accuracy_digits: float = Field(..., json_schema_extra={"example": 12.4})
    max_residual: float = Field(..., json_schema_extra={"example": 4e-13})
    segments: List[SegmentResidual]
    n_unknowns: int = Field(..., json_schema_extra={"example": 288})
    n_samples: int = Field(..., json_schema_extra={"example": 600})
    rank: int = Field(..., json_schema_extra={"example": 286})
    pole_counts: Dict[str, int] = Field(..., json_schema_extra={"example": {"lightning": 0, "aaa": 0}})
    branch_jumps: List[BranchJump] = Field(default_factory=list)
    pressure_drop: Optional[float] = Field(None, json_schema_extra={"example": 24.0})
    eddies: List[EddyReport] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
    accuracy_target: Optional[float] = None
    target_met: bool = True
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))


class CaseInfo(BaseModel):
    name: str = Field(..., json_schema_extra={"example": "constricted-channel"})
    description: str = Field(..., json_schema_extra={"example": "Poiseuille inflow through a smoothly constricted channel"})
    parameters: Dict[str, Any] = Field(default_factory=dict, json_schema_extra={"example": {"lam": 0.4}})


class EltResponse(BaseModel):
    lam: float = Field(..., json_schema_extra={"example": 0.5})
    delta: float = Field(..., json_schema_extra={"example": 1.0})
    order: int = Field(..., json_schema_extra={"example": 4})
    pressure_drop: float = Field(..., json_schema_extra={"example": 101.2})
    terms: Tuple[float, float, float] = Field(..., json_schema_extra={"example": [80.61, 22.61, -2.08]})


class HealthStatus(BaseModel):
    application_status: str = Field(..., json_schema_extra={"example": "healthy"})
    solver_status: str = Field(..., json_schema_extra={"example": "healthy"})
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))


class ValidationCheck(BaseModel):
    name: str = Field(..., json_schema_extra={"example": "couette velocity"})
    value: float = Field(..., json_schema_extra={"example": 3.2e-14})
    threshold: float = Field(..., json_schema_extra={"example": 1e-8})
    passed: bool = Field(..., json_schema_extra={"example": True})


class ValidationSummary(BaseModel):
    checks: List[ValidationCheck]
    passed: bool = Field(..., json_schema_extra={"example": True})
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
