"""
API Models
Pydantic models for run configuration, sampling specs, reports and HTTP
request bodies. Every numeric parameter is validated here before dispatch.
"""
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SampleSpec(BaseModel):
    """How property checks draw their random samples."""
    sample_count: int = Field(10_000, ge=1, description="Samples per property")
    rng_seed: int = Field(7, ge=0, description="Seed of the per-property generators")
    tolerance: float = Field(1e-9, gt=0, description="Largest accepted violation")
    omega_max: float = Field(4.0, gt=0, description="Upper end of the log-uniform omega samples")


class PropertyReport(BaseModel):
    """Outcome of one numerical property check."""
    model_config = ConfigDict(populate_by_name=True)

    property_name: str = Field(..., alias="property", description="Property identifier")
    samples: int = Field(..., description="Number of asserted samples")
    max_violation: float = Field(..., description="Largest violation found, clipped at 0")
    worst_witness: Dict[str, float] = Field(default_factory=dict, alias="witness",
                                            description="Inputs attaining max_violation")
    tolerance: float = Field(..., description="Tolerance the violation is compared against")
    passed: bool = Field(..., description="max_violation <= tolerance")
    details: Dict[str, Any] = Field(default_factory=dict, description="Property-specific extras")


class GridSpec(BaseModel):
    """Discretization of (omega, A) used by value iteration."""
    omega_max: float = Field(..., gt=0, description="Largest omega on the grid")
    omega_points: List[float] = Field(..., description="Strictly increasing omega nodes in [0, omega_max]")
    a_points: List[float] = Field(..., description="Uniform A nodes on [0, 2], containing 1")
    depth: int = Field(..., ge=1, description="Number of value iterations")
    split_stride: int = Field(1, ge=1, description="Coarsening of the omega split enumeration")
    snap_points: List[float] = Field(default_factory=list,
                                     description="Grid values always kept as split candidates")


class CheckpointGap(BaseModel):
    omega: float
    A: float
    W: float = Field(..., description="Value iteration lower bound at the checkpoint")
    M: float = Field(..., description="Closed-form value at the checkpoint")
    gap: float = Field(..., description="M - W")
    passed: bool


class DPCompareReport(BaseModel):
    """Value iteration table compared against the closed form."""
    r: float
    depth: int
    grid_shape: List[int]
    monotone_in_k: bool = Field(..., description="W_{k+1} >= W_k at every cell")
    max_excess: float = Field(..., description="max(W_depth - M) over the grid")
    interp_tol: float
    gap_tol: float
    sound: bool = Field(..., description="max_excess <= interp_tol")
    checkpoints: List[CheckpointGap] = Field(default_factory=list)
    passed: bool


class ExtremizerReport(BaseModel):
    """Replay of an explicit (alpha, f) pair through the operators."""
    kind: Literal["vertex", "maximal"]
    r: Optional[float] = None
    n: Optional[int] = None
    depth: int
    mean: float
    target_mean: float
    root_mass: float
    is_two_carleson: bool
    fraction: float
    target_fraction: float
    weak_quotient: Optional[float] = None
    target_quotient: Optional[float] = None
    exact: bool = Field(..., description="Fraction equals its target bit for bit")
    sequence: Dict[str, Any]
    function: Dict[str, Any]


class EnumerationReport(BaseModel):
    r: float
    depth: int
    omega: float
    A: float
    lower_bound: float
    M: float
    gap: float
    sequences: int = Field(..., description="Admissible sequences evaluated")
    level: float = Field(..., description="Level the search counts a leaf at, 1 - LEVEL_SLACK")
    M_relaxed: float = Field(..., description="M at the mean rescaled to that level, omega level^(-1/r)")
    sound: bool = Field(..., description="lower_bound <= M_relaxed + tolerance")


class RunConfig(BaseModel):
    """
    Merged command-line configuration.

    Precedence: flag > config file > environment > the defaults below.
    """
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    r: float = Field(1.0, gt=0)
    p: Optional[float] = Field(None, ge=1)
    n: int = Field(0, ge=0)
    omega: Optional[float] = None
    A: Optional[float] = None
    x: Optional[float] = None
    lam: Optional[float] = Field(None, alias="lambda")
    omega_n: Optional[int] = Field(None, ge=0)
    depth: Optional[int] = Field(None, ge=1)
    samples: int = Field(10_000, ge=1)
    seed: int = Field(7, ge=0)
    tolerance: float = Field(1e-9, gt=0)
    threads: int = Field(0, ge=0)
    format: Literal["json", "csv"] = "json"
    output: Optional[str] = None
    candidate: str = "closed-form"
    what: Literal["M", "envelope", "limit0", "limitinf", "region", "B"] = "M"
    nx: int = Field(201, ge=2)
    ny: int = Field(101, ge=2)
    omega_max: float = Field(2.0, gt=0)
    lam_surface: float = Field(1.0, description="Level used by surface --what B")
    grid: Literal["reference", "small"] = "reference"
    stride: Optional[int] = Field(None, ge=1)
    gap_tol: float = Field(0.02, gt=0)
    interp_tol: float = Field(0.01, gt=0)
    restarts: int = Field(8, ge=0)
    iterations: int = Field(200, ge=1)
    maximal: bool = False
    sequence: Optional[str] = None
    function: Optional[str] = None


class EvalRequest(BaseModel):
    """Request body for POST /eval: (omega, A) or (x, A, lambda)."""
    r: float = Field(..., gt=0)
    A: float = Field(..., description="Carleson mass in [0, 2]")
    omega: Optional[float] = None
    x: Optional[float] = None
    lam: Optional[float] = Field(None, alias="lambda")

    @model_validator(mode="after")
    def _one_point(self):
        if self.omega is None and (self.x is None or self.lam is None):
            raise ValueError("give omega, or both x and lambda")
        return self

    model_config = ConfigDict(
        populate_by_name=True,
        json_schema_extra={"example": {"r": 1.0, "omega": 0.2, "A": 2.0}},
    )


class ExtremizerRequest(BaseModel):
    r: float = Field(..., gt=0)
    n: int = Field(..., ge=0, le=16)


class VerifyRequest(BaseModel):
    r: float = Field(1.0, gt=0)
    samples: int = Field(10_000, ge=1, le=100_000)
    seed: int = Field(7, ge=0)
    tolerance: float = Field(1e-9, gt=0)
    candidate: str = "closed-form"


class ErrorResponse(BaseModel):
    """Response model for errors."""
    status: str = Field("error", description="Operation status")
    error_code: str = Field(..., description="Error code")
    message: str = Field(..., description="Error message")

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "status": "error",
                "error_code": "DOMAIN_ERROR",
                "message": "A must lie in [0, 2]",
            }
        }
    )
