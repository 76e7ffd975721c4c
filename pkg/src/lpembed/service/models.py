"""Request and response schemas of the service.

A problem configuration is one JSON document: the operator pair data, the
two domains, the exponent, quadrature settings, a seed, and optionally the
witness parameters for certification.  Reports are fully serializable and
reproducible from the recorded seed.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .. import __version__
from ..domains import AffineImage, Ball, Box, DomainSpec
from ..errors import ConfigError

Matrix = list[list[float]]
Vector = list[float]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


class DomainModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    shape: Literal["box", "ball", "affine_image"]
    lo: Optional[Vector] = None
    hi: Optional[Vector] = None
    center: Optional[Vector] = None
    radius: Optional[float] = None
    base: Optional["DomainModel"] = None
    matrix: Optional[Matrix] = None
    shift: Optional[Vector] = None
    margin: float = 0.0

    @model_validator(mode="after")
    def _check_fields(self):
        if self.shape == "box":
            _require(self.lo is not None and self.hi is not None, "box needs lo and hi")
        elif self.shape == "ball":
            _require(
                self.center is not None and self.radius is not None,
                "ball needs center and radius",
            )
        else:
            _require(
                self.base is not None and self.matrix is not None,
                "affine_image needs base and matrix",
            )
        _require(self.margin >= 0.0, "margin must be nonnegative")
        return self

    def to_domain(self) -> DomainSpec:
        try:
            if self.shape == "box":
                return Box.make(self.lo, self.hi, margin=self.margin)
            if self.shape == "ball":
                return Ball.make(self.center, self.radius, margin=self.margin)
            shift = self.shift if self.shift is not None else [0.0] * len(self.matrix)
            return AffineImage.make(
                self.base.to_domain(), self.matrix, shift, margin=self.margin
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


class QuadratureModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: Literal["mc", "gauss"] = "mc"
    points: int = Field(default=100_000, ge=16)
    order: int = Field(default=32, ge=2)
    seed: Optional[int] = None


class WitnessModel(BaseModel):
    """Parameters pinning one concrete witness inside the verdict's family."""

    model_config = ConfigDict(extra="forbid")

    family: Literal["similarity", "similarity-plus-inversion", "two-d-family"]
    sign: Literal[1, -1] = 1
    t: float = 1.0
    q: Optional[Matrix] = None
    shift: Optional[Vector] = None
    inversion_center: Optional[Vector] = None
    variant: Literal["a", "b"] = "a"
    gamma: float = 0.0
    delta: float = 0.0
    k: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0


class CertificationModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    solutions: int = Field(default=8, ge=1)
    points: int = Field(default=200, ge=10)
    pde_tol: float = 1e-7
    weight_tol: float = 1e-6
    coincidence_samples: int = Field(default=10_000, ge=100)
    isometry: bool = True


def _all_finite(values) -> bool:
    arr = np.asarray(values, dtype=float)
    return bool(np.all(np.isfinite(arr)))


class ProblemConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    n: int = Field(ge=2)
    matrix_a: Matrix = Field(alias="A")
    drift_a: Vector = Field(alias="a")
    matrix_b: Matrix = Field(alias="B")
    drift_b: Vector = Field(alias="b")
    p: float
    domain1: DomainModel = Field(alias="E1")
    domain2: DomainModel = Field(alias="E2")
    quadrature: QuadratureModel = QuadratureModel()
    seed: int = 0
    witness: Optional[WitnessModel] = None
    certification: CertificationModel = CertificationModel()

    @model_validator(mode="after")
    def _check_shapes(self):
        n = self.n
        for name, m in (("A", self.matrix_a), ("B", self.matrix_b)):
            _require(len(m) == n and all(len(r) == n for r in m), f"{name} must be {n}x{n}")
            _require(_all_finite(m), f"{name} must be finite")
        for name, v in (("a", self.drift_a), ("b", self.drift_b)):
            _require(len(v) == n, f"{name} must have length {n}")
            _require(_all_finite(v), f"{name} must be finite")
        _require(math.isfinite(self.p), "p must be finite")
        return self

    def quad_seed(self) -> int:
        return self.seed if self.quadrature.seed is None else self.quadrature.seed

    def config_hash(self) -> str:
        payload = json.dumps(self.model_dump(by_alias=True), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


class GridModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lo: Vector
    hi: Vector
    counts: list[int]

    @model_validator(mode="after")
    def _check(self):
        _require(len(self.lo) == 2 and len(self.hi) == 2 and len(self.counts) == 2,
                 "family grids are two-dimensional")
        _require(all(c >= 2 for c in self.counts), "grid counts must be at least 2")
        return self


class FamilyEvalConfig(BaseModel):
    """Evaluate one planar family mapping on a grid and dump the points."""

    model_config = ConfigDict(extra="forbid")

    case: Literal["F1", "F2", "F3", "F4"]
    variant: Literal["a", "b"] = "a"
    branch: Literal[1, -1] = 1
    p: float
    c: float = 0.0
    d: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    k: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    grid: GridModel
    seed: int = 0

    def config_hash(self) -> str:
        payload = json.dumps(self.model_dump(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


class ProvenanceModel(BaseModel):
    seed: int
    tool_version: str = __version__
    config_hash: str


class DiagonalizationModel(BaseModel):
    matrix: Matrix
    ell: int
    signature: int
    residual: float


class VerdictModel(BaseModel):
    kind: Literal["non-isometric", "embeddable"]
    reason: Optional[str] = None
    family: Optional[str] = None
    case: Optional[str] = None
    branch: Optional[int] = None
    vector_condition: bool = False
    detail: str = ""


class ClassifyReport(BaseModel):
    verdict: VerdictModel
    diag_a: DiagonalizationModel
    diag_b: DiagonalizationModel
    reduced_drift_a: Vector
    reduced_drift_b: Vector
    p: float
    special_exponent: Optional[float] = None
    provenance: ProvenanceModel


class DiagonalizeReport(BaseModel):
    diagonalization: DiagonalizationModel
    provenance: ProvenanceModel


class CoincidenceModel(BaseModel):
    forward_fraction: float
    coverage_fraction: float
    samples: int
    min_fraction: float
    passed: bool


class PdeFragmentModel(BaseModel):
    max_scaled_residual: float
    tol: float
    points: int
    passed: bool
    per_solution: Vector


class WeightFragmentModel(BaseModel):
    max_rel_error: float
    tol: float
    points: int
    passed: bool


class ConformalityFragmentModel(BaseModel):
    max_residual: float
    tol: float
    points: int
    passed: bool


class NormPairModel(BaseModel):
    kind: str
    norm_source: float
    norm_target: float
    err_source: float
    err_target: float
    passed: bool


class IsometryFragmentModel(BaseModel):
    pairs: list[NormPairModel]
    mode: str
    samples: int
    seed: int
    passed: bool


class CertifyReport(BaseModel):
    classify: ClassifyReport
    coincidence: CoincidenceModel
    pde_mapping: PdeFragmentModel
    weight_consistency: WeightFragmentModel
    conformality: ConformalityFragmentModel
    isometry: Optional[IsometryFragmentModel] = None
    passed: bool
    provenance: ProvenanceModel


class FamilyEvalReport(BaseModel):
    case: str
    variant: str
    branch: int
    columns: list[str]
    points: list[Vector]
    skipped_singular: int
    provenance: ProvenanceModel


class HealthModel(BaseModel):
    status: str = "ok"
    version: str = __version__


class ErrorModel(BaseModel):
    kind: str
    message: str


class ErrorEnvelope(BaseModel):
    error: ErrorModel
