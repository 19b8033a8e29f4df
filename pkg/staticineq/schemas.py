"""Report and run-configuration records. These define the JSON output contract."""
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator


class MeshScale(BaseModel):
    """Convergence bookkeeping for one mesh"""
    h: float = Field(..., gt=0, description="Max (geodesic) edge length")
    n_vertices: int
    n_triangles: int
    n_tets: Optional[int] = None


# --- Inequality ---

class DeficitTerms(BaseModel):
    """The four boundary integrals of the inequality"""
    lap_term: float = Field(..., description="int V (Lap_S eta + c eta)^2 / H")
    ii_term: float = Field(..., description="int V II(grad eta, grad eta)")
    grad_term: float = Field(..., description="int dV/dnu |grad_S eta|^2")
    eta_sq_term: float = Field(..., description="int dV/dnu c eta^2 (subtracted on the right side)")


class DeficitReport(BaseModel):
    variant: Literal["static", "thm4"]
    k: float
    kappa: float
    h: float
    n_vertices: int
    lhs: float
    rhs: float
    deficit: float
    terms: DeficitTerms
    min_H: float
    field_id: str
    seed: Optional[int] = None
    kind: str = "euclidean"
    level: Optional[int] = None
    scale: float = Field(0.0, description="Sum of absolute term magnitudes")
    relative_deficit: float = 0.0
    normalization: str = ""
    tag: Optional[str] = None
    admissible: bool = True
    min_H_vertex: Optional[int] = None


class EnsembleSummary(BaseModel):
    """Nonnegativity sweep over seeded random polynomial fields"""
    count: int
    seed: int
    degree: int
    level: Optional[int] = None
    h: float
    tol_factor: float = Field(..., description="Field i is flagged when deficit_i < -tol_factor * h * scale_i")
    max_tol: float
    min_deficit: float
    median_deficit: float
    min_relative_deficit: float
    fraction_positive: float
    flagged: List[int] = Field(default_factory=list, description="Ensemble indices below -tol")
    passed: bool


class CrossCheckReport(BaseModel):
    kappa: float
    h: float
    n_vertices: int
    field_ids: List[str]
    discrepancies: List[float]
    max_discrepancy: float


# --- Volume ---

class ReillyTerms(BaseModel):
    """Integrals of the weighted Reilly identity; the four boundary terms split one bracket"""
    lhs_vol: float = Field(..., description="int V [(Lap f + K n f)^2 - |Hess f + K f g|^2]")
    hess_V_term: float = Field(..., description="int (Hess V - Lap V g - 2(n-1) K V g)(grad f, grad f)")
    ricci_term: float = Field(..., description="int V Ric(grad f, grad f)")
    f_sq_term: float = Field(..., description="(n-1) K int (Lap V + n K V) f^2")
    dVdnu_bdry: float = Field(..., description="int dV/dnu (|grad_S f|^2 - (n-1) K f^2)")
    mixed_bdry: float = Field(..., description="int V (2 f_nu Lap_S f + 2(n-1) K f_nu f)")
    H_bdry: float = Field(..., description="int V H f_nu^2")
    II_bdry: float = Field(..., description="int V II(grad_S f, grad_S f)")


class ReillyReport(BaseModel):
    K: float
    f_id: str
    V_id: str
    terms: ReillyTerms
    rhs: float
    residual: float
    relative_residual: float
    h: float
    level: Optional[int] = None
    mesh_id: str
    ricci_vanishes: bool = Field(True, description="Euclidean domain: Ric = 0 enters every term as zero")


class ExtensionReport(BaseModel):
    eta_id: str
    k: float
    level: int
    h: float
    n_dof: int
    iterations: int
    rms_error: Optional[float] = None
    max_error: Optional[float] = None
    max_principle_violation: float = 0.0
    warnings: List[str] = Field(default_factory=list)
    solution_file: Optional[str] = None


class ProofDecompositionReport(BaseModel):
    """Nonnegative terms discarded by the proof, against the boundary deficit"""
    eta_id: str
    k: float
    level: int
    h: float
    hessian_term: float = Field(..., description="int V |Hess u + k u g|^2 by gradient recovery")
    ricci_excess: float
    boundary_square: float = Field(..., description="int V [sqrt(H) u_nu + (Lap_S eta + (n-1) k eta)/sqrt(H)]^2")
    deficit: float
    discards: float
    closure: float = Field(..., description="deficit - discards, zero in the continuum")


# --- Convergence ---

class ConvergenceRow(BaseModel):
    level: int
    h: float
    value: float
    error: Optional[float] = None
    order: Optional[float] = Field(None, description="log2(err_l / err_{l+1}) against the previous level")


class ConvergenceTable(BaseModel):
    quantity: str
    target: Optional[float] = None
    rows: List[ConvergenceRow]

    @classmethod
    def from_series(cls, quantity: str, levels, hs, values, errors=None, target=None) -> "ConvergenceTable":
        if errors is None and target is not None:
            errors = [abs(v - target) for v in values]
        rows = []
        for i, (lvl, h, v) in enumerate(zip(levels, hs, values)):
            err = None if errors is None else float(errors[i])
            order = None
            if i > 0 and errors is not None and levels[i] == levels[i - 1] + 1:
                prev = float(errors[i - 1])
                if prev > 0 and err is not None and err > 0:
                    order = float(np.log2(prev / err))
            rows.append(ConvergenceRow(level=int(lvl), h=float(h), value=float(v), error=err, order=order))
        return cls(quantity=quantity, target=target, rows=rows)

    @property
    def orders(self) -> List[float]:
        return [r.order for r in self.rows if r.order is not None]


# --- Runs ---

class RunConfig(BaseModel):
    command: Literal["mesh", "ineq", "reilly", "pde", "converge"]
    kind: str = "euclidean"
    kappa: float = Field(1.0, gt=0)
    base: Optional[List[float]] = None
    profile: str = "sphere:1.0"
    levels: List[int] = Field(default_factory=lambda: [3])
    volume: bool = False
    radius: float = Field(1.0, gt=0)
    field: Optional[str] = None
    seed: Optional[int] = None
    count: Optional[int] = None
    variant: Literal["static", "thm4"] = "static"
    k: Optional[float] = None
    suite: Optional[Literal["equality"]] = None
    cross_check: bool = False
    allow_inadmissible: bool = False
    f: Optional[str] = None
    V: Optional[str] = None
    K: float = 0.0
    eta: Optional[str] = None
    decompose: bool = False
    quantity: Optional[str] = None
    mesh_in: Optional[str] = None
    mesh_out: Optional[str] = None
    output_dir: str = "reports"
    sweep_tol: float = Field(0.5, ge=0)
    target: Optional[float] = None

    @field_validator("levels")
    @classmethod
    def levels_increasing(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("levels must be nonempty")
        if any(l < 0 for l in v):
            raise ValueError("levels must be nonnegative")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("levels must be strictly increasing")
        return v

    @model_validator(mode="after")
    def seed_for_random_fields(self) -> "RunConfig":
        if self.field and self.field.startswith("poly:") and self.seed is None:
            raise ValueError("a seed is required for random polynomial fields")
        return self


class RunReport(BaseModel):
    command: str
    config: RunConfig
    status: Literal["ok", "failed"] = "ok"
    meshes: List[MeshScale] = Field(default_factory=list)
    deficits: List[DeficitReport] = Field(default_factory=list)
    ensembles: List[EnsembleSummary] = Field(default_factory=list)
    cross_checks: List[CrossCheckReport] = Field(default_factory=list)
    reilly: List[ReillyReport] = Field(default_factory=list)
    extensions: List[ExtensionReport] = Field(default_factory=list)
    decompositions: List[ProofDecompositionReport] = Field(default_factory=list)
    tables: List[ConvergenceTable] = Field(default_factory=list)
    messages: List[str] = Field(default_factory=list)
