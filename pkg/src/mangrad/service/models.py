"""Request and response schemas for the experiment service.

Every request model doubles as the schema of the corresponding CLI config
file. Unknown keys are rejected so a typo cannot silently change an
experiment.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class QuadraticSaddleSpec(StrictModel):
    type: Literal["quadratic_saddle"]
    a: list[float]
    b: list[float] = Field(default_factory=list)
    ambient: Optional[int] = None


class GroundStateSpec(StrictModel):
    type: Literal["ground_state"]
    n_qubits: int
    a_eigs: list[float]
    rho_eigs: list[float]
    rho_rotation_seed: Optional[int] = None


CostSpec = Union[QuadraticSaddleSpec, GroundStateSpec]


class LawSpec(StrictModel):
    """Direction-law selection.

    ``haar`` needs nothing else; ``design_conjugates`` takes a built-in set
    name or a set file plus an optional traceless Hermitian seed matrix
    (entries as [re, im] pairs); ``coordinate_axes`` is the discrete law of
    coordinate directions on Euclidean costs, with optional weights.
    """

    type: Literal["haar", "design_conjugates", "coordinate_axes"] = "haar"
    set_name: Optional[str] = None
    set_file: Optional[str] = None
    seed_h: Optional[list[list[list[float]]]] = None
    weights: Optional[list[float]] = None

    @model_validator(mode="after")
    def _consistent(self):
        if self.type == "design_conjugates":
            if (self.set_name is None) == (self.set_file is None):
                raise ValueError("design_conjugates needs exactly one of set_name or set_file")
        else:
            if self.set_name or self.set_file or self.seed_h:
                raise ValueError("set_name/set_file/seed_h only apply to design_conjugates")
        if self.type != "coordinate_axes" and self.weights is not None:
            raise ValueError("weights only apply to coordinate_axes")
        return self


class EtaSpec(StrictModel):
    policy: Literal["from_smoothness", "explicit"] = "from_smoothness"
    value: Optional[float] = None


class RgdChecks(StrictModel):
    """Pass criteria evaluated after an rgd run (gated by the CLI --check flag)."""

    min_success_rate: Optional[float] = None
    max_saddle_endpoints: Optional[int] = None
    max_commutator_rel: Optional[float] = None
    max_distance_to_critical_value: Optional[float] = None


class RgdRunRequest(StrictModel):
    seed: int = 0
    output_dir: Optional[str] = None
    threads: Union[int, Literal["auto"]] = 1
    cost: CostSpec = Field(discriminator="type")
    law: LawSpec = Field(default_factory=LawSpec)
    eta: EtaSpec = Field(default_factory=EtaSpec)
    max_iter: int = 100_000
    grad_tol: float = 1e-8
    f_tol: float = 1e-12
    window: int = 100
    n_realizations: int = 1
    x0_policy: Literal["haar_random", "identity"] = "haar_random"
    x0_point: Optional[list[float]] = None
    store_trajectories: bool = True
    checks: RgdChecks = Field(default_factory=RgdChecks)

    @model_validator(mode="after")
    def _consistent(self):
        if self.cost.type == "quadratic_saddle" and self.x0_point is None:
            raise ValueError("quadratic_saddle runs need an explicit x0_point")
        if self.cost.type == "ground_state" and self.x0_point is not None:
            raise ValueError("ground_state runs take x0_policy, not x0_point")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be positive")
        return self


class SaddleHittingRequest(StrictModel):
    seed: int = 0
    output_dir: Optional[str] = None
    threads: Union[int, Literal["auto"]] = 1
    a: float = 1.0
    b: float = 1.0
    eta: float = 0.01
    phi0: float = 0.0
    t_max: float = 10.0
    dt: float = 1e-3
    n_realizations: int = 500
    analytic_c: float = 0.05
    variance_matched: bool = False
    grid_step: float = 0.05
    ks_tol: float = 0.15


class OuHittingRequest(StrictModel):
    seed: int = 0
    output_dir: Optional[str] = None
    threads: Union[int, Literal["auto"]] = 1
    kappa: float = 2.0
    sigma: float = 3.0
    c: float = 10.0
    dt: float = 1e-3
    t_max: float = 10.0
    n_realizations: int = 10_000
    grid_start: float = 0.5
    grid_stop: float = 5.0
    grid_step: float = 0.5


class DesignVerifyRequest(StrictModel):
    seed: int = 0
    output_dir: Optional[str] = None
    threads: Union[int, Literal["auto"]] = 1
    set_name: Optional[str] = None
    set_file: Optional[str] = None
    t: int = 2
    seed_h: Optional[list[list[list[float]]]] = None

    @model_validator(mode="after")
    def _consistent(self):
        if self.set_name is not None and self.set_file is not None:
            raise ValueError("set_name and set_file are mutually exclusive")
        if self.set_name is None and self.set_file is None:
            self.set_name = "clifford_1q"
        return self


class TailCheckSpec(StrictModel):
    n: int
    k: float


class StatsCheckRequest(StrictModel):
    seed: int = 0
    output_dir: Optional[str] = None
    threads: Union[int, Literal["auto"]] = 1
    samples: int = 100_000
    moment_dims: list[int] = Field(default_factory=lambda: [2, 3, 5, 10, 50])
    ks_dims: list[int] = Field(default_factory=lambda: [10])
    tail: list[TailCheckSpec] = Field(default_factory=lambda: [TailCheckSpec(n=10, k=1.0), TailCheckSpec(n=5, k=2.0)])


class CheckItem(StrictModel):
    name: str
    passed: bool
    detail: str = ""


class RunResponse(StrictModel):
    command: str
    files: dict[str, str]
    checks: list[CheckItem]
    summary: dict
