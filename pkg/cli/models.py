from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from basis import BasisContext
from bridges import (
    BridgeModel,
    BridgeTarget,
    EstimatorConfig,
    EstimatorVariant,
    LinearModel,
    LogisticModel,
    SineModel,
    make_target,
    velocities,
)
from samplers import Algorithm

from .config import MAX_EVENTS, OUTPUT_DIR


# Algorithms that draw event times from the exact rates.
EXACT_ALGORITHMS = (Algorithm.STANDARD, Algorithm.LOCAL)


class RunConfig(BaseModel):
    """One sampler run: drift model, basis, algorithm and clocks.

    For the logistic model `u` and `v` are population sizes (Y-space) and
    are moved to the Lamperti scale on use, unless `transformed` is set.
    """

    model: Literal["linear", "sine", "logistic"]
    alpha: float = 0.0
    beta: Optional[float] = None
    r: Optional[float] = None
    K: Optional[float] = None
    transformed: bool = False

    levels: int = Field(6, ge=0, le=20)
    T: float = Field(1.0, gt=0.0)
    u: float = 0.0
    v: float = 0.0

    algorithm: Algorithm = Algorithm.FULLY_LOCAL
    estimator: EstimatorVariant = EstimatorVariant.SINGLE
    clock: float = Field(1000.0, gt=0.0)
    burnin: float = Field(0.0, ge=0.0)
    dtau: float = Field(1.0, gt=0.0)
    velocity_decay: float = Field(1.0, gt=0.0)
    seed: Optional[int] = None
    output: Optional[str] = None
    max_events: int = Field(default_factory=lambda: MAX_EVENTS, ge=1)

    @model_validator(mode="after")
    def _check_run(self) -> "RunConfig":
        if self.burnin >= self.clock:
            raise ValueError(f"burn-in {self.burnin} must be smaller than the clock {self.clock}")
        if self.burnin + self.dtau > self.clock:
            raise ValueError("burn-in plus one sampling step exceeds the clock")
        if self.model == "logistic" and None in (self.r, self.K, self.beta):
            raise ValueError("the logistic model needs r, K and beta")
        if self.algorithm in EXACT_ALGORITHMS and self.model != "linear":
            raise ValueError(
                f"algorithm {self.algorithm.value} needs exactly samplable rates (linear model only)"
            )
        try:
            self.endpoints()
        except ValidationError as exc:
            raise ValueError(f"invalid {self.model} parameters: {exc}") from exc
        return self

    @classmethod
    def from_sources(cls, path: Optional[str] = None, **overrides: Any) -> "RunConfig":
        """JSON config file values, overridden by any flag that was given."""

        data: Dict[str, Any] = {}
        if path:
            data.update(json.loads(Path(path).read_text()))
        data.update({key: value for key, value in overrides.items() if value is not None})
        return cls.model_validate(data)

    def drift_model(self) -> BridgeModel:
        if self.model == "linear":
            return LinearModel(alpha=self.alpha, beta=self.beta or 0.0)
        if self.model == "sine":
            return SineModel(alpha=self.alpha)
        return LogisticModel(r=self.r, K=self.K, beta=self.beta)

    def endpoints(self) -> Tuple[float, float]:
        model = self.drift_model()
        if isinstance(model, LogisticModel) and not self.transformed:
            return model.transform(self.u), model.transform(self.v)
        return self.u, self.v

    def context(self) -> BasisContext:
        u, v = self.endpoints()
        return BasisContext(self.levels, self.T, u, v)

    def estimator_config(self) -> EstimatorConfig:
        return EstimatorConfig(variant=self.estimator)

    def target(self, ctx: Optional[BasisContext] = None) -> BridgeTarget:
        return make_target(ctx or self.context(), self.drift_model(), self.estimator_config())

    def theta(self, ctx: BasisContext) -> np.ndarray:
        return velocities(ctx, self.velocity_decay)

    def output_path(self, default: str = "skeleton.csv") -> Path:
        path = Path(self.output or default)
        return path if path.is_absolute() else Path(OUTPUT_DIR) / path


class ComparisonRow(BaseModel):
    """One method at one drift strength in the comparison table."""

    alpha: float
    method: str
    status: Literal["ok", "failed"] = "ok"
    samples: int = 0
    wall_time: Optional[float] = None
    ess_first: Optional[float] = None
    ess_median: Optional[float] = None
    ess_min: Optional[float] = None
    ess_first_per_second: Optional[float] = None
    ess_median_per_second: Optional[float] = None
    ess_min_per_second: Optional[float] = None
    midpoint_ks: Optional[float] = None
    error: Optional[str] = None


class CompareConfig(BaseModel):
    """Grid of the comparison harness: sine bridges from u to v over several alphas."""

    alphas: List[float] = Field(default_factory=list)
    levels: int = Field(6, ge=0, le=20)
    T: float = Field(50.0, gt=0.0)
    u: float = 0.0
    v: float = 0.0
    clock: float = Field(2500.0, gt=0.0)
    burnin: float = Field(0.0, ge=0.0)
    dtau: float = Field(1.0, gt=0.0)
    mala_iterations: int = Field(25_000, ge=10)
    seed: int = 0
    workers: int = Field(1, ge=1)
    max_events: int = Field(default_factory=lambda: MAX_EVENTS, ge=1)

    @model_validator(mode="after")
    def _check_clocks(self) -> "CompareConfig":
        if self.burnin + self.dtau > self.clock:
            raise ValueError("burn-in plus one sampling step exceeds the clock")
        if any(alpha < 0.0 for alpha in self.alphas):
            raise ValueError("sine drift strengths must be non-negative")
        return self
