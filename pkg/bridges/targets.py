from __future__ import annotations

import logging
from typing import Any, Dict, Optional

import numpy as np

from basis import BasisContext
from poisson import AffineRate, RateSpec
from samplers.providers import ExactRateProvider, SubsampledRateProvider

from .models import BridgeModel, EstimatorConfig, LinearModel, LogisticModel, SineModel
from .utils import (
    draw_points,
    estimate_at,
    estimator_chain,
    grid_energy,
    grid_gradient,
    linear_bound_at,
    linear_rate_at,
    logistic_bound_at,
    sine_bound_at,
)


logger = logging.getLogger(__name__)


class BridgeTarget(SubsampledRateProvider):
    """Bridge law over the Faber-Schauder coefficients of a drift model.

    Coordinates are array positions p = n - 1 of the basis context. The
    estimator of coordinate k reads the chains through its evaluation points,
    a subset of N_k.
    """

    def __init__(
        self,
        ctx: BasisContext,
        model: BridgeModel,
        estimator: Optional[EstimatorConfig] = None,
    ) -> None:
        super().__init__(ctx.M)
        self.ctx = ctx
        self.model = model
        self.estimator = estimator or EstimatorConfig()
        self.name = model.name

    def describe(self) -> Dict[str, Any]:
        return self.model.model_dump()

    def neighbors(self, k: int) -> np.ndarray:
        return self.ctx.neighbors[k]

    def extended_neighbors(self, k: int) -> np.ndarray:
        return self.ctx.extended_neighbors(k)

    def draw_subsample(self, k: int, rng: np.random.Generator) -> np.ndarray:
        return draw_points(self.ctx, k, self.estimator, rng)

    def estimate(self, k: int, xi: np.ndarray, theta: np.ndarray, U: np.ndarray) -> float:
        return estimate_at(self.ctx, self.model, k, xi, U)

    def estimator_neighbors(self, k: int, U: np.ndarray) -> np.ndarray:
        return estimator_chain(self.ctx, k, U)

    def energy(self, xi: np.ndarray) -> np.ndarray:
        return grid_energy(self.ctx, self.model, xi)

    def gradient(self, xi: np.ndarray) -> np.ndarray:
        return grid_gradient(self.ctx, self.model, xi)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.model!r}, {self.ctx!r}, {self.estimator.variant.value})"


class LinearBridge(BridgeTarget, ExactRateProvider):
    """Linear drift: exact affine rates, plus an affine bound for subsampling."""

    model: LinearModel

    def rate(self, k: int, xi: np.ndarray, theta: np.ndarray) -> AffineRate:
        return linear_rate_at(self.ctx, self.model, k, xi, theta)

    def bound(self, k: int, xi: np.ndarray, theta: np.ndarray) -> RateSpec:
        return linear_bound_at(self.ctx, self.model, k, xi, theta)


class SineBridge(BridgeTarget):
    model: SineModel

    def bound(self, k: int, xi: np.ndarray, theta: np.ndarray) -> RateSpec:
        return sine_bound_at(self.ctx, self.model, k, xi, theta)

    def bound_neighbors(self, k: int) -> np.ndarray:
        return np.array([k], dtype=np.int64)


class LogisticBridge(BridgeTarget):
    model: LogisticModel

    def bound(self, k: int, xi: np.ndarray, theta: np.ndarray) -> RateSpec:
        return logistic_bound_at(self.ctx, self.model, k, xi, theta)


_TARGETS = {"linear": LinearBridge, "sine": SineBridge, "logistic": LogisticBridge}


def make_target(
    ctx: BasisContext, model: BridgeModel, estimator: Optional[EstimatorConfig] = None
) -> BridgeTarget:
    target = _TARGETS[model.name](ctx, model, estimator)
    logger.debug("built %r", target)
    return target
