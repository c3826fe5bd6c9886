# Diffusion-bridge targets: drift models, estimators, rates and bounds
from .models import (
    BridgeModel,
    DriftModel,
    EstimatorConfig,
    EstimatorVariant,
    LinearModel,
    LogisticModel,
    SineModel,
)
from .targets import BridgeTarget, LinearBridge, LogisticBridge, SineBridge, make_target
from .utils import (
    gradient_estimate,
    grid_energy,
    grid_gradient,
    lamperti,
    linear_bound,
    linear_rate,
    logistic_bound,
    partial_energy,
    sine_bound,
    sine_bound_constant,
    velocities,
)

__all__ = [
    "BridgeModel",
    "BridgeTarget",
    "DriftModel",
    "EstimatorConfig",
    "EstimatorVariant",
    "LinearBridge",
    "LinearModel",
    "LogisticBridge",
    "LogisticModel",
    "SineBridge",
    "SineModel",
    "gradient_estimate",
    "grid_energy",
    "grid_gradient",
    "lamperti",
    "linear_bound",
    "linear_rate",
    "logistic_bound",
    "make_target",
    "partial_energy",
    "sine_bound",
    "sine_bound_constant",
    "velocities",
]
