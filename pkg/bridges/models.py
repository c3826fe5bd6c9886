from __future__ import annotations

import math
from enum import Enum
from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from schemas import DomainError


class DriftModel(BaseModel):
    """Unit-diffusivity SDE dX = b(X) dt + dW, described through its drift.

    The bridge energy over the coefficients is, up to an additive constant,
        psi(xi) = 1/2 int_0^T (b^2 + b')(X_s) ds + 1/2 |xi|^2
    so the partial derivatives need 2 b b' + b'' along the path.
    """

    model_config = ConfigDict(frozen=True)

    def drift(self, x):
        raise NotImplementedError

    def drift_prime(self, x):
        raise NotImplementedError

    def drift_second(self, x):
        raise NotImplementedError

    def girsanov_potential(self, x):
        """b^2 + b', the integrand of the energy."""

        return self.drift(x) ** 2 + self.drift_prime(x)

    def girsanov_integrand(self, x):
        """2 b b' + b'', the integrand of the partial derivatives."""

        return 2.0 * self.drift(x) * self.drift_prime(x) + self.drift_second(x)


class LinearModel(DriftModel):
    name: Literal["linear"] = "linear"
    alpha: float = 0.0
    beta: float = 0.0

    def drift(self, x):
        return self.alpha + self.beta * np.asarray(x, dtype=float)

    def drift_prime(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.beta)

    def drift_second(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


class SineModel(DriftModel):
    name: Literal["sine"] = "sine"
    alpha: float = Field(0.0, ge=0.0)

    def drift(self, x):
        return self.alpha * np.sin(x)

    def drift_prime(self, x):
        return self.alpha * np.cos(x)

    def drift_second(self, x):
        return -self.alpha * np.sin(x)

    def girsanov_integrand(self, x):
        return self.alpha**2 * np.sin(2.0 * np.asarray(x, dtype=float)) - self.alpha * np.sin(x)

    @property
    def integrand_bound(self) -> float:
        """sup |2 b b' + b''| = alpha^2 + alpha."""

        return self.alpha**2 + self.alpha


class LogisticModel(DriftModel):
    """Logistic growth dY = r Y (1 - Y/K) dt + beta Y dW after the Lamperti transform.

    With X = -log(Y) / beta the drift is b(x) = c1 + c2 exp(-beta x) and
    2 b b' + b'' = a1 exp(-beta x) - a2 exp(-2 beta x).
    """

    name: Literal["logistic"] = "logistic"
    r: float = Field(gt=0.0)
    K: float = Field(gt=0.0)
    beta: float = Field(gt=0.0)

    @property
    def c1(self) -> float:
        return self.beta / 2.0 - self.r / self.beta

    @property
    def c2(self) -> float:
        return self.r / (self.beta * self.K)

    @property
    def a1(self) -> float:
        return 2.0 * self.r**2 / (self.beta * self.K)

    @property
    def a2(self) -> float:
        return self.a1 / self.K

    def drift(self, x):
        return self.c1 + self.c2 * np.exp(-self.beta * np.asarray(x, dtype=float))

    def drift_prime(self, x):
        return -self.beta * self.c2 * np.exp(-self.beta * np.asarray(x, dtype=float))

    def drift_second(self, x):
        return self.beta**2 * self.c2 * np.exp(-self.beta * np.asarray(x, dtype=float))

    def girsanov_integrand(self, x):
        e = np.exp(-self.beta * np.asarray(x, dtype=float))
        return self.a1 * e - self.a2 * e * e

    def transform(self, y: float) -> float:
        if not math.isfinite(y) or y <= 0.0:
            raise DomainError(f"logistic state must be positive, got {y}")
        return -math.log(y) / self.beta

    def inverse(self, x):
        return np.exp(-self.beta * np.asarray(x, dtype=float))


BridgeModel = Union[LinearModel, SineModel, LogisticModel]


class EstimatorVariant(str, Enum):
    SINGLE = "single"
    V1 = "v1"
    V2 = "v2"


class EstimatorConfig(BaseModel):
    """How the path integral in a partial derivative is estimated.

    single: one uniform point in S_k.
    v1:     mean over R independent uniform points.
    v2:     S_k cut into R equal strata with one uniform point in each.
    R = ceil(scale |S_k| / (T 2^{-(N+1)})), at least 1 and at most `cap`.
    """

    model_config = ConfigDict(frozen=True)

    variant: EstimatorVariant = EstimatorVariant.SINGLE
    scale: float = Field(1.0, gt=0.0)
    cap: int = Field(32, ge=1)

    def replication(self, support_length: float, grid_step: float) -> int:
        if self.variant is EstimatorVariant.SINGLE:
            return 1
        count = math.ceil(self.scale * support_length / grid_step - 1e-9)
        return int(min(self.cap, max(1, count)))
