from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np

from poisson import AffineRate, RateSpec
from schemas import DomainError


class RateProvider(ABC):
    """Target-side capability consumed by the Zig-Zag samplers.

    Coordinates are addressed by 0-based position k. Neighbourhoods are
    integer arrays; the default is the fully connected graph.
    """

    name: str = "custom"

    def __init__(self, dim: int) -> None:
        if dim < 1:
            raise DomainError(f"dimension must be >= 1, got {dim}")
        self.dim = dim
        self._all = np.arange(dim, dtype=np.int64)
        self._extended: Dict[int, np.ndarray] = {}

    def describe(self) -> Dict[str, Any]:
        return {}

    def neighbors(self, k: int) -> np.ndarray:
        """N_k: coordinates the rate (or bound) of k depends on, k included."""

        return self._all

    def extended_neighbors(self, k: int) -> np.ndarray:
        """Union of N_j over j in N_k."""

        cached = self._extended.get(k)
        if cached is None:
            cached = np.unique(np.concatenate([self.neighbors(int(j)) for j in self.neighbors(k)]))
            self._extended[k] = cached
        return cached


class ExactRateProvider(RateProvider):
    """Targets whose rates (theta_k d_k psi(xi + s theta))^+ are exactly samplable."""

    @abstractmethod
    def rate(self, k: int, xi: np.ndarray, theta: np.ndarray) -> RateSpec:
        """Rate of coordinate k as a function of elapsed clock from (xi, theta)."""


class SubsampledRateProvider(RateProvider):
    """Targets sampled by thinning a bound against an unbiased gradient estimate.

    Contract: for every reachable state, the estimator rate at the advanced
    state never exceeds the bound evaluated at the elapsed clock.
    """

    @abstractmethod
    def bound(self, k: int, xi: np.ndarray, theta: np.ndarray) -> RateSpec:
        """Dominating rate of coordinate k as a function of elapsed clock."""

    @abstractmethod
    def draw_subsample(self, k: int, rng: np.random.Generator) -> Any:
        """Random input U_k of the gradient estimator."""

    @abstractmethod
    def estimate(self, k: int, xi: np.ndarray, theta: np.ndarray, U: Any) -> float:
        """Unbiased estimate of d_k psi(xi) given U_k."""

    def estimator_rate(self, k: int, xi: np.ndarray, theta: np.ndarray, U: Any) -> float:
        return max(0.0, float(theta[k]) * self.estimate(k, xi, theta, U))

    def bound_neighbors(self, k: int) -> np.ndarray:
        """N-bar_k: coordinates the bound of k depends on."""

        return self.neighbors(k)

    def estimator_neighbors(self, k: int, U: Any) -> np.ndarray:
        """N-tilde_k(U): coordinates the estimate of k reads for this U."""

        return self.neighbors(k)

    def extended_bound_neighbors(self, k: int) -> np.ndarray:
        key = -1 - k
        cached = self._extended.get(key)
        if cached is None:
            cached = np.unique(
                np.concatenate([self.bound_neighbors(int(j)) for j in self.bound_neighbors(k)])
            )
            self._extended[key] = cached
        return cached


class GaussianTarget(ExactRateProvider, SubsampledRateProvider):
    """Gaussian N(mean, precision^{-1}) with both provider capabilities.

    The subsampled view uses the exact gradient as its "estimate" and the
    exact rate shifted up by `slack` as its bound, so slack > 0 exercises
    the thinning step with known rejections.
    """

    name = "gaussian"

    def __init__(self, mean: np.ndarray, precision: np.ndarray, slack: float = 0.0) -> None:
        mean = np.asarray(mean, dtype=float)
        precision = np.atleast_2d(np.asarray(precision, dtype=float))
        if precision.shape != (mean.size, mean.size):
            raise DomainError(f"precision shape {precision.shape} does not match mean of size {mean.size}")
        if not np.allclose(precision, precision.T):
            raise DomainError("precision matrix must be symmetric")
        if slack < 0.0:
            raise DomainError(f"slack must be >= 0, got {slack}")
        super().__init__(mean.size)
        self.mean = mean
        self.precision = precision
        self.slack = float(slack)
        self._rows = [np.flatnonzero(precision[k]) for k in range(mean.size)]
        for k, row in enumerate(self._rows):
            if k not in row:
                self._rows[k] = np.union1d(row, [k])

    def describe(self) -> Dict[str, Any]:
        return {"mean": self.mean.tolist(), "precision": self.precision.tolist(), "slack": self.slack}

    def neighbors(self, k: int) -> np.ndarray:
        return self._rows[k]

    def energy(self, xi: np.ndarray) -> float:
        r = np.asarray(xi, dtype=float) - self.mean
        return 0.5 * float(r @ self.precision @ r)

    def gradient(self, xi: np.ndarray, k: Optional[int] = None) -> Any:
        if k is None:
            return self.precision @ (np.asarray(xi, dtype=float) - self.mean)
        row = self._rows[k]
        return float(self.precision[k, row] @ (xi[row] - self.mean[row]))

    def rate_values(self, xi: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """(theta_k [P (xi - mean)]_k)^+ for every k."""

        return np.maximum(0.0, np.asarray(theta, dtype=float) * self.gradient(xi))

    def rate(self, k: int, xi: np.ndarray, theta: np.ndarray) -> AffineRate:
        row = self._rows[k]
        slope = float(self.precision[k, row] @ theta[row])
        return AffineRate(theta[k] * self.gradient(xi, k), theta[k] * slope)

    def bound(self, k: int, xi: np.ndarray, theta: np.ndarray) -> AffineRate:
        exact = self.rate(k, xi, theta)
        return AffineRate(exact.a + self.slack, exact.b)

    def draw_subsample(self, k: int, rng: np.random.Generator) -> None:
        return None

    def estimate(self, k: int, xi: np.ndarray, theta: np.ndarray, U: Any) -> float:
        return self.gradient(xi, k)
