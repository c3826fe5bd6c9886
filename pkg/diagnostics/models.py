from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field


class EssReport(BaseModel):
    """Batch-means effective sample sizes of every coordinate of a chain."""

    samples: int
    batches: int
    per_coordinate: List[float]
    clamped: List[int] = Field(default_factory=list)
    wall_time: Optional[float] = None

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_coordinate))

    @property
    def median(self) -> float:
        return float(np.median(self.per_coordinate))

    @property
    def min(self) -> float:
        return float(np.min(self.per_coordinate))

    def per_second(self, value: float) -> Optional[float]:
        if not self.wall_time:
            return None
        return value / self.wall_time

    def summary(self) -> dict:
        return {
            "samples": self.samples,
            "batches": self.batches,
            "mean_ess": self.mean,
            "median_ess": self.median,
            "min_ess": self.min,
            "wall_time": self.wall_time,
            "median_ess_per_second": self.per_second(self.median),
            "min_ess_per_second": self.per_second(self.min),
            "clamped": self.clamped,
        }


class EulerOracleConfig(BaseModel):
    """Forward Euler-Maruyama rejection oracle for bridge marginals.

    Paths run in batches of `batch` from per-batch seed streams, so the
    accepted set does not depend on `workers`.
    """

    dt: float = Field(gt=0.0)
    epsilon: float = Field(gt=0.0)
    v: Optional[float] = None
    paths: int = Field(1000, ge=1)
    max_attempts: int = Field(1_000_000, ge=1)
    batch: int = Field(1000, ge=1)
    stride: int = Field(1, ge=1)
    workers: int = Field(1, ge=1)
    seed: Optional[int] = None


@dataclass
class EulerOracleResult:
    times: np.ndarray
    paths: np.ndarray
    attempts: int
    accepted: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempts if self.attempts else 0.0

    def marginal(self, t: float) -> np.ndarray:
        """Accepted path values at the stored time closest to t."""

        return self.paths[:, int(np.argmin(np.abs(self.times - t)))]


@dataclass
class QQResult:
    theoretical: np.ndarray
    empirical: np.ndarray
    correlation: float


@dataclass
class MalaResult:
    chain: np.ndarray
    acceptance_rate: float
    step: float
    warmup: int
    wall_time: float = 0.0
    warnings: List[str] = field(default_factory=list)
