from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from schemas import DomainError


class Algorithm(str, Enum):
    STANDARD = "standard"
    SUBSAMPLED = "subsampled"
    LOCAL = "local"
    FULLY_LOCAL = "fully-local"


class SkeletonMode(str, Enum):
    FULL_STATE = "full-state"
    REFLECTIONS = "reflection-tuples"


class SkeletonMeta(BaseModel):
    """Run metadata written next to a skeleton file.

    Holds everything needed to rerun the sampler bit-identically: seed,
    algorithm, model parameters, initial state and clocks.
    """

    algorithm: Algorithm
    mode: SkeletonMode
    seed: Optional[int] = None
    model: str = "custom"
    model_params: Dict[str, Any] = Field(default_factory=dict)
    estimator: Optional[str] = None
    levels: Optional[int] = None
    T: Optional[float] = None
    u: Optional[float] = None
    v: Optional[float] = None
    tau_final: float = Field(gt=0.0)
    tau_burnin: Optional[float] = None
    dtau: Optional[float] = None
    xi0: List[float]
    theta0: List[float]
    events: int = 0

    @property
    def dim(self) -> int:
        return len(self.xi0)


@dataclass(frozen=True)
class Skeleton:
    """Ordered event record of one run.

    Full-state mode: `times[l]`, `states[l]` are the clock and the whole
    coefficient vector at row l; the first row is (0, xi0), the last row is
    (tau_final, xi(tau_final)) and `flips[l]` is the coordinate flipped at the
    row (-1 on those two anchor rows).

    Reflection mode: one tuple per accepted flip, `indices[l]` (0-based
    coordinate), `times[l]` and `values[l]` (that coordinate's position).
    """

    mode: SkeletonMode
    meta: SkeletonMeta
    times: np.ndarray
    states: Optional[np.ndarray] = None
    flips: Optional[np.ndarray] = None
    indices: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.meta.dim

    @property
    def tau_final(self) -> float:
        return self.meta.tau_final

    @property
    def xi0(self) -> np.ndarray:
        return np.asarray(self.meta.xi0, dtype=float)

    @property
    def theta0(self) -> np.ndarray:
        return np.asarray(self.meta.theta0, dtype=float)

    @property
    def event_count(self) -> int:
        if self.mode is SkeletonMode.FULL_STATE:
            return int(np.sum(self.flips >= 0))
        return len(self.times)

    def is_empty(self) -> bool:
        if self.mode is SkeletonMode.FULL_STATE:
            return self.states is None or len(self.times) == 0
        return len(self.times) == 0

    @classmethod
    def full_state(
        cls, meta: SkeletonMeta, times: List[float], states: List[np.ndarray], flips: List[int]
    ) -> "Skeleton":
        return cls(
            mode=SkeletonMode.FULL_STATE,
            meta=meta,
            times=np.asarray(times, dtype=float),
            states=np.asarray(states, dtype=float).reshape(len(times), meta.dim),
            flips=np.asarray(flips, dtype=np.int64),
        )

    @classmethod
    def reflections(
        cls, meta: SkeletonMeta, indices: List[int], times: List[float], values: List[float]
    ) -> "Skeleton":
        if not (len(indices) == len(times) == len(values)):
            raise DomainError("reflection tuples need equal-length index, time and value lists")
        return cls(
            mode=SkeletonMode.REFLECTIONS,
            meta=meta,
            times=np.asarray(times, dtype=float),
            indices=np.asarray(indices, dtype=np.int64),
            values=np.asarray(values, dtype=float),
        )


@dataclass
class SamplerResult:
    """Skeleton plus the counters of the run that produced it."""

    skeleton: Optional[Skeleton] = None
    events: int = 0
    proposals: int = 0
    rejections: int = 0
    max_ratio: float = 0.0
    wall_time: float = 0.0
    final_state: Optional[np.ndarray] = None
    dense: Optional[Skeleton] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def acceptance_rate(self) -> float:
        return self.events / self.proposals if self.proposals else 1.0
