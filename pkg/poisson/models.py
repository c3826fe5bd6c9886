from __future__ import annotations

import math
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np

from .utils import (
    EXP_CAP,
    affine_integral,
    exp_integral,
    first_event_superposition,
    invert_affine,
    invert_exp,
)


class AffineRate(NamedTuple):
    """lambda(s) = (a + b s)^+ in clock time s >= 0."""

    a: float
    b: float

    def rate(self, s: float) -> float:
        return max(0.0, self.a + self.b * s)

    def integrated(self, s: float) -> float:
        return affine_integral(self.a, self.b, s)

    def invert(self, E: float) -> float:
        return invert_affine(self.a, self.b, E)


class ExpRate(NamedTuple):
    """lambda(s) = max(0, c e^{gamma s})."""

    c: float
    gamma: float

    def rate(self, s: float) -> float:
        if self.c <= 0.0:
            return 0.0
        if self.gamma * s > EXP_CAP:
            return math.inf
        return self.c * math.exp(self.gamma * s)

    def integrated(self, s: float) -> float:
        return exp_integral(self.c, self.gamma, s)

    def invert(self, E: float) -> float:
        return invert_exp(self.c, self.gamma, E)


class SuperpositionRate(NamedTuple):
    """Sum of independent component rates; its first event is the earliest component event."""

    components: Tuple[Union[AffineRate, ExpRate], ...]

    def rate(self, s: float) -> float:
        return sum(c.rate(s) for c in self.components)

    def integrated(self, s: float) -> float:
        return sum(c.integrated(s) for c in self.components)

    def first_event(self, rng: np.random.Generator) -> Tuple[float, Optional[int]]:
        return first_event_superposition(self.components, rng)

    def invert(self, E: float) -> float:
        """Event time of the summed rate for one deviate (bisection on the mass).

        Samplers draw superpositions component-wise; this is for oracles.
        """

        total = self.integrated
        hi = 1.0
        while total(hi) < E:
            hi *= 2.0
            if hi > 1e300:
                return math.inf
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if total(mid) < E:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(1.0, hi):
                break
        return hi


RateSpec = Union[AffineRate, ExpRate, SuperpositionRate]
