from __future__ import annotations

import math
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

import numpy as np

from schemas import DomainError

if TYPE_CHECKING:
    from .models import AffineRate, ExpRate, RateSpec


INF = math.inf

# Discriminants within this distance of zero are treated as zero.
DISCRIMINANT_GUARD = 1e-14

# Exponents above this overflow a double; the intensity is treated as infinite.
EXP_CAP = 700.0


def check_finite(*values: float) -> None:
    for value in values:
        if not math.isfinite(value):
            raise DomainError(f"non-finite rate parameter or deviate: {value!r}")


def check_deviate(E: float) -> None:
    check_finite(E)
    if E <= 0.0:
        raise DomainError(f"exponential deviate must be positive, got {E}")


def affine_integral(a: float, b: float, s: float) -> float:
    """Integral of (a + b x)^+ over [0, s]."""

    if s <= 0.0:
        return 0.0
    if b == 0.0:
        return max(a, 0.0) * s
    zero = -a / b
    if b > 0.0:
        lo, hi = max(0.0, zero), s
    else:
        lo, hi = 0.0, min(s, zero)
    if hi <= lo:
        return 0.0
    return a * (hi - lo) + 0.5 * b * (hi * hi - lo * lo)


def invert_affine(a: float, b: float, E: float) -> float:
    """Smallest tau with integral of (a + b s)^+ over [0, tau] equal to E."""

    check_finite(a, b)
    check_deviate(E)

    if b == 0.0:
        return E / a if a > 0.0 else INF

    if b > 0.0:
        if a >= 0.0:
            # tau = (-a + sqrt(a^2 + 2bE)) / b, in cancellation-free form
            return 2.0 * E / (a + math.sqrt(a * a + 2.0 * b * E))
        return -a / b + math.sqrt(2.0 * E / b)

    # b < 0: the rate dies out at s = a / |b| after a finite mass a^2 / (2|b|)
    if a <= 0.0:
        return INF
    mass = a * a / (-2.0 * b)
    if E > mass:
        return INF
    disc = a * a + 2.0 * b * E
    if disc < DISCRIMINANT_GUARD * max(1.0, a * a):
        disc = max(disc, 0.0)
    return 2.0 * E / (a + math.sqrt(disc))


def exp_integral(c: float, gamma: float, s: float) -> float:
    """Integral of max(0, c e^{gamma x}) over [0, s]."""

    if s <= 0.0 or c <= 0.0:
        return 0.0
    if gamma == 0.0:
        return c * s
    if gamma * s > EXP_CAP:
        return INF
    return c * math.expm1(gamma * s) / gamma


def invert_exp(c: float, gamma: float, E: float) -> float:
    """Smallest tau with integral of max(0, c e^{gamma s}) over [0, tau] equal to E."""

    check_finite(c, gamma)
    check_deviate(E)

    if c <= 0.0:
        return INF
    if gamma == 0.0:
        return E / c
    x = gamma * E / c
    if gamma < 0.0:
        # finite mass c / |gamma|
        if x <= -1.0:
            return INF
    return math.log1p(x) / gamma


def first_event_affine(r: "AffineRate", E: float) -> float:
    return invert_affine(r.a, r.b, E)


def first_event_exp(r: "ExpRate", E: float) -> float:
    return invert_exp(r.c, r.gamma, E)


def first_event_superposition(
    rates: Sequence["RateSpec"],
    rng: Optional[np.random.Generator] = None,
    deviates: Optional[Sequence[float]] = None,
) -> Tuple[float, Optional[int]]:
    """Earliest event over independent components and the component that fired.

    Each component consumes one exponential deviate, either from `deviates`
    or drawn from `rng`. Ties go to the lowest component index; when no
    component ever fires the result is (inf, None).
    """

    if len(rates) == 0:
        raise DomainError("superposition needs at least one component")
    if deviates is None:
        if rng is None:
            raise DomainError("either rng or deviates must be given")
        deviates = rng.standard_exponential(len(rates))
    elif len(deviates) != len(rates):
        raise DomainError(f"{len(deviates)} deviates for {len(rates)} components")

    best, winner = INF, None
    for idx, (rate, E) in enumerate(zip(rates, deviates)):
        tau = rate.invert(float(E))
        if tau < best:
            best, winner = tau, idx
    return best, winner
