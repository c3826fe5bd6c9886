from __future__ import annotations

import logging
import math
import time
from typing import Optional, Protocol

import numpy as np

from schemas import DomainError

from .models import MalaResult


logger = logging.getLogger(__name__)

TARGET_ACCEPTANCE = 0.6
WARMUP_FRACTION = 0.2


class DifferentiableTarget(Protocol):
    def energy(self, xi: np.ndarray) -> float: ...

    def gradient(self, xi: np.ndarray) -> np.ndarray: ...


def _checked_gradient(target: DifferentiableTarget, xi: np.ndarray) -> np.ndarray:
    grad = np.asarray(target.gradient(xi), dtype=float)
    if not np.all(np.isfinite(grad)):
        raise DomainError("target gradient is not finite")
    return grad


def mala_baseline(
    target: DifferentiableTarget,
    xi0: np.ndarray,
    iterations: int,
    seed: Optional[int] = None,
    step: float = 0.1,
    target_acceptance: float = TARGET_ACCEPTANCE,
    warmup_fraction: float = WARMUP_FRACTION,
) -> MalaResult:
    """Metropolis-adjusted Langevin chain on the energy of `target`.

    Proposal y = x - (eps^2 / 2) grad psi(x) + eps Z. During the first
    `warmup_fraction` of the iterations log(eps) follows a Robbins-Monro
    recursion towards `target_acceptance`; eps is frozen afterwards and the
    reported acceptance rate covers the remaining iterations only.
    """

    if iterations < 0:
        raise DomainError(f"iterations must be >= 0, got {iterations}")
    if step <= 0.0:
        raise DomainError(f"initial step must be positive, got {step}")
    rng = np.random.default_rng(seed)
    x = np.array(xi0, dtype=float).reshape(-1)
    chain = np.empty((iterations, x.size))
    warmup = int(math.floor(warmup_fraction * iterations))
    started = time.perf_counter()

    log_eps = math.log(step)
    energy = float(target.energy(x))
    grad = _checked_gradient(target, x)
    accepted = 0
    for it in range(iterations):
        eps = math.exp(log_eps)
        half = 0.5 * eps * eps
        y = x - half * grad + eps * rng.standard_normal(x.size)
        energy_y = float(target.energy(y))
        grad_y = _checked_gradient(target, y)

        forward = y - x + half * grad
        backward = x - y + half * grad_y
        log_ratio = energy - energy_y - (backward @ backward - forward @ forward) / (4.0 * half)
        accept_prob = math.exp(min(0.0, log_ratio)) if np.isfinite(log_ratio) else 0.0

        if rng.random() < accept_prob:
            x, energy, grad = y, energy_y, grad_y
            if it >= warmup:
                accepted += 1
        if it < warmup:
            log_eps += (accept_prob - target_acceptance) / (it + 1) ** 0.6
        chain[it] = x

    kept = iterations - warmup
    result = MalaResult(
        chain=chain,
        acceptance_rate=accepted / kept if kept else 0.0,
        step=math.exp(log_eps),
        warmup=warmup,
        wall_time=time.perf_counter() - started,
    )
    logger.info(
        "mala: %d iterations, step %.4g, post-warm-up acceptance %.3f",
        iterations, result.step, result.acceptance_rate,
    )
    return result
