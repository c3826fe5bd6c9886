from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from schemas import DomainError

from .models import EssReport


logger = logging.getLogger(__name__)


def default_batches(n: int) -> int:
    return int(math.floor(math.sqrt(n)))


def ess_batch_means(chain: np.ndarray, batches: Optional[int] = None) -> float:
    """Effective sample size n s^2 / sigma^2_BM of a scalar chain.

    The chain is cut into `batches` equal batches of size floor(n / batches)
    from the start; the trailing remainder is dropped and n counts the
    samples kept. sigma^2_BM is the batch size times the sample variance of
    the batch means. Defaults to floor(sqrt(n)) batches.
    """

    x = np.asarray(chain, dtype=float).ravel()
    n = x.size
    a = default_batches(n) if batches is None else int(batches)
    if a < 2:
        raise DomainError(f"batch means needs at least 2 batches, got {a}")
    b = n // a
    if b < 2:
        raise DomainError(f"chain of length {n} is too short for {a} batches")
    if b < 10:
        logger.warning("batch size %d is small; the ESS estimate is unreliable", b)

    kept = x[: a * b]
    variance = float(np.var(kept, ddof=1))
    if not np.isfinite(variance) or variance <= 0.0:
        raise DomainError("chain has zero variance")
    means = kept.reshape(a, b).mean(axis=1)
    sigma2 = b * float(np.var(means, ddof=1))
    if sigma2 <= 0.0:
        return float(a * b)
    return a * b * variance / sigma2


def ess_report(
    samples: np.ndarray, batches: Optional[int] = None, wall_time: Optional[float] = None
) -> EssReport:
    """ESS of every column of an (n, d) sample array; values above n are clamped and flagged."""

    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    n = samples.shape[0]
    a = default_batches(n) if batches is None else int(batches)
    values, clamped = [], []
    for j in range(samples.shape[1]):
        ess = ess_batch_means(samples[:, j], a)
        if ess > n:
            clamped.append(j + 1)
            ess = float(n)
        values.append(ess)
    if clamped:
        logger.warning("ESS clamped at the sample count for %d coordinates", len(clamped))
    return EssReport(samples=n, batches=a, per_coordinate=values, clamped=clamped, wall_time=wall_time)
