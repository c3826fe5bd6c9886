from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy import stats

from bridges import DriftModel, LinearModel
from schemas import DomainError, OracleError

from .models import EulerOracleConfig, EulerOracleResult, QQResult


logger = logging.getLogger(__name__)


def _euler_batch(
    model: DriftModel,
    u: float,
    v: float,
    steps: int,
    keep: np.ndarray,
    cfg: EulerOracleConfig,
    size: int,
    seed: np.random.SeedSequence,
) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = np.full(size, float(u))
    stored = np.empty((size, keep.size))
    slot = 0
    if keep[0] == 0:
        stored[:, 0] = x
        slot = 1
    scale = math.sqrt(cfg.dt)
    for step in range(1, steps + 1):
        x = x + model.drift(x) * cfg.dt + scale * rng.standard_normal(size)
        if slot < keep.size and keep[slot] == step:
            stored[:, slot] = x
            slot += 1
    return stored[np.abs(x - v) <= cfg.epsilon]


def euler_eball(
    model: DriftModel,
    u: float,
    v: Optional[float],
    T: float,
    cfg: EulerOracleConfig,
) -> EulerOracleResult:
    """Forward Euler-Maruyama paths of dX = b(X) dt + dW kept when |X_T - v| <= epsilon.

    Batches are simulated in order from per-batch seed streams and the run
    stops after the first batch that brings the accepted count to
    `cfg.paths`, so the result is the same for any worker count.
    """

    v = cfg.v if v is None else v
    if v is None:
        raise DomainError("target endpoint v is required")
    if not (math.isfinite(T) and T > 0.0):
        raise DomainError(f"horizon must be positive, got {T}")
    steps = int(round(T / cfg.dt))
    if steps < 1 or abs(steps * cfg.dt - T) > 1e-12 * max(1.0, T):
        raise DomainError(f"step {cfg.dt} does not divide T = {T}")

    keep = np.arange(0, steps + 1, cfg.stride)
    if keep[-1] != steps:
        keep = np.append(keep, steps)
    times = keep * cfg.dt

    total_batches = math.ceil(cfg.max_attempts / cfg.batch)
    seeds = np.random.SeedSequence(cfg.seed).spawn(total_batches)
    sizes = [min(cfg.batch, cfg.max_attempts - b * cfg.batch) for b in range(total_batches)]

    accepted: List[np.ndarray] = []
    count, attempts, done = 0, 0, False
    logger.info(
        "euler oracle: T=%g dt=%g eps=%g target=%d paths workers=%d",
        T, cfg.dt, cfg.epsilon, cfg.paths, cfg.workers,
    )
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        for start in range(0, total_batches, cfg.workers):
            chunk = range(start, min(start + cfg.workers, total_batches))
            results = pool.map(
                lambda b: _euler_batch(model, u, v, steps, keep, cfg, sizes[b], seeds[b]), chunk
            )
            for b, paths in zip(chunk, results):
                accepted.append(paths)
                count += paths.shape[0]
                attempts += sizes[b]
                if count >= cfg.paths:
                    done = True
                    break
            if done:
                break

    if count == 0:
        raise OracleError(attempts, 0.0, f"epsilon={cfg.epsilon} around v={v}")
    if count < cfg.paths:
        logger.warning("euler oracle accepted %d of %d requested paths", count, cfg.paths)
    result = EulerOracleResult(times=times, paths=np.concatenate(accepted), attempts=attempts, accepted=count)
    logger.info("euler oracle acceptance rate %.4g over %d attempts", result.acceptance_rate, attempts)
    return result


def _growth(beta: float, h: float) -> float:
    """int_0^h e^{beta s} ds."""

    return math.expm1(beta * h) / beta if beta != 0.0 else h


def gaussian_bridge_marginal(model: LinearModel, u: float, v: float, T: float, t: float) -> Tuple[float, float]:
    """Exact (mean, variance) of the linear-drift bridge from u to v at time t in (0, T).

    Combines the OU transition u -> X_t with X_t -> v, both Gaussian:
    X_h | x ~ N(x e^{beta h} + alpha G(h), G_2(h)) with G(h) = int_0^h e^{beta s} ds
    and G_2(h) = int_0^h e^{2 beta s} ds.
    """

    if not (0.0 < t < T):
        raise DomainError(f"t must lie in (0, {T}), got {t}")
    alpha, beta = model.alpha, model.beta
    forward_mean = u * math.exp(beta * t) + alpha * _growth(beta, t)
    forward_var = _growth(2.0 * beta, t)
    gain = math.exp(beta * (T - t))
    shift = alpha * _growth(beta, T - t)
    backward_var = _growth(2.0 * beta, T - t)

    precision = 1.0 / forward_var + gain**2 / backward_var
    mean = (forward_mean / forward_var + gain * (v - shift) / backward_var) / precision
    return mean, 1.0 / precision


# arrays, CDF callables, or scipy distributions (anything with a .cdf)
Reference = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


def ks_statistic(sample: np.ndarray, reference: Reference) -> float:
    """Two-sample KS statistic against a sample, one-sample against a CDF or distribution."""

    sample = np.asarray(sample, dtype=float).ravel()
    if sample.size == 0:
        raise DomainError("KS statistic needs a non-empty sample")
    if hasattr(reference, "cdf"):
        return float(stats.kstest(sample, reference.cdf).statistic)
    if callable(reference):
        return float(stats.kstest(sample, reference).statistic)
    reference = np.asarray(reference, dtype=float).ravel()
    if reference.size == 0:
        raise DomainError("KS statistic needs a non-empty reference sample")
    return float(stats.ks_2samp(sample, reference).statistic)


def qq_data(chain: np.ndarray) -> QQResult:
    """Sorted chain against standard-normal quantiles at (k - 0.5)/n."""

    x = np.sort(np.asarray(chain, dtype=float).ravel())
    n = x.size
    if n < 100:
        raise DomainError(f"QQ data needs at least 100 samples, got {n}")
    theoretical = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    if np.ptp(x) == 0.0:
        raise DomainError("QQ data of a constant chain is undefined")
    correlation = float(np.corrcoef(theoretical, x)[0, 1])
    return QQResult(theoretical=theoretical, empirical=x, correlation=correlation)
