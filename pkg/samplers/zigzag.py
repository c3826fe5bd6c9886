from __future__ import annotations

import heapq
import logging
import math
import time
from typing import List, Optional, Tuple

import numpy as np

from poisson import RateSpec, SuperpositionRate
from schemas import BoundViolationError, DomainError

from .models import Algorithm, SamplerResult, Skeleton, SkeletonMeta, SkeletonMode
from .providers import ExactRateProvider, RateProvider, SubsampledRateProvider
from .streams import RunStreams


logger = logging.getLogger(__name__)

# Largest thinning ratio tolerated as rounding error.
RATIO_TOLERANCE = 1e-9


def check_run(
    provider: RateProvider,
    tau_final: float,
    xi0: np.ndarray,
    theta0: Optional[np.ndarray],
) -> Tuple[np.ndarray, np.ndarray]:
    if not math.isfinite(tau_final) or tau_final <= 0.0:
        raise DomainError(f"final clock must be positive and finite, got {tau_final}")
    xi = np.array(xi0, dtype=float).reshape(-1)
    if xi.size != provider.dim:
        raise DomainError(f"initial state has {xi.size} coordinates, target has {provider.dim}")
    theta = np.ones(provider.dim) if theta0 is None else np.array(theta0, dtype=float).reshape(-1)
    if theta.size != provider.dim:
        raise DomainError(f"velocity has {theta.size} coordinates, target has {provider.dim}")
    if np.any(theta == 0.0) or not np.all(np.isfinite(theta)):
        raise DomainError("velocities must be finite and non-zero")
    return xi, theta


def draw_event(rate: RateSpec, streams: RunStreams) -> float:
    """Clock time to the first event of `rate`, +inf when it never fires."""

    if isinstance(rate, SuperpositionRate):
        return rate.first_event(streams.exponential)[0]
    return rate.invert(streams.deviate())


def thinning_ratio(estimate: float, bound: float, k: int, clock: float) -> float:
    if bound > 0.0:
        ratio = estimate / bound
    else:
        ratio = math.inf if estimate > 0.0 else 0.0
    if ratio > 1.0 + RATIO_TOLERANCE:
        raise BoundViolationError(k, clock, ratio)
    return ratio


def make_meta(
    algorithm: Algorithm,
    mode: SkeletonMode,
    provider: RateProvider,
    streams: RunStreams,
    tau_final: float,
    xi0: np.ndarray,
    theta0: np.ndarray,
    events: int,
) -> SkeletonMeta:
    return SkeletonMeta(
        algorithm=algorithm,
        mode=mode,
        seed=streams.seed,
        model=provider.name,
        model_params=provider.describe(),
        tau_final=tau_final,
        xi0=xi0.tolist(),
        theta0=theta0.tolist(),
        events=events,
    )


class _Recorder:
    """Full-state rows with the anchor row (0, xi0) already in place."""

    def __init__(self, xi0: np.ndarray, max_events: Optional[int]) -> None:
        self.times: List[float] = [0.0]
        self.states: List[np.ndarray] = [xi0.copy()]
        self.flips: List[int] = [-1]
        self.max_events = max_events

    @property
    def full(self) -> bool:
        return self.max_events is not None and len(self.times) - 1 >= self.max_events

    def add(self, t: float, xi: np.ndarray, k: int) -> None:
        self.times.append(t)
        self.states.append(xi.copy())
        self.flips.append(k)

    def close(self, t: float, xi: np.ndarray) -> None:
        if t > self.times[-1]:
            self.add(t, xi, -1)


def _finish(
    algorithm: Algorithm,
    provider: RateProvider,
    streams: RunStreams,
    recorder: _Recorder,
    xi0: np.ndarray,
    theta0: np.ndarray,
    tau_end: float,
    xi_end: np.ndarray,
    result: SamplerResult,
    started: float,
) -> SamplerResult:
    recorder.close(tau_end, xi_end)
    meta = make_meta(
        algorithm, SkeletonMode.FULL_STATE, provider, streams, tau_end, xi0, theta0, result.events
    )
    result.skeleton = Skeleton.full_state(meta, recorder.times, recorder.states, recorder.flips)
    result.final_state = xi_end.copy()
    result.wall_time = time.perf_counter() - started
    logger.info(
        "%s run finished: clock=%g events=%d proposals=%d wall=%.3fs",
        algorithm.value, tau_end, result.events, result.proposals, result.wall_time,
    )
    return result


def _cap_warning(result: SamplerResult, clock: float) -> None:
    message = f"event cap reached at clock {clock:.6g}; run truncated"
    logger.warning(message)
    result.warnings.append(message)


def zigzag_standard(
    provider: ExactRateProvider,
    tau_final: float,
    xi0: np.ndarray,
    theta0: Optional[np.ndarray] = None,
    streams: Optional[RunStreams] = None,
    max_events: Optional[int] = None,
) -> SamplerResult:
    """Standard Zig-Zag: draw every coordinate's first event, flip the earliest, redraw all."""

    xi, theta = check_run(provider, tau_final, xi0, theta0)
    streams = streams or RunStreams()
    xi_start, theta_start = xi.copy(), theta.copy()
    started = time.perf_counter()
    logger.info("standard run: d=%d clock=%g seed=%s", provider.dim, tau_final, streams.seed)

    result = SamplerResult()
    recorder = _Recorder(xi, max_events)
    t = 0.0
    while True:
        taus = np.array([draw_event(provider.rate(k, xi, theta), streams) for k in range(provider.dim)])
        k = int(np.argmin(taus))
        if t + taus[k] > tau_final:
            break
        if recorder.full:
            _cap_warning(result, t)
            tau_final = t
            break
        xi += theta * taus[k]
        t += taus[k]
        theta[k] = -theta[k]
        result.events += 1
        result.proposals += 1
        recorder.add(t, xi, k)

    xi += theta * (tau_final - t)
    return _finish(
        Algorithm.STANDARD, provider, streams, recorder, xi_start, theta_start, tau_final, xi, result, started
    )


def zigzag_subsampled(
    provider: SubsampledRateProvider,
    tau_final: float,
    xi0: np.ndarray,
    theta0: Optional[np.ndarray] = None,
    streams: Optional[RunStreams] = None,
    max_events: Optional[int] = None,
) -> SamplerResult:
    """Zig-Zag with subsampling: propose from the bounds, accept by thinning.

    A rejected proposal redraws only the proposing coordinate; an accepted
    one flips it and redraws every coordinate from the current state.
    """

    xi, theta = check_run(provider, tau_final, xi0, theta0)
    streams = streams or RunStreams()
    xi_start, theta_start = xi.copy(), theta.copy()
    started = time.perf_counter()
    logger.info("subsampled run: d=%d clock=%g seed=%s", provider.dim, tau_final, streams.seed)

    result = SamplerResult()
    recorder = _Recorder(xi, max_events)
    bounds: List[RateSpec] = [provider.bound(k, xi, theta) for k in range(provider.dim)]
    origin = np.zeros(provider.dim)
    proposed = np.array([draw_event(b, streams) for b in bounds])
    t = 0.0
    while True:
        k = int(np.argmin(proposed))
        if proposed[k] > tau_final:
            break
        if recorder.full:
            _cap_warning(result, t)
            tau_final = t
            break
        xi += theta * (proposed[k] - t)
        t = float(proposed[k])
        result.proposals += 1

        U = provider.draw_subsample(k, streams.subsample)
        estimate = provider.estimator_rate(k, xi, theta, U)
        ratio = thinning_ratio(estimate, bounds[k].rate(t - origin[k]), k, t)
        result.max_ratio = max(result.max_ratio, ratio)

        if streams.uniform.random() < ratio:
            theta[k] = -theta[k]
            result.events += 1
            recorder.add(t, xi, k)
            redraw = range(provider.dim)
        else:
            result.rejections += 1
            redraw = (k,)
        for j in redraw:
            bounds[j] = provider.bound(j, xi, theta)
            origin[j] = t
            proposed[j] = t + draw_event(bounds[j], streams)

    xi += theta * (tau_final - t)
    logger.info("subsampled acceptance rate %.3f (max ratio %.4f)", result.acceptance_rate, result.max_ratio)
    return _finish(
        Algorithm.SUBSAMPLED, provider, streams, recorder, xi_start, theta_start, tau_final, xi, result, started
    )


def zigzag_local(
    provider: ExactRateProvider,
    tau_final: float,
    xi0: np.ndarray,
    theta0: Optional[np.ndarray] = None,
    streams: Optional[RunStreams] = None,
    max_events: Optional[int] = None,
) -> SamplerResult:
    """Local Zig-Zag: after a flip of k only the times of N_k are redrawn.

    Positions are advanced lazily per coordinate; the proposed times live in
    a binary heap whose stale entries are skipped by version number.
    """

    xi, theta = check_run(provider, tau_final, xi0, theta0)
    streams = streams or RunStreams()
    xi_start, theta_start = xi.copy(), theta.copy()
    started = time.perf_counter()
    logger.info("local run: d=%d clock=%g seed=%s", provider.dim, tau_final, streams.seed)

    result = SamplerResult()
    recorder = _Recorder(xi, max_events)
    clocks = np.zeros(provider.dim)
    version = np.zeros(provider.dim, dtype=np.int64)
    heap: List[Tuple[float, int, int]] = []

    def advance(idx: np.ndarray, t: float) -> None:
        xi[idx] += theta[idx] * (t - clocks[idx])
        clocks[idx] = t

    def schedule(j: int, t: float) -> None:
        version[j] += 1
        tau = draw_event(provider.rate(j, xi, theta), streams)
        if math.isfinite(tau):
            heapq.heappush(heap, (t + tau, j, int(version[j])))

    for j in range(provider.dim):
        schedule(j, 0.0)

    t = 0.0
    while heap:
        t_next, k, stamp = heap[0]
        if stamp != version[k]:
            heapq.heappop(heap)
            continue
        if t_next > tau_final:
            break
        if recorder.full:
            _cap_warning(result, t)
            tau_final = t
            break
        heapq.heappop(heap)
        t = t_next
        advance(provider.extended_neighbors(k), t)
        theta[k] = -theta[k]
        result.events += 1
        result.proposals += 1
        recorder.add(t, xi + theta * (t - clocks), k)
        for j in provider.neighbors(k):
            schedule(int(j), t)

    if not heap:
        message = f"no further events after clock {t:.6g}: every rate vanishes"
        logger.warning(message)
        result.warnings.append(message)

    advance(np.arange(provider.dim), tau_final)
    return _finish(
        Algorithm.LOCAL, provider, streams, recorder, xi_start, theta_start, tau_final, xi, result, started
    )
