from __future__ import annotations

import heapq
import logging
import math
import time
from typing import List, Optional, Tuple

import numpy as np

from poisson import RateSpec

from .models import Algorithm, SamplerResult, Skeleton, SkeletonMode
from .providers import SubsampledRateProvider
from .streams import RunStreams
from .zigzag import check_run, draw_event, make_meta, thinning_ratio


logger = logging.getLogger(__name__)


class _LazyState:
    """Per-coordinate positions anchored at each coordinate's last flip.

    The position of j at clock s is anchor_j + theta_j (s - anchor_clock_j),
    the same expression the reflection-tuple replay evaluates. `xi` holds
    the positions last materialised by `advance`.
    """

    def __init__(self, xi: np.ndarray, theta: np.ndarray) -> None:
        self.xi = xi
        self.theta = theta
        self.anchor = xi.copy()
        self.anchor_clock = np.zeros(xi.size)

    def advance(self, idx: np.ndarray, t: float) -> None:
        self.xi[idx] = self.anchor[idx] + self.theta[idx] * (t - self.anchor_clock[idx])

    def flip(self, k: int, t: float) -> None:
        self.advance(np.array([k]), t)
        self.anchor[k] = self.xi[k]
        self.anchor_clock[k] = t
        self.theta[k] = -self.theta[k]

    def snapshot(self, t: float) -> np.ndarray:
        return self.anchor + self.theta * (t - self.anchor_clock)


def zigzag_fully_local(
    provider: SubsampledRateProvider,
    tau_final: float,
    xi0: np.ndarray,
    theta0: Optional[np.ndarray] = None,
    streams: Optional[RunStreams] = None,
    max_events: Optional[int] = None,
    dense: bool = False,
) -> SamplerResult:
    """Fully local Zig-Zag with subsampling.

    Each coordinate keeps its own clock. A popped proposal for k advances
    only N-bar_k and N-tilde_k(U) before the thinning test; an accepted flip
    also advances the bound neighbourhoods of N-bar_k and redraws their
    proposals. The bound of k and the clock it was computed at are kept per
    coordinate until k's proposal is redrawn.

    The skeleton holds reflection tuples. With `dense=True` the full state
    is also recorded at every accepted flip, which uses no randomness.
    """

    xi, theta = check_run(provider, tau_final, xi0, theta0)
    streams = streams or RunStreams()
    xi_start, theta_start = xi.copy(), theta.copy()
    started = time.perf_counter()
    logger.info("fully-local run: d=%d clock=%g seed=%s", provider.dim, tau_final, streams.seed)

    result = SamplerResult()
    state = _LazyState(xi, theta)
    bounds: List[Optional[RateSpec]] = [None] * provider.dim
    origin = np.zeros(provider.dim)
    version = np.zeros(provider.dim, dtype=np.int64)
    heap: List[Tuple[float, int, int]] = []

    indices: List[int] = []
    times: List[float] = []
    values: List[float] = []
    dense_times: List[float] = [0.0]
    dense_states: List[np.ndarray] = [xi.copy()]
    dense_flips: List[int] = [-1]

    def schedule(j: int, t: float) -> None:
        version[j] += 1
        bounds[j] = provider.bound(j, state.xi, theta)
        origin[j] = t
        tau = draw_event(bounds[j], streams)
        if math.isfinite(tau):
            heapq.heappush(heap, (t + tau, j, int(version[j])))

    for j in range(provider.dim):
        schedule(j, 0.0)

    t = 0.0
    while True:
        if not heap:
            message = f"no further events after clock {t:.6g}: every bound vanishes"
            logger.warning(message)
            result.warnings.append(message)
            break
        t_next, k, stamp = heap[0]
        if stamp != version[k]:
            heapq.heappop(heap)
            continue
        if t_next > tau_final:
            break
        if max_events is not None and result.events >= max_events:
            message = f"event cap reached at clock {t:.6g}; run truncated"
            logger.warning(message)
            result.warnings.append(message)
            tau_final = t
            break
        heapq.heappop(heap)
        t = t_next
        result.proposals += 1

        U = provider.draw_subsample(k, streams.subsample)
        near = provider.bound_neighbors(k)
        state.advance(near, t)
        state.advance(provider.estimator_neighbors(k, U), t)
        estimate = provider.estimator_rate(k, state.xi, theta, U)
        ratio = thinning_ratio(estimate, bounds[k].rate(t - origin[k]), k, t)
        result.max_ratio = max(result.max_ratio, ratio)

        if streams.uniform.random() < ratio:
            state.advance(provider.extended_bound_neighbors(k), t)
            state.flip(k, t)
            result.events += 1
            indices.append(k)
            times.append(t)
            values.append(float(state.xi[k]))
            if dense:
                dense_times.append(t)
                dense_states.append(state.snapshot(t))
                dense_flips.append(k)
            for j in near:
                if j != k:
                    schedule(int(j), t)
        else:
            result.rejections += 1
        schedule(k, t)

    final = state.snapshot(tau_final)
    meta = make_meta(
        Algorithm.FULLY_LOCAL, SkeletonMode.REFLECTIONS, provider, streams,
        tau_final, xi_start, theta_start, result.events,
    )
    result.skeleton = Skeleton.reflections(meta, indices, times, values)
    if dense:
        if tau_final > dense_times[-1]:
            dense_times.append(tau_final)
            dense_states.append(final)
            dense_flips.append(-1)
        dense_meta = meta.model_copy(update={"mode": SkeletonMode.FULL_STATE})
        result.dense = Skeleton.full_state(dense_meta, dense_times, dense_states, dense_flips)
    result.final_state = final
    result.wall_time = time.perf_counter() - started
    logger.info(
        "fully-local run finished: clock=%g events=%d proposals=%d acceptance=%.3f wall=%.3fs",
        tau_final, result.events, result.proposals, result.acceptance_rate, result.wall_time,
    )
    return result
