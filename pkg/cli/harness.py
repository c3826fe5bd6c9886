from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from basis import BasisContext
from bridges import EstimatorVariant, SineModel, make_target
from diagnostics import ess_report, ks_statistic, mala_baseline
from samplers import (
    Algorithm,
    SamplerResult,
    RunStreams,
    discretize,
    zigzag_fully_local,
    zigzag_local,
    zigzag_standard,
    zigzag_subsampled,
)

from .models import CompareConfig, ComparisonRow, RunConfig


logger = logging.getLogger(__name__)

SAMPLERS: Dict[Algorithm, Callable[..., SamplerResult]] = {
    Algorithm.STANDARD: zigzag_standard,
    Algorithm.SUBSAMPLED: zigzag_subsampled,
    Algorithm.LOCAL: zigzag_local,
    Algorithm.FULLY_LOCAL: zigzag_fully_local,
}

# Methods of the comparison table, in column order.
METHODS: Tuple[str, ...] = ("zz-single", "zz-v1", "zz-v2", "mala")
REFERENCE_METHOD = "zz-single"


def run_sampler(config: RunConfig, streams: Optional[RunStreams] = None) -> SamplerResult:
    """Run the configured sampler from xi = 0 and stamp the run into the skeleton metadata."""

    ctx = config.context()
    target = config.target(ctx)
    streams = streams or RunStreams(config.seed)
    result = SAMPLERS[config.algorithm](
        target,
        config.clock,
        np.zeros(ctx.M),
        config.theta(ctx),
        streams=streams,
        max_events=config.max_events,
    )
    update = {
        "estimator": config.estimator.value,
        "levels": ctx.levels,
        "T": ctx.T,
        "u": ctx.u,
        "v": ctx.v,
        "tau_burnin": config.burnin,
        "dtau": config.dtau,
        "model_params": {**target.describe(), "run": config.model_dump(mode="json")},
    }
    result.skeleton = dataclasses.replace(
        result.skeleton, meta=result.skeleton.meta.model_copy(update=update)
    )
    if result.dense is not None:
        result.dense = dataclasses.replace(result.dense, meta=result.dense.meta.model_copy(update=update))
    return result


def rerun_config(meta_params: dict) -> RunConfig:
    """RunConfig recorded in a skeleton sidecar's model parameters."""

    return RunConfig.model_validate(meta_params["run"])


def _cell_seed(seed: int, cell: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(cell,)).generate_state(1)[0])


def _run_cell(job: Tuple[int, float, str, CompareConfig]) -> Tuple[ComparisonRow, Optional[np.ndarray]]:
    """One (alpha, method) cell; failures come back as a failed row."""

    cell, alpha, method, grid = job
    row = ComparisonRow(alpha=alpha, method=method)
    try:
        ctx = BasisContext(grid.levels, grid.T, grid.u, grid.v)
        if method == "mala":
            target = make_target(ctx, SineModel(alpha=alpha))
            mala = mala_baseline(target, np.zeros(ctx.M), grid.mala_iterations, seed=_cell_seed(grid.seed, cell))
            samples = mala.chain[mala.warmup:]
            wall_time = mala.wall_time
        else:
            config = RunConfig(
                model="sine",
                alpha=alpha,
                levels=grid.levels,
                T=grid.T,
                u=grid.u,
                v=grid.v,
                algorithm=Algorithm.FULLY_LOCAL,
                estimator=EstimatorVariant(method.split("-", 1)[1]),
                clock=grid.clock,
                burnin=grid.burnin,
                dtau=grid.dtau,
                seed=grid.seed,
                max_events=grid.max_events,
            )
            result = run_sampler(config, RunStreams(grid.seed, cell=cell))
            samples = discretize(result.skeleton, grid.burnin, grid.dtau)
            wall_time = result.wall_time

        report = ess_report(samples, wall_time=wall_time)
        first = report.per_coordinate[0]
        row = row.model_copy(update={
            "samples": report.samples,
            "wall_time": wall_time,
            "ess_first": first,
            "ess_median": report.median,
            "ess_min": report.min,
            "ess_first_per_second": report.per_second(first),
            "ess_median_per_second": report.per_second(report.median),
            "ess_min_per_second": report.per_second(report.min),
        })
        return row, ctx.expand_many(samples, 0.5 * grid.T)
    except Exception as exc:
        logger.warning("comparison cell alpha=%g method=%s failed: %s", alpha, method, exc)
        return row.model_copy(update={"status": "failed", "error": str(exc)}), None


def compare(grid: CompareConfig) -> List[ComparisonRow]:
    """ESS and ESS per second of fully local Zig-Zag (single, v1, v2) and MALA per alpha.

    Cell l of the alpha-by-method grid draws from streams derived from
    (seed, l), so the table does not depend on `workers`. Each row also
    carries the KS distance of its X_{T/2} marginal to the single-point
    Zig-Zag marginal at the same alpha.
    """

    jobs = [
        (cell, alpha, method, grid)
        for cell, (alpha, method) in enumerate((a, m) for a in grid.alphas for m in METHODS)
    ]
    logger.info("comparison: %d alphas, %d cells, %d workers", len(grid.alphas), len(jobs), grid.workers)
    if grid.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=grid.workers) as pool:
            outcomes = list(pool.map(_run_cell, jobs))
    else:
        outcomes = [_run_cell(job) for job in jobs]

    rows: List[ComparisonRow] = []
    for start in range(0, len(outcomes), len(METHODS)):
        block = outcomes[start:start + len(METHODS)]
        reference = dict(zip(METHODS, block))[REFERENCE_METHOD][1]
        for row, midpoint in block:
            if reference is not None and midpoint is not None and row.method != REFERENCE_METHOD:
                row = row.model_copy(update={"midpoint_ks": ks_statistic(midpoint, reference)})
            rows.append(row)
    failed = sum(row.status == "failed" for row in rows)
    if failed:
        logger.warning("comparison finished with %d failed cells", failed)
    return rows
