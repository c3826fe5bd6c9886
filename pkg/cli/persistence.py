from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from basis import BasisContext
from diagnostics import write_rows
from samplers import Skeleton, SkeletonMeta
from schemas import DomainError, SkeletonParseError


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SAMPLE_LEAD = "sample"


def context_from_meta(meta: SkeletonMeta) -> BasisContext:
    """Basis the skeleton was sampled in; u and v are already on the sampled scale."""

    if meta.levels is None or meta.T is None:
        raise DomainError("skeleton metadata does not describe a bridge basis")
    return BasisContext(meta.levels, meta.T, meta.u or 0.0, meta.v or 0.0)


def write_samples(samples: np.ndarray, path: PathLike) -> Path:
    """Discretized coefficient samples, one row per sample, columns xi_1..xi_M."""

    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    header = [SAMPLE_LEAD] + [f"xi_{n}" for n in range(1, samples.shape[1] + 1)]
    rows = ([m] + [float(x) for x in row] for m, row in enumerate(samples))
    return write_rows(path, header, rows)


def read_samples(path: PathLike) -> np.ndarray:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != SAMPLE_LEAD:
            raise SkeletonParseError(str(path), None, "not a samples file")
        rows: List[List[float]] = []
        for number, row in enumerate(reader, 1):
            if not row:
                continue
            if len(row) != len(header):
                raise SkeletonParseError(str(path), number, f"expected {len(header)} fields, found {len(row)}")
            try:
                rows.append([float(x) for x in row[1:]])
            except ValueError as exc:
                raise SkeletonParseError(str(path), number, f"non-numeric field ({exc})") from exc
    if not rows:
        raise SkeletonParseError(str(path), None, "no samples")
    return np.asarray(rows)


def write_paths(ctx: BasisContext, samples: np.ndarray, path: PathLike) -> Path:
    """Every sample expanded on the dyadic grid; the header holds the grid times."""

    paths = ctx.expand_grid(np.atleast_2d(samples))
    header = [repr(float(t)) for t in ctx.grid]
    return write_rows(path, header, ([float(x) for x in row] for row in paths))


def read_paths(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    """(grid times, path rows) of a paths CSV."""

    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    return np.asarray([float(t) for t in header]), np.asarray(rows)


def is_skeleton(path: PathLike) -> bool:
    with Path(path).open(newline="") as fh:
        header = next(csv.reader(fh), [])
    return bool(header) and header[0] != SAMPLE_LEAD


def thin(samples: np.ndarray, every: int) -> np.ndarray:
    if every < 1:
        raise DomainError(f"every must be >= 1, got {every}")
    return samples[::every]


def describe_skeleton(skeleton: Skeleton) -> Sequence[str]:
    meta = skeleton.meta
    return [
        meta.algorithm.value,
        meta.model,
        str(skeleton.event_count),
        f"{meta.tau_final:g}",
        str(meta.seed),
    ]
