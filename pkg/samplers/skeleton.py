from __future__ import annotations

import csv
import logging
import math
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from pydantic import ValidationError

from schemas import DomainError, SkeletonParseError

from .models import Skeleton, SkeletonMeta, SkeletonMode


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FULL_STATE_LEAD = "t"
REFLECTION_HEADER = ["event", "index", "time", "value"]


def positions_at(skeleton: Skeleton, times: np.ndarray) -> np.ndarray:
    """Coefficient vectors at the given clocks, shape (len(times), d).

    Full-state skeletons are interpolated linearly between rows. Reflection
    skeletons are rebuilt per coordinate from that coordinate's own flips,
    starting from xi0 and theta0 in the metadata.
    """

    times = np.asarray(times, dtype=float)
    if skeleton.is_empty():
        raise DomainError("skeleton has no rows")
    if np.any(times < 0.0) or np.any(times > skeleton.tau_final):
        raise DomainError(f"requested clocks outside [0, {skeleton.tau_final}]")

    if skeleton.mode is SkeletonMode.FULL_STATE:
        return np.column_stack(
            [np.interp(times, skeleton.times, skeleton.states[:, j]) for j in range(skeleton.dim)]
        )

    xi0, theta0 = skeleton.xi0, skeleton.theta0
    out = np.empty((times.size, skeleton.dim))
    for j in range(skeleton.dim):
        mask = skeleton.indices == j
        s, values = skeleton.times[mask], skeleton.values[mask]
        m = np.searchsorted(s, times, side="right")
        sign = np.where(m % 2 == 0, 1.0, -1.0)
        last = np.maximum(m - 1, 0)
        anchor = np.where(m > 0, values[last] if s.size else xi0[j], xi0[j])
        anchor_clock = np.where(m > 0, s[last] if s.size else 0.0, 0.0)
        out[:, j] = anchor + theta0[j] * sign * (times - anchor_clock)
    return out


def discretize(skeleton: Skeleton, tau_burnin: float, dtau: float) -> np.ndarray:
    """Samples xi(tau_burnin + m dtau), m = 1, 2, ... up to the final clock."""

    if skeleton.is_empty():
        raise DomainError("cannot discretize an empty skeleton")
    if not (math.isfinite(dtau) and dtau > 0.0):
        raise DomainError(f"sampling step must be positive, got {dtau}")
    if tau_burnin < 0.0:
        raise DomainError(f"burn-in must be >= 0, got {tau_burnin}")
    if tau_burnin + dtau > skeleton.tau_final:
        raise DomainError(
            f"burn-in {tau_burnin} plus step {dtau} exceeds the final clock {skeleton.tau_final}"
        )
    count = int(math.floor((skeleton.tau_final - tau_burnin) / dtau + 1e-9))
    times = tau_burnin + dtau * np.arange(1, count + 1)
    times = times[times <= skeleton.tau_final]
    return positions_at(skeleton, times)


def replay(skeleton: Skeleton) -> Skeleton:
    """Full-state skeleton rebuilt from reflection tuples, one row per flip plus anchors."""

    if skeleton.mode is SkeletonMode.FULL_STATE:
        return skeleton
    times = np.concatenate([[0.0], skeleton.times, [skeleton.tau_final]])
    states = positions_at(skeleton, times)
    flips = np.concatenate([[-1], skeleton.indices, [-1]])
    meta = skeleton.meta.model_copy(update={"mode": SkeletonMode.FULL_STATE})
    return Skeleton.full_state(meta, list(times), list(states), list(flips))


# ----------------------------------------------------------------------
# Files
# ----------------------------------------------------------------------


def sidecar_path(path: PathLike) -> Path:
    return Path(path).with_suffix(".json")


def write_skeleton(skeleton: Skeleton, path: PathLike) -> Tuple[Path, Path]:
    """Write the skeleton CSV and its JSON metadata sidecar."""

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if skeleton.mode is SkeletonMode.FULL_STATE:
            writer.writerow([FULL_STATE_LEAD] + [f"xi_{n}" for n in range(1, skeleton.dim + 1)])
            for t, row in zip(skeleton.times, skeleton.states):
                writer.writerow([repr(float(t))] + [repr(float(x)) for x in row])
        else:
            writer.writerow(REFLECTION_HEADER)
            for event, (k, t, x) in enumerate(zip(skeleton.indices, skeleton.times, skeleton.values), 1):
                writer.writerow([event, int(k) + 1, repr(float(t)), repr(float(x))])

    meta_path = sidecar_path(path)
    meta_path.write_text(skeleton.meta.model_dump_json(indent=2))
    logger.info("wrote %s skeleton with %d events to %s", skeleton.mode.value, skeleton.event_count, path)
    return path, meta_path


def _parse_row(path: PathLike, row_number: int, row: List[str], width: int) -> List[float]:
    if len(row) != width:
        raise SkeletonParseError(str(path), row_number, f"expected {width} fields, found {len(row)}")
    try:
        values = [float(x) for x in row]
    except ValueError as exc:
        raise SkeletonParseError(str(path), row_number, f"non-numeric field ({exc})") from exc
    if not all(math.isfinite(x) for x in values):
        raise SkeletonParseError(str(path), row_number, "non-finite field")
    return values


def read_skeleton(path: PathLike) -> Skeleton:
    """Load a skeleton CSV with its sidecar; corrupt rows raise SkeletonParseError."""

    path = Path(path)
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        raise SkeletonParseError(str(path), None, f"missing metadata sidecar {meta_path.name}")
    try:
        meta = SkeletonMeta.model_validate_json(meta_path.read_text())
    except ValidationError as exc:
        raise SkeletonParseError(str(meta_path), None, f"invalid metadata: {exc}") from exc

    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise SkeletonParseError(str(path), None, "empty file")
        rows = [(number, row) for number, row in enumerate(reader, 1) if row]

    if header == REFLECTION_HEADER:
        parsed = [_parse_row(path, n, row, 4) for n, row in rows]
        indices, times, values = [], [], []
        for (n, _), (_, index, t, x) in zip(rows, parsed):
            if not 1 <= index <= meta.dim or index != int(index):
                raise SkeletonParseError(str(path), n, f"coordinate index {index} outside [1, {meta.dim}]")
            if times and t < times[-1]:
                raise SkeletonParseError(str(path), n, "event times decrease")
            indices.append(int(index) - 1)
            times.append(t)
            values.append(x)
        return Skeleton.reflections(meta, indices, times, values)

    if header[0] != FULL_STATE_LEAD or len(header) - 1 != meta.dim:
        raise SkeletonParseError(str(path), None, f"unrecognised header with {len(header)} columns")
    parsed = [_parse_row(path, n, row, meta.dim + 1) for n, row in rows]
    times = [r[0] for r in parsed]
    for (n, _), prev, cur in zip(rows[1:], times, times[1:]):
        if cur <= prev:
            raise SkeletonParseError(str(path), n, "times must increase strictly")
    states = np.asarray([r[1:] for r in parsed]).reshape(len(parsed), meta.dim)
    return Skeleton.full_state(meta, times, list(states), _recover_flips(states))


def _recover_flips(states: np.ndarray) -> List[int]:
    """Flipped coordinate at each interior row, from the sign change of its velocity."""

    flips = [-1] * len(states)
    if len(states) < 3:
        return flips
    direction = np.sign(np.diff(states, axis=0))
    changed = direction[1:] != direction[:-1]
    for row, mask in enumerate(changed, 1):
        if mask.any():
            flips[row] = int(np.argmax(mask))
    return flips
