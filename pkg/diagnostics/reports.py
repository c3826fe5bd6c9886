from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

from .models import EssReport, QQResult


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
    logger.info("wrote %s", path)
    return path


def write_json(path: PathLike, payload: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    logger.info("wrote %s", path)
    return path


def write_ess_report(report: EssReport, path: PathLike) -> List[Path]:
    """Per-coordinate CSV (`index,ess,clamped`) plus a JSON summary next to it."""

    rows = (
        (n, value, int(n in report.clamped))
        for n, value in enumerate(report.per_coordinate, 1)
    )
    csv_path = write_rows(path, ["index", "ess", "clamped"], rows)
    return [csv_path, write_json(Path(path).with_suffix(".json"), report.summary())]


def write_qq(result: QQResult, path: PathLike) -> Path:
    rows = zip(map(float, result.theoretical), map(float, result.empirical))
    return write_rows(path, ["normal_quantile", "empirical_quantile"], rows)
