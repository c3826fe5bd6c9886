from __future__ import annotations

from typing import List, Optional

import numpy as np


class RunStreams:
    """Named random substreams of one sampler run.

    Exponential deviates, subsample draws and thinning uniforms each come
    from their own child of a single SeedSequence, so two algorithm variants
    run under the same seed consume identical deviates for identical draws.
    """

    def __init__(self, seed: Optional[int] = None, *, cell: Optional[int] = None) -> None:
        self.seed = seed
        self.cell = cell
        spawn_key = () if cell is None else (int(cell),)
        self._sequence = np.random.SeedSequence(seed, spawn_key=spawn_key)
        exponential, subsample, uniform = self._sequence.spawn(3)
        self.exponential = np.random.default_rng(exponential)
        self.subsample = np.random.default_rng(subsample)
        self.uniform = np.random.default_rng(uniform)

    def deviate(self) -> float:
        return float(self.exponential.standard_exponential())

    def spawn(self, count: int) -> List["RunStreams"]:
        """Independent streams for `count` replicate runs under the same seed."""

        return [RunStreams(self.seed, cell=k) for k in range(count)]

    def __repr__(self) -> str:
        return f"RunStreams(seed={self.seed}, cell={self.cell})"
