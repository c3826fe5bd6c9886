from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from schemas import DomainError

from .models import BasisSpec, DependencyGraph, OverlapSet
from .utils import IndexLike, as_single_index, coefficient_count, simpson_product


logger = logging.getLogger(__name__)

# Tolerance for times that land a rounding error outside [0, T].
_TIME_SLACK = 1e-12


class BasisContext:
    """Truncated Faber-Schauder basis on [0, T] pinned at u (t=0) and v (t=T).

    Coefficients are stored by single index n = 1..M at array position n - 1.
    Everything derived from (N, T) is computed once here; the context is
    read-only afterwards and can be shared between concurrent runs.
    """

    def __init__(self, levels: int, T: float, u: float = 0.0, v: float = 0.0) -> None:
        spec = BasisSpec(levels=levels, T=T, u=u, v=v)
        self.spec = spec
        self.levels = spec.levels
        self.T = spec.T
        self.u = spec.u
        self.v = spec.v
        self.M = coefficient_count(self.levels)
        self.sqrt_T = math.sqrt(self.T)

        n = np.arange(1, self.M + 1, dtype=np.int64)
        self.level = np.array([int(k).bit_length() - 1 for k in n], dtype=np.int64)
        self.position = n - 2**self.level
        self.width = self.T / 2.0**self.level
        self.left = self.position * self.width
        self.right = self.left + self.width
        self.mid = self.left + 0.5 * self.width
        self.half = 0.5 * self.width
        self.peak = 2.0 ** (-self.level / 2.0) * self.sqrt_T / 2.0

        self.grid_step = self.T / 2 ** (self.levels + 1)
        self.grid = np.linspace(0.0, self.T, 2 ** (self.levels + 1) + 1)

        self._ancestors = [self._walk_ancestors(p) for p in range(self.M)]
        self._descendants = [self._range_descendants(p) for p in range(self.M)]
        self.neighbors: List[np.ndarray] = [
            np.union1d(self._ancestors[p], self._descendants[p]) for p in range(self.M)
        ]

        self.phi_integral = self.peak * self.width / 2.0
        self.start_integral = np.array([self._simpson_with(p, self._start_term) for p in range(self.M)])
        self.pinned_integral = np.array([self._simpson_with(p, self._pinned_term) for p in range(self.M)])
        self.gram: List[np.ndarray] = [self._gram_row(p) for p in range(self.M)]

        self._support_grids: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        self._grid_basis: Optional[np.ndarray] = None
        self._extended: Dict[int, np.ndarray] = {}

        logger.debug("BasisContext N=%d T=%g M=%d ready", self.levels, self.T, self.M)

    # ------------------------------------------------------------------
    # Hat functions
    # ------------------------------------------------------------------

    def hat(self, p: Union[int, np.ndarray], t: Union[float, np.ndarray]) -> np.ndarray:
        """phi at array positions p (0-based) and times t, broadcast together."""

        dist = np.abs(np.asarray(t, dtype=float) - self.mid[p]) / self.half[p]
        return self.peak[p] * np.maximum(0.0, 1.0 - dist)

    def _start_term(self, t: np.ndarray) -> np.ndarray:
        return 1.0 - t / self.T

    def _pinned_term(self, t: np.ndarray) -> np.ndarray:
        return t / self.sqrt_T

    def baseline(self, t: Union[float, np.ndarray]) -> np.ndarray:
        """Pinned part (1 - t/T) u + phi_bar(t) v / sqrt(T) of the expansion."""

        t = np.asarray(t, dtype=float)
        return (1.0 - t / self.T) * self.u + (t / self.sqrt_T) * (self.v / self.sqrt_T)

    def check_time(self, t: float) -> float:
        if not np.isfinite(t) or t < -_TIME_SLACK * self.T or t > self.T * (1.0 + _TIME_SLACK):
            raise DomainError(f"time {t} outside [0, {self.T}]")
        return min(max(float(t), 0.0), self.T)

    def index(self, k: IndexLike) -> int:
        """Array position (0-based) of an index given as n, DyadicIndex or (i, j)."""

        return as_single_index(k, self.M) - 1

    def phi(self, k: IndexLike, t: float) -> float:
        p = self.index(k)
        return float(self.hat(p, self.check_time(t)))

    def chain(self, s: Union[float, np.ndarray]) -> np.ndarray:
        """Positions of the basis functions whose support contains s, one per level.

        Returns an integer array of shape s.shape + (N + 1,).
        """

        s = np.asarray(s, dtype=float)
        lv = np.arange(self.levels + 1)
        scaled = s[..., None] * (2.0**lv) / self.T
        j = np.clip(np.floor(scaled).astype(np.int64), 0, 2**lv - 1)
        return 2**lv + j - 1

    # ------------------------------------------------------------------
    # Expansion
    # ------------------------------------------------------------------

    def expand(self, xi: np.ndarray, t: float) -> float:
        t = self.check_time(t)
        xi = self._check_coefficients(xi)
        chain = self.chain(t)
        return float(self.baseline(t) + np.dot(xi[chain], self.hat(chain, t)))

    def expand_many(self, xi: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Expansion at an array of times; xi may carry leading sample axes."""

        t = np.asarray(t, dtype=float)
        chain = self.chain(t)
        values = self.hat(chain, t[..., None])
        xi = np.asarray(xi, dtype=float)
        return self.baseline(t) + np.sum(xi[..., chain] * values, axis=-1)

    def expand_grid(self, xi: np.ndarray) -> np.ndarray:
        """Path values on the dyadic grid t_m = m T / 2^{N+1}.

        Built by midpoint refinement: each level adds its coefficients times
        the level peak at the new midpoints, O(M) overall. Leading axes of
        `xi` are treated as samples.
        """

        xi = np.asarray(xi, dtype=float)
        if xi.shape[-1] != self.M:
            raise DomainError(f"expected {self.M} coefficients, got {xi.shape[-1]}")
        lead = xi.shape[:-1]
        values = np.empty(lead + (2,))
        values[..., 0] = self.u
        values[..., 1] = self.v
        for i in range(self.levels + 1):
            coef = xi[..., 2**i - 1 : 2 ** (i + 1) - 1]
            mids = 0.5 * (values[..., :-1] + values[..., 1:]) + coef * self.peak[2**i - 1]
            refined = np.empty(lead + (2 * values.shape[-1] - 1,))
            refined[..., 0::2] = values
            refined[..., 1::2] = mids
            values = refined
        return values

    def grid_basis(self) -> np.ndarray:
        """Dense matrix B[p, m] = phi_p(t_m) over the dyadic grid."""

        if self._grid_basis is None:
            self._grid_basis = self.hat(np.arange(self.M)[:, None], self.grid[None, :])
        return self._grid_basis

    def _check_coefficients(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.M,):
            raise DomainError(f"expected coefficient vector of length {self.M}, got shape {xi.shape}")
        return xi

    # ------------------------------------------------------------------
    # Overlap integrals
    # ------------------------------------------------------------------

    def _halves(self, p: int) -> np.ndarray:
        return np.array([self.left[p], self.mid[p], self.right[p]])

    def _simpson_with(self, p: int, f) -> float:
        return simpson_product(f, lambda t: self.hat(p, t), self._halves(p))

    def _gram_row(self, p: int) -> np.ndarray:
        row = np.empty(len(self.neighbors[p]))
        for idx, q in enumerate(self.neighbors[p]):
            # the finer of the two supports lies inside the coarser one and
            # both hats are linear on each of its halves
            finer, coarser = (p, q) if self.level[p] >= self.level[q] else (q, p)
            row[idx] = simpson_product(
                lambda t: self.hat(coarser, t), lambda t: self.hat(finer, t), self._halves(finer)
            )
        return row

    def overlaps(self, k: IndexLike) -> OverlapSet:
        p = self.index(k)
        return OverlapSet(
            index=p + 1,
            phi_integral=float(self.phi_integral[p]),
            pinned_integral=float(self.pinned_integral[p]),
            start_integral=float(self.start_integral[p]),
            gram={int(q) + 1: float(g) for q, g in zip(self.neighbors[p], self.gram[p])},
        )

    # ------------------------------------------------------------------
    # Dependency structure
    # ------------------------------------------------------------------

    def _walk_ancestors(self, p: int) -> np.ndarray:
        out = []
        n = p + 1
        while n >= 1:
            out.append(n - 1)
            n //= 2
        return np.array(sorted(out), dtype=np.int64)

    def _range_descendants(self, p: int) -> np.ndarray:
        n = p + 1
        i = int(self.level[p])
        blocks = [
            np.arange(n * 2 ** (lv - i), (n + 1) * 2 ** (lv - i), dtype=np.int64) - 1
            for lv in range(i, self.levels + 1)
        ]
        return np.concatenate(blocks)

    def ancestors(self, k: IndexLike) -> np.ndarray:
        return self._ancestors[self.index(k)]

    def descendants(self, k: IndexLike) -> np.ndarray:
        return self._descendants[self.index(k)]

    def extended_neighbors(self, p: int) -> np.ndarray:
        """Union of N_j over j in N_p (positions needed to redraw every neighbour's bound)."""

        cached = self._extended.get(p)
        if cached is None:
            cached = np.unique(np.concatenate([self.neighbors[q] for q in self.neighbors[p]]))
            self._extended[p] = cached
        return cached

    def dependency_graph(self) -> DependencyGraph:
        def as_tuple(arr: np.ndarray) -> Tuple[int, ...]:
            return tuple(int(q) + 1 for q in arr)

        return DependencyGraph(
            levels=self.levels,
            ancestors={p + 1: as_tuple(self._ancestors[p]) for p in range(self.M)},
            descendants={p + 1: as_tuple(self._descendants[p]) for p in range(self.M)},
            neighbors={p + 1: as_tuple(self.neighbors[p]) for p in range(self.M)},
        )

    def support_grid(self, p: int) -> Tuple[np.ndarray, np.ndarray]:
        """Finest-grid breakpoints of S_p and the values phi_q(s) for q in N_p.

        Any path or velocity field built from N_p is linear between these
        breakpoints, so its extrema over S_p are attained on them.
        """

        cached = self._support_grids.get(p)
        if cached is None:
            count = 2 ** (self.levels + 1 - int(self.level[p]))
            s = self.left[p] + self.grid_step * np.arange(count + 1)
            values = self.hat(self.neighbors[p][None, :], s[:, None])
            cached = (s, values)
            self._support_grids[p] = cached
        return cached

    def __repr__(self) -> str:
        return f"BasisContext(levels={self.levels}, T={self.T}, u={self.u}, v={self.v})"
