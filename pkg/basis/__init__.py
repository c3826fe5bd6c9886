# Faber-Schauder basis: evaluation, bridge expansion, overlaps, dependency graph
from __future__ import annotations

import numpy as np

from .context import BasisContext
from .models import BasisSpec, DependencyGraph, OverlapSet
from .utils import IndexLike, coefficient_count, index_to_pair, pair_to_index


def phi(ctx: BasisContext, k: IndexLike, t: float) -> float:
    return ctx.phi(k, t)


def expand(ctx: BasisContext, xi: np.ndarray, t: float) -> float:
    return ctx.expand(xi, t)


def expand_grid(ctx: BasisContext, xi: np.ndarray) -> np.ndarray:
    return ctx.expand_grid(xi)


def overlaps(ctx: BasisContext, k: IndexLike) -> OverlapSet:
    return ctx.overlaps(k)


def dependency_graph(ctx: BasisContext) -> DependencyGraph:
    return ctx.dependency_graph()


__all__ = [
    "BasisContext",
    "BasisSpec",
    "DependencyGraph",
    "OverlapSet",
    "coefficient_count",
    "dependency_graph",
    "expand",
    "expand_grid",
    "index_to_pair",
    "overlaps",
    "pair_to_index",
    "phi",
]
