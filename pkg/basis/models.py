from __future__ import annotations

from typing import Dict, List, Tuple

from pydantic import BaseModel, Field


class BasisSpec(BaseModel):
    """Parameters that fix a truncated Faber-Schauder expansion of a bridge."""

    levels: int = Field(ge=0, le=20)
    T: float = Field(gt=0.0)
    u: float = 0.0
    v: float = 0.0


class OverlapSet(BaseModel):
    """Exact integrals attached to one basis function phi_k.

    phi_integral:   integral of phi_k
    pinned_integral: integral of phi_bar * phi_k, phi_bar(t) = t / sqrt(T)
    start_integral: integral of (1 - t/T) * phi_k
    gram:           integral of phi_j * phi_k for every j in N_k, keyed by n
    """

    index: int
    phi_integral: float
    pinned_integral: float
    start_integral: float
    gram: Dict[int, float] = Field(default_factory=dict)


class DependencyGraph(BaseModel):
    """Ancestor/descendant structure of the coefficients, keyed by single index.

    Every index is its own ancestor and descendant; `neighbors[k]` is N_k.
    """

    levels: int
    ancestors: Dict[int, Tuple[int, ...]]
    descendants: Dict[int, Tuple[int, ...]]
    neighbors: Dict[int, Tuple[int, ...]]

    def common_ancestors(self, h: int, k: int) -> Tuple[int, ...]:
        return tuple(sorted(set(self.ancestors[h]) & set(self.ancestors[k])))

    def is_edge(self, h: int, k: int) -> bool:
        return h in self.neighbors[k]

    def perfect_elimination_order(self) -> List[int]:
        """Finest level first; the later neighbours of each vertex are its ancestors."""

        return sorted(self.neighbors, key=lambda n: (-(n.bit_length() - 1), n))
