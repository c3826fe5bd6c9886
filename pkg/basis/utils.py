from __future__ import annotations

from typing import Callable, Optional, Tuple, Union

import numpy as np

from schemas import DomainError, DyadicIndex


IndexLike = Union[int, DyadicIndex, Tuple[int, int]]


def coefficient_count(levels: int) -> int:
    """Number of coefficients M = 2^{N+1} - 1 for truncation level N."""

    if levels < 0:
        raise DomainError(f"truncation level must be >= 0, got {levels}")
    return 2 ** (levels + 1) - 1


def index_to_pair(n: int, count: Optional[int] = None) -> DyadicIndex:
    """Map a single index n >= 1 to its (level, position) pair.

    When `count` is given, n must also satisfy n <= count.
    """

    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError(f"single index must be an integer, got {n!r}")
    n = int(n)
    if n < 1 or (count is not None and n > count):
        raise DomainError(f"single index {n} outside [1, {count if count is not None else 'inf'}]")
    return DyadicIndex.from_index(n)


def pair_to_index(i: int, j: int) -> int:
    """Inverse of index_to_pair: n = 2^i + j."""

    if i < 0 or j < 0 or j >= 2**i:
        raise DomainError(f"invalid dyadic pair (i={i}, j={j})")
    return 2**i + j


def as_single_index(k: IndexLike, count: Optional[int] = None) -> int:
    """Normalize an index given as n, DyadicIndex or (i, j) to n."""

    if isinstance(k, DyadicIndex):
        n = k.n
    elif isinstance(k, tuple):
        n = pair_to_index(*k)
    else:
        n = index_to_pair(k).n
    if count is not None and n > count:
        raise DomainError(f"index {n} outside [1, {count}]")
    return n


def simpson_product(
    f: Callable[[np.ndarray], np.ndarray],
    g: Callable[[np.ndarray], np.ndarray],
    breakpoints: np.ndarray,
) -> float:
    """Integral of f*g over consecutive breakpoints with Simpson's rule.

    Exact when f and g are both linear on every piece.
    """

    a = breakpoints[:-1]
    b = breakpoints[1:]
    m = 0.5 * (a + b)
    pieces = (b - a) / 6.0 * (f(a) * g(a) + 4.0 * f(m) * g(m) + f(b) * g(b))
    return float(np.sum(pieces))
