import math

import numpy as np
import pytest
from scipy import integrate

from basis import (
    BasisContext,
    coefficient_count,
    dependency_graph,
    expand,
    expand_grid,
    index_to_pair,
    overlaps,
    pair_to_index,
    phi,
)
from schemas import DomainError, DyadicIndex


@pytest.fixture
def ctx() -> BasisContext:
    return BasisContext(levels=3, T=2.0, u=-0.5, v=1.5)


def test_index_maps():
    assert index_to_pair(1) == DyadicIndex(i=0, j=0)
    assert index_to_pair(5) == DyadicIndex(i=2, j=1)
    assert pair_to_index(3, 7) == 15
    for n in range(1, coefficient_count(5) + 1):
        pair = index_to_pair(n)
        assert pair_to_index(pair.i, pair.j) == n


@pytest.mark.parametrize("bad", [0, -3, 1.5, True])
def test_index_to_pair_rejects_invalid(bad):
    with pytest.raises(DomainError):
        index_to_pair(bad)


def test_index_to_pair_respects_count():
    with pytest.raises(DomainError):
        index_to_pair(16, count=coefficient_count(3))


def test_dyadic_index_position_bound():
    with pytest.raises(ValueError):
        DyadicIndex(i=2, j=4)


def test_phi_values():
    T = 3.0
    ctx = BasisContext(levels=4, T=T)
    assert phi(ctx, 1, T / 2) == pytest.approx(math.sqrt(T) / 2, abs=1e-12)
    assert phi(ctx, 1, 0.0) == 0.0
    assert phi(ctx, (1, 0), T / 4) == pytest.approx(math.sqrt(T) / (2 * math.sqrt(2)), abs=1e-12)


def test_phi_outside_interval_is_rejected(ctx: BasisContext):
    with pytest.raises(DomainError):
        phi(ctx, 1, ctx.T + 0.1)
    with pytest.raises(DomainError):
        phi(ctx, 16, 0.5)


def test_peaks_at_support_midpoints():
    ctx = BasisContext(levels=5, T=4.0)
    t = np.linspace(0.0, ctx.T, 2**12 + 1)
    for p in range(ctx.M):
        values = ctx.hat(p, t)
        assert values.max() == pytest.approx(2.0 ** (-ctx.level[p] / 2) * math.sqrt(ctx.T) / 2, abs=1e-12)
        assert t[np.argmax(values)] == pytest.approx(ctx.mid[p])


def test_expand_endpoints_and_single_hat():
    rng = np.random.default_rng(3)
    ctx = BasisContext(levels=4, T=5.0, u=1.2, v=-0.7)
    for xi in rng.standard_normal((100, ctx.M)) * 10.0:
        assert expand(ctx, xi, 0.0) == pytest.approx(1.2, abs=1e-12)
        assert expand(ctx, xi, 5.0) == pytest.approx(-0.7, abs=1e-12)

    zero = BasisContext(levels=0, T=1.0)
    assert expand(zero, np.array([1.0]), 0.5) == pytest.approx(0.5)
    assert expand(zero, np.zeros(1), 0.3) == 0.0


def test_expand_grid_matches_direct_sum(ctx: BasisContext):
    rng = np.random.default_rng(11)
    xi = rng.standard_normal(ctx.M)
    grid = expand_grid(ctx, xi)
    assert grid.shape == (2 ** (ctx.levels + 1) + 1,)
    assert grid[0] == ctx.u and grid[-1] == ctx.v
    direct = [ctx.baseline(t) + np.sum(xi * ctx.hat(np.arange(ctx.M), t)) for t in ctx.grid]
    np.testing.assert_allclose(grid, direct, atol=1e-12)


def test_expand_grid_with_sample_axis(ctx: BasisContext):
    rng = np.random.default_rng(2)
    xi = rng.standard_normal((4, ctx.M))
    grid = ctx.expand_grid(xi)
    assert grid.shape == (4, ctx.grid.size)
    np.testing.assert_allclose(grid[2], ctx.expand_grid(xi[2]))
    np.testing.assert_allclose(ctx.expand_many(xi, 0.7), [ctx.expand(row, 0.7) for row in xi], atol=1e-12)


def test_overlaps_against_quadrature(ctx: BasisContext):
    T = ctx.T
    root = overlaps(ctx, 1)
    assert root.phi_integral == pytest.approx(T * math.sqrt(T) / 4)
    assert root.gram[1] == pytest.approx(T**2 / 12)

    for n in (1, 3, 6, 13):
        info = overlaps(ctx, n)
        p = n - 1
        lo, hi = ctx.left[p], ctx.right[p]
        pinned = integrate.quad(lambda t: t / math.sqrt(T) * ctx.hat(p, t), lo, hi, points=[ctx.mid[p]])[0]
        start = integrate.quad(lambda t: (1 - t / T) * ctx.hat(p, t), lo, hi, points=[ctx.mid[p]])[0]
        assert info.pinned_integral == pytest.approx(pinned, abs=1e-10)
        assert info.start_integral == pytest.approx(start, abs=1e-10)
        for m, value in info.gram.items():
            q = m - 1
            breaks = sorted(b for b in {ctx.left[q], ctx.mid[q], ctx.right[q], ctx.mid[p]} if lo < b < hi)
            oracle = integrate.quad(lambda t: ctx.hat(p, t) * ctx.hat(q, t), lo, hi, points=breaks, limit=200)[0]
            assert value == pytest.approx(oracle, abs=1e-10)


def test_disjoint_supports_have_no_gram_entry(ctx: BasisContext):
    # (1,0) and (1,1) have disjoint interiors
    assert 3 not in overlaps(ctx, 2).gram


@pytest.mark.parametrize("levels", range(1, 9))
def test_neighbourhood_sizes(levels):
    graph = dependency_graph(BasisContext(levels=levels, T=1.0))
    for n, nb in graph.neighbors.items():
        i = n.bit_length() - 1
        assert len(nb) == 2 ** (levels - i + 1) + i - 1
        for m in nb:
            assert graph.is_edge(n, m) and graph.is_edge(m, n)


def test_neighbourhood_examples():
    graph = BasisContext(levels=3, T=1.0).dependency_graph()
    assert len(graph.neighbors[1]) == 15
    assert graph.neighbors[pair_to_index(3, 0)] == (1, 2, 4, 8)
    assert len(BasisContext(levels=6, T=1.0).neighbors[0]) == 127


def test_perfect_elimination_order_is_chordal():
    graph = BasisContext(levels=4, T=1.0).dependency_graph()
    order = graph.perfect_elimination_order()
    rank = {n: r for r, n in enumerate(order)}
    for n in order:
        later = [m for m in graph.neighbors[n] if rank[m] > rank[n]]
        for a in later:
            for b in later:
                assert a == b or graph.is_edge(a, b)


def test_common_ancestors():
    graph = BasisContext(levels=3, T=1.0).dependency_graph()
    assert graph.common_ancestors(8, 11) == (1, 2)
    assert graph.common_ancestors(8, 9) == (1, 2, 4)


def test_ancestors_and_descendants_are_positions():
    ctx = BasisContext(levels=3, T=1.0)
    np.testing.assert_array_equal(ctx.ancestors(8), [0, 1, 3, 7])
    np.testing.assert_array_equal(ctx.descendants((1, 1)), [2, 5, 6, 11, 12, 13, 14])
    graph = ctx.dependency_graph()
    for n in range(1, ctx.M + 1):
        assert graph.ancestors[n] == tuple(int(q) + 1 for q in ctx.ancestors(n))
        assert graph.descendants[n] == tuple(int(q) + 1 for q in ctx.descendants(n))
        assert set(graph.neighbors[n]) == set(graph.ancestors[n]) | set(graph.descendants[n])


def test_chain_has_one_index_per_level(ctx: BasisContext):
    for s in np.linspace(0.0, ctx.T, 37):
        chain = ctx.chain(s)
        assert chain.shape == (ctx.levels + 1,)
        assert list(ctx.level[chain]) == list(range(ctx.levels + 1))
        assert np.all(ctx.left[chain] <= s) and np.all(s <= ctx.right[chain])


def test_support_grid_covers_support(ctx: BasisContext):
    s, values = ctx.support_grid(1)
    assert s[0] == ctx.left[1] and s[-1] == pytest.approx(ctx.right[1])
    assert values.shape == (s.size, ctx.neighbors[1].size)
