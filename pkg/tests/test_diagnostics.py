import json
import math

import numpy as np
import pytest
from scipy import stats

from bridges import LinearModel
from diagnostics import (
    EulerOracleConfig,
    ess_batch_means,
    ess_report,
    euler_eball,
    gaussian_bridge_marginal,
    ks_statistic,
    mala_baseline,
    qq_data,
    write_ess_report,
    write_qq,
)
from schemas import DomainError, OracleError


class _Gaussian:
    def __init__(self, precision):
        self.precision = np.asarray(precision, dtype=float)

    def energy(self, xi):
        return 0.5 * float(xi @ self.precision @ xi)

    def gradient(self, xi):
        return self.precision @ xi


def _ar1(rng: np.random.Generator, n: int, rho: float) -> np.ndarray:
    noise = rng.standard_normal(n) * math.sqrt(1 - rho**2)
    x = np.empty(n)
    x[0] = rng.standard_normal()
    for k in range(1, n):
        x[k] = rho * x[k - 1] + noise[k]
    return x


def test_ess_of_independent_draws_is_the_length():
    n = 10_000
    estimates = [ess_batch_means(np.random.default_rng(seed).standard_normal(n)) for seed in range(20)]
    assert np.mean(estimates) == pytest.approx(n, rel=0.2)


def test_ess_of_ar1_chain():
    n = 40_000
    ratios = [ess_batch_means(_ar1(np.random.default_rng(seed), n, 0.5)) / n for seed in range(10)]
    assert np.mean(ratios) == pytest.approx(1 / 3, rel=0.25)


def test_ess_is_affine_invariant():
    x = _ar1(np.random.default_rng(30), 5_000, 0.3)
    assert ess_batch_means(3.5 * x - 12.0) == pytest.approx(ess_batch_means(x), rel=1e-9)


def test_ess_batch_rules():
    with pytest.raises(DomainError):
        ess_batch_means(np.arange(3.0))
    with pytest.raises(DomainError):
        ess_batch_means(np.arange(3.0), batches=2)
    with pytest.raises(DomainError):
        ess_batch_means(np.ones(400))
    # remainder beyond 20 batches of 5 is dropped
    x = np.random.default_rng(31).standard_normal(103)
    assert ess_batch_means(x, batches=20) == pytest.approx(ess_batch_means(x[:100], batches=20))


def test_ess_report_clamps_antithetic_coordinates():
    rng = np.random.default_rng(32)
    n = 10_000
    alternating = np.where(np.arange(n) % 2 == 0, 1.0, -1.0) + 1e-3 * rng.standard_normal(n)
    report = ess_report(np.column_stack([alternating, _ar1(rng, n, 0.5)]), wall_time=2.0)
    assert report.batches == 100
    assert report.clamped == [1]
    assert report.per_coordinate[0] == n
    assert report.per_coordinate[1] < n
    assert report.per_second(report.min) == pytest.approx(report.min / 2.0)
    assert ess_report(rng.standard_normal(400)).per_second(1.0) is None


def test_euler_oracle_without_drift_gives_brownian_marginals():
    cfg = EulerOracleConfig(dt=0.01, epsilon=1e6, paths=5000, batch=1000, seed=0)
    result = euler_eball(LinearModel(), 0.5, 0.0, 1.0, cfg)
    assert result.accepted == 5000
    assert result.acceptance_rate == 1.0
    assert result.times[-1] == pytest.approx(1.0)
    assert ks_statistic(result.marginal(1.0), stats.norm(0.5, 1.0)) < 0.03


def test_euler_oracle_conditions_on_the_endpoint():
    cfg = EulerOracleConfig(dt=0.01, epsilon=0.05, paths=2000, batch=5000, seed=1, stride=10)
    result = euler_eball(LinearModel(), 0.0, 0.0, 1.0, cfg)
    assert result.times.size == 11
    assert np.all(np.abs(result.paths[:, -1]) <= 0.05)
    mean, var = gaussian_bridge_marginal(LinearModel(), 0.0, 0.0, 1.0, 0.5)
    assert ks_statistic(result.marginal(0.5), stats.norm(mean, math.sqrt(var))) < 0.06


def test_euler_oracle_is_independent_of_worker_count():
    base = dict(dt=0.05, epsilon=0.2, paths=300, batch=500, seed=7)
    one = euler_eball(LinearModel(beta=-1.0), 0.0, 0.5, 2.0, EulerOracleConfig(**base))
    many = euler_eball(LinearModel(beta=-1.0), 0.0, 0.5, 2.0, EulerOracleConfig(workers=3, **base))
    assert one.attempts == many.attempts
    np.testing.assert_array_equal(one.paths, many.paths)


def test_euler_oracle_errors():
    with pytest.raises(OracleError) as excinfo:
        euler_eball(LinearModel(), 0.0, 5.0, 1.0, EulerOracleConfig(dt=0.1, epsilon=1e-12, max_attempts=100, batch=50))
    assert excinfo.value.attempts == 100
    with pytest.raises(DomainError):
        euler_eball(LinearModel(), 0.0, 0.0, 1.0, EulerOracleConfig(dt=0.3, epsilon=0.1))
    with pytest.raises(DomainError):
        euler_eball(LinearModel(), 0.0, None, 1.0, EulerOracleConfig(dt=0.1, epsilon=0.1))


def test_brownian_bridge_marginal():
    assert gaussian_bridge_marginal(LinearModel(), 0.0, 0.0, 1.0, 0.5) == pytest.approx((0.0, 0.25))
    mean, var = gaussian_bridge_marginal(LinearModel(), 1.0, 3.0, 4.0, 1.0)
    assert mean == pytest.approx(1.5)
    assert var == pytest.approx(0.75)


@pytest.mark.parametrize("beta", [1e-8, -1e-8])
def test_bridge_marginal_is_continuous_at_zero_beta(beta):
    u, v, T = 0.3, -1.1, 3.0
    for t in (0.2, 1.5, 2.9):
        mean, var = gaussian_bridge_marginal(LinearModel(alpha=0.5, beta=beta), u, v, T, t)
        assert abs(mean - (u + (v - u) * t / T)) < 1e-6
        assert abs(var - t * (T - t) / T) < 1e-6

@pytest.mark.parametrize("beta", [-1.0, 0.7])
def test_ou_bridge_variance(beta):
    T, t = 2.0, 0.7
    _, var = gaussian_bridge_marginal(LinearModel(alpha=0.0, beta=beta), 0.0, 0.0, T, t)
    expected = math.sinh(beta * t) * math.sinh(beta * (T - t)) / (beta * math.sinh(beta * T))
    assert var == pytest.approx(expected, rel=1e-10)


def test_bridge_marginal_rejects_endpoints():
    for t in (0.0, 1.0, 1.5):
        with pytest.raises(DomainError):
            gaussian_bridge_marginal(LinearModel(), 0.0, 0.0, 1.0, t)


def test_ks_statistic():
    rng = np.random.default_rng(33)
    x = rng.standard_normal(5000)
    assert ks_statistic(x, x) == 0.0
    assert ks_statistic(x, x + 100.0) == 1.0
    assert ks_statistic(x, stats.norm()) < 0.03
    assert ks_statistic(x, stats.norm.cdf) == ks_statistic(x, stats.norm())
    y = rng.standard_normal(3000) * 1.2 + 0.1
    assert ks_statistic(x, y) == pytest.approx(ks_statistic(y, x), abs=1e-12)
    assert ks_statistic(x[:700], y) == pytest.approx(ks_statistic(y, x[:700]), abs=1e-12)
    with pytest.raises(DomainError):
        ks_statistic(np.array([]), x)
    with pytest.raises(DomainError):
        ks_statistic(x, np.array([]))


def test_qq_data():
    n = 500
    exact = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    result = qq_data(np.random.default_rng(34).permutation(exact))
    assert result.correlation == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(result.empirical, result.theoretical)

    heavy = stats.t(2).rvs(2000, random_state=np.random.default_rng(35))
    assert qq_data(heavy).correlation < 0.99
    with pytest.raises(DomainError):
        qq_data(np.zeros(99))
    with pytest.raises(DomainError):
        qq_data(np.ones(200))


def test_mala_on_a_gaussian():
    precision = np.diag([1.0, 4.0, 0.25])
    result = mala_baseline(_Gaussian(precision), np.zeros(3), 20_000, seed=36)
    assert result.warmup == 4000
    assert 0.45 <= result.acceptance_rate <= 0.75
    kept = result.chain[result.warmup:]
    np.testing.assert_allclose(kept.var(axis=0), [1.0, 0.25, 4.0], rtol=0.25)
    np.testing.assert_allclose(kept.mean(axis=0), 0.0, atol=0.3)


def test_mala_is_reproducible_and_validates():
    target = _Gaussian(np.eye(2))
    first = mala_baseline(target, np.ones(2), 500, seed=37)
    second = mala_baseline(target, np.ones(2), 500, seed=37)
    np.testing.assert_array_equal(first.chain, second.chain)

    empty = mala_baseline(target, np.zeros(2), 0)
    assert empty.chain.shape == (0, 2)
    assert empty.acceptance_rate == 0.0
    with pytest.raises(DomainError):
        mala_baseline(target, np.zeros(2), -1)
    with pytest.raises(DomainError):
        mala_baseline(target, np.zeros(2), 10, step=0.0)


def test_report_writers(tmp_path):
    rng = np.random.default_rng(38)
    report = ess_report(rng.standard_normal((400, 3)), wall_time=1.5)
    csv_path, json_path = write_ess_report(report, tmp_path / "out" / "ess.csv")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "index,ess,clamped"
    assert len(lines) == 4
    summary = json.loads(json_path.read_text())
    assert summary["samples"] == 400
    assert summary["median_ess"] == pytest.approx(report.median)

    qq_path = write_qq(qq_data(rng.standard_normal(150)), tmp_path / "qq.csv")
    assert qq_path.read_text().splitlines()[0] == "normal_quantile,empirical_quantile"
