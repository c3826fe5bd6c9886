import math

import numpy as np
import pytest
from scipy import stats

from basis import BasisContext
from bridges import (
    EstimatorConfig,
    EstimatorVariant,
    LinearBridge,
    LinearModel,
    LogisticBridge,
    LogisticModel,
    SineBridge,
    SineModel,
    gradient_estimate,
    grid_energy,
    grid_gradient,
    lamperti,
    linear_rate,
    logistic_bound,
    make_target,
    partial_energy,
    sine_bound,
    sine_bound_constant,
    velocities,
)
from bridges.utils import logistic_envelope_at
from diagnostics import EulerOracleConfig, ess_batch_means, euler_eball, gaussian_bridge_marginal, ks_statistic, qq_data
from samplers import RunStreams, discretize, zigzag_fully_local, zigzag_local, zigzag_subsampled
from schemas import DomainError


@pytest.fixture
def logistic() -> LogisticModel:
    return LogisticModel(r=0.08, K=2000.0, beta=0.1)


def _logistic_ctx(model: LogisticModel, levels: int = 3) -> BasisContext:
    return BasisContext(levels, 200.0, lamperti(model, 50.0), lamperti(model, 1000.0))


def _states(ctx: BasisContext, rng: np.random.Generator):
    xi = rng.standard_normal(ctx.M)
    theta = rng.choice([-1.0, 1.0], ctx.M)
    return xi, theta


def test_lamperti_constants(logistic: LogisticModel):
    assert logistic.c1 == pytest.approx(-0.75)
    assert logistic.c2 == pytest.approx(4e-4)
    assert lamperti(logistic, 1.0) == 0.0
    assert lamperti(logistic, 50.0) == pytest.approx(-math.log(50.0) / 0.1)
    assert logistic.inverse(lamperti(logistic, 50.0)) == pytest.approx(50.0)
    with pytest.raises(DomainError):
        lamperti(logistic, 0.0)


def test_logistic_drift_matches_the_transformed_sde(logistic: LogisticModel):
    # Ito on X = -log(Y)/beta for dY = r Y (1 - Y/K) dt + beta Y dW
    x = np.linspace(-70.0, -30.0, 9)
    y = logistic.inverse(x)
    expected = -(logistic.r * (1 - y / logistic.K)) / logistic.beta + logistic.beta / 2
    np.testing.assert_allclose(logistic.drift(x), expected, rtol=1e-12)


def test_model_parameters_are_validated():
    with pytest.raises(ValueError):
        SineModel(alpha=-0.1)
    with pytest.raises(ValueError):
        LogisticModel(r=0.08, K=0.0, beta=0.1)


def test_brownian_bridge_rate_is_the_coordinate():
    ctx = BasisContext(3, 2.0)
    rng = np.random.default_rng(1)
    xi, theta = _states(ctx, rng)
    for n in (1, 4, 11):
        rate = linear_rate(ctx, LinearModel(), n, xi, theta)
        assert rate.a == pytest.approx(theta[n - 1] * xi[n - 1])
        assert rate.b == pytest.approx(1.0)


def test_linear_rate_matches_quadrature_along_the_trajectory():
    model = LinearModel(alpha=-5.0, beta=-1.0)
    ctx = BasisContext(3, 10.0, -1.0, 2.0)
    rng = np.random.default_rng(2)
    xi, theta = _states(ctx, rng)
    for n in (1, 2, 7, 15):
        rate = linear_rate(ctx, model, n, xi, theta)
        assert np.isfinite(rate.a) and np.isfinite(rate.b)
        for t in np.concatenate([[0.0], rng.uniform(0.0, 2.0, 4)]):
            exact = theta[n - 1] * partial_energy(ctx, model, n, xi + t * theta)
            assert rate.a + rate.b * t == pytest.approx(exact, rel=1e-8, abs=1e-8)


def test_sine_estimate_without_drift_is_the_coordinate():
    ctx = BasisContext(3, 4.0)
    xi = np.random.default_rng(3).standard_normal(ctx.M)
    for U in (0.1, 1.7, 3.9):
        assert gradient_estimate(ctx, SineModel(alpha=0.0), 1, xi, U) == xi[0]


def test_estimate_outside_the_support_is_rejected():
    ctx = BasisContext(2, 4.0)
    with pytest.raises(DomainError):
        gradient_estimate(ctx, SineModel(alpha=0.7), 2, np.zeros(ctx.M), 3.0)


@pytest.mark.parametrize(
    "model, ctx",
    [
        (SineModel(alpha=0.7), BasisContext(2, 4.0, 0.3, -0.2)),
        (LinearModel(alpha=-5.0, beta=-1.0), BasisContext(2, 10.0, -1.0, 2.0)),
        (
            LogisticModel(r=0.08, K=2000.0, beta=0.1),
            BasisContext(2, 20.0, lamperti(LogisticModel(r=0.08, K=2000.0, beta=0.1), 50.0),
                         lamperti(LogisticModel(r=0.08, K=2000.0, beta=0.1), 1000.0)),
        ),
    ],
)
def test_estimator_is_unbiased(model, ctx):
    xi = np.random.default_rng(4).standard_normal(ctx.M)
    v1 = EstimatorConfig(variant=EstimatorVariant.V1)
    for p in range(ctx.M):
        width = ctx.width[p]
        U = ctx.left[p] + width * (np.arange(10_000) + 0.5) / 10_000
        average = gradient_estimate(ctx, model, p + 1, xi, U, v1)
        assert average == pytest.approx(partial_energy(ctx, model, p + 1, xi), rel=1e-3, abs=1e-6)


def test_replicated_estimators_reduce_variance():
    ctx = BasisContext(3, 4.0)
    model = SineModel(alpha=0.7)
    xi = np.random.default_rng(5).standard_normal(ctx.M)
    rng = np.random.default_rng(6)
    oracle = partial_energy(ctx, model, 1, xi)
    spread = {}
    for variant in EstimatorVariant:
        target = SineBridge(ctx, model, EstimatorConfig(variant=variant))
        draws = np.array([target.estimate(0, xi, None, target.draw_subsample(0, rng)) for _ in range(4000)])
        assert draws.mean() == pytest.approx(oracle, abs=4 * draws.std() / math.sqrt(draws.size) + 1e-12)
        spread[variant] = draws.var()
    assert spread[EstimatorVariant.V2] <= spread[EstimatorVariant.V1] <= spread[EstimatorVariant.SINGLE]


def test_replication_counts():
    single = EstimatorConfig()
    v1 = EstimatorConfig(variant="v1")
    assert single.replication(8.0, 0.25) == 1
    assert v1.replication(8.0, 0.25) == 32
    assert v1.replication(1.0, 0.25) == 4
    assert EstimatorConfig(variant="v2", cap=8).replication(8.0, 0.25) == 8


def test_sine_bound_constant_scaling():
    model = SineModel(alpha=0.7)
    ctx = BasisContext(6, 50.0)
    assert sine_bound_constant(ctx, model, 1) == pytest.approx(math.sqrt(50) / 2 * 50 * (0.49 + 0.7) / 2)
    for i in range(6):
        ratio = sine_bound_constant(ctx, model, (i, 0)) / sine_bound_constant(ctx, model, (i + 1, 0))
        assert ratio == pytest.approx(2**1.5, rel=1e-12)
    constants = [sine_bound_constant(BasisContext(3, T), model, 5) for T in (1.0, 4.0, 16.0)]
    assert constants[1] / constants[0] == pytest.approx(8.0)
    assert constants[2] / constants[1] == pytest.approx(8.0)
    assert sine_bound_constant(ctx, SineModel(alpha=0.0), 3) == 0.0


def test_sine_bound_dominates_the_estimator():
    ctx = BasisContext(3, 8.0)
    target = SineBridge(ctx, SineModel(alpha=0.7))
    rng = np.random.default_rng(7)
    for _ in range(5000):
        xi, theta = _states(ctx, rng)
        p = int(rng.integers(ctx.M))
        dt = rng.uniform(0.0, 2.0)
        bound = target.bound(p, xi, theta).rate(dt)
        U = target.draw_subsample(p, rng)
        assert target.estimator_rate(p, xi + dt * theta, theta, U) <= bound * (1 + 1e-9) + 1e-12


def test_sine_bound_depends_on_its_coordinate_only():
    ctx = BasisContext(3, 8.0)
    xi, theta = _states(ctx, np.random.default_rng(8))
    bound = sine_bound(ctx, SineModel(alpha=0.7), 4, xi, theta)
    moved = xi.copy()
    moved[[0, 1, 8]] += 5.0
    assert sine_bound(ctx, SineModel(alpha=0.7), 4, moved, theta) == bound


def test_logistic_bound_components_follow_the_velocity_sign(logistic: LogisticModel):
    ctx = _logistic_ctx(logistic)
    xi = np.zeros(ctx.M)
    up = logistic_bound(ctx, logistic, 3, xi, np.ones(ctx.M))
    down = logistic_bound(ctx, logistic, 3, xi, -np.ones(ctx.M))
    assert up.components[2].rate(1.0) == 0.0
    assert up.components[1].rate(1.0) > 0.0
    assert down.components[1].rate(1.0) == 0.0
    assert down.components[2].rate(1.0) > 0.0


def test_logistic_envelope_matches_brute_force(logistic: LogisticModel):
    ctx = _logistic_ctx(logistic)
    rng = np.random.default_rng(9)
    for _ in range(20):
        xi, theta = _states(ctx, rng)
        for p in range(ctx.M):
            s = np.linspace(ctx.left[p], ctx.right[p], 10_001)
            path = ctx.expand_many(xi, s)
            velocity = ctx.expand_many(theta, s) - ctx.baseline(s)
            b1, b2 = logistic_envelope_at(ctx, p, xi, theta)
            assert b1 == pytest.approx(path.min(), abs=1e-9)
            assert b2 == pytest.approx(velocity.min(), abs=1e-9)


def test_logistic_bound_dominates_the_estimator(logistic: LogisticModel):
    ctx = _logistic_ctx(logistic, levels=6)
    target = LogisticBridge(ctx, logistic)
    rng = np.random.default_rng(10)
    for _ in range(3000):
        xi, theta = _states(ctx, rng)
        p = int(rng.integers(ctx.M))
        dt = rng.uniform(0.0, 2.0)
        bound = target.bound(p, xi, theta).rate(dt)
        U = target.draw_subsample(p, rng)
        assert target.estimator_rate(p, xi + dt * theta, theta, U) <= bound * (1 + 1e-9) + 1e-12


def test_linear_bound_dominates_the_estimator():
    ctx = BasisContext(3, 10.0, -1.0, 2.0)
    target = LinearBridge(ctx, LinearModel(alpha=-5.0, beta=-1.0))
    rng = np.random.default_rng(11)
    for _ in range(3000):
        xi, theta = _states(ctx, rng)
        p = int(rng.integers(ctx.M))
        dt = rng.uniform(0.0, 2.0)
        bound = target.bound(p, xi, theta).rate(dt)
        U = target.draw_subsample(p, rng)
        assert target.estimator_rate(p, xi + dt * theta, theta, U) <= bound * (1 + 1e-9) + 1e-12


def test_fine_levels_feel_the_drift_less():
    ctx = BasisContext(5, 8.0)
    model = SineModel(alpha=0.7)
    rng = np.random.default_rng(12)
    terms = np.array([grid_gradient(ctx, model, xi) - xi for xi in rng.standard_normal((20, ctx.M))])
    by_level = [np.abs(terms[:, ctx.level == i]).mean() for i in range(ctx.levels + 1)]
    assert all(a > b for a, b in zip(by_level, by_level[1:]))


def test_grid_gradient_is_the_gradient_of_grid_energy():
    ctx = BasisContext(3, 4.0, 0.5, -1.0)
    model = SineModel(alpha=0.7)
    xi = np.random.default_rng(13).standard_normal(ctx.M)
    gradient = grid_gradient(ctx, model, xi)
    h = 1e-6
    for p in (0, 3, 9):
        step = np.zeros(ctx.M)
        step[p] = h
        numeric = (grid_energy(ctx, model, xi + step) - grid_energy(ctx, model, xi - step)) / (2 * h)
        assert gradient[p] == pytest.approx(numeric, rel=1e-5, abs=1e-7)


def test_velocities_decay_per_level():
    ctx = BasisContext(3, 1.0)
    np.testing.assert_allclose(velocities(ctx), np.ones(ctx.M))
    np.testing.assert_allclose(velocities(ctx, 0.5)[[0, 1, 3, 7]], [1.0, 0.5, 0.25, 0.125])
    with pytest.raises(DomainError):
        velocities(ctx, 0.0)


def test_make_target_picks_the_provider():
    ctx = BasisContext(2, 1.0)
    assert isinstance(make_target(ctx, LinearModel()), LinearBridge)
    assert isinstance(make_target(ctx, SineModel(alpha=0.3)), SineBridge)
    assert isinstance(make_target(ctx, LogisticModel(r=0.1, K=10.0, beta=0.2)), LogisticBridge)
    assert list(make_target(ctx, SineModel(alpha=0.3)).bound_neighbors(4)) == [4]


def test_brownian_bridge_coefficients_are_standard_normal():
    ctx = BasisContext(3, 1.0)
    target = LinearBridge(ctx, LinearModel())
    result = zigzag_fully_local(target, 1000.0, np.zeros(ctx.M), streams=RunStreams(14))
    assert result.rejections == 0
    samples = discretize(result.skeleton, 10.0, 1.0)
    for j in range(ctx.M):
        assert stats.kstest(samples[:, j], "norm").statistic < 0.1
    assert np.abs(samples.mean(axis=0)).mean() < 0.1


def test_linear_bridge_midpoint_matches_the_exact_marginal():
    model = LinearModel(alpha=-5.0, beta=-1.0)
    ctx = BasisContext(3, 10.0, -1.0, 2.0)
    result = zigzag_local(LinearBridge(ctx, model), 1000.0, np.zeros(ctx.M), streams=RunStreams(15))
    samples = discretize(result.skeleton, 10.0, 1.0)
    midpoint = ctx.expand_many(samples, 5.0)
    mean, var = gaussian_bridge_marginal(model, -1.0, 2.0, 10.0, 5.0)
    assert stats.kstest(midpoint, stats.norm(mean, math.sqrt(var)).cdf).statistic < 0.1


def _means_and_errors(samples: np.ndarray):
    ess = np.array([min(ess_batch_means(samples[:, j]), samples.shape[0]) for j in range(samples.shape[1])])
    return samples.mean(axis=0), samples.std(axis=0) / np.sqrt(ess)


def test_exact_and_thinned_samplers_agree_on_the_linear_bridge():
    ctx = BasisContext(3, 4.0, 0.5, -1.0)
    target = LinearBridge(ctx, LinearModel(alpha=-1.0, beta=-0.5))
    runs = [
        sampler(target, 400.0, np.zeros(ctx.M), streams=RunStreams(seed))
        for sampler, seed in ((zigzag_local, 40), (zigzag_subsampled, 41), (zigzag_fully_local, 42))
    ]
    exact_mean, exact_se = _means_and_errors(discretize(runs[0].skeleton, 10.0, 0.5))
    for result in runs[1:]:
        assert result.max_ratio <= 1.0 + 1e-9
        mean, se = _means_and_errors(discretize(result.skeleton, 10.0, 0.5))
        z = np.abs(mean - exact_mean) / np.sqrt(se**2 + exact_se**2)
        assert z.max() < 4.0


@pytest.fixture(scope="module")
def sine_run():
    ctx = BasisContext(5, 8.0, 0.0, 0.0)
    model = SineModel(alpha=0.7)
    result = zigzag_fully_local(SineBridge(ctx, model), 1000.0, np.zeros(ctx.M), streams=RunStreams(43))
    return ctx, model, discretize(result.skeleton, 10.0, 0.5)


def test_sine_bridge_marginals_match_the_euler_oracle(sine_run):
    ctx, model, samples = sine_run
    cfg = EulerOracleConfig(dt=0.01, epsilon=0.2, paths=2000, batch=2000, stride=25, seed=44)
    oracle = euler_eball(model, 0.0, 0.0, 8.0, cfg)
    for t in (2.0, 6.0):
        assert ks_statistic(ctx.expand_many(samples, t), oracle.marginal(t)) < 0.1


def test_finest_sine_coefficients_are_close_to_normal(sine_run):
    ctx, _, samples = sine_run
    for p in np.flatnonzero(ctx.level == ctx.levels):
        assert qq_data(samples[:, p]).correlation > 0.99


def test_logistic_fully_local_run_keeps_its_endpoints(logistic: LogisticModel):
    ctx = _logistic_ctx(logistic, levels=4)
    result = zigzag_fully_local(LogisticBridge(ctx, logistic), 30.0, np.zeros(ctx.M), streams=RunStreams(45))
    assert result.events > 0
    assert result.max_ratio <= 1.0 + 1e-9
    paths = ctx.expand_grid(discretize(result.skeleton, 0.0, 0.5))
    assert np.all(paths[:, 0] == lamperti(logistic, 50.0))
    assert np.all(paths[:, -1] == lamperti(logistic, 1000.0))


def test_logistic_root_bound_is_balanced_in_both_directions(logistic: LogisticModel):
    ctx = _logistic_ctx(logistic, levels=6)
    xi = np.zeros(ctx.M)
    up = logistic_bound(ctx, logistic, 1, xi, np.ones(ctx.M))
    down = logistic_bound(ctx, logistic, 1, xi, -np.ones(ctx.M))
    b1, _ = logistic_envelope_at(ctx, 0, xi, np.ones(ctx.M))
    expected = up.components[1].rate(0.0) * math.exp(-logistic.beta * b1) / logistic.K
    assert down.components[2].rate(0.0) == pytest.approx(expected, rel=1e-9)
    assert down.rate(0.0) < up.rate(0.0)
