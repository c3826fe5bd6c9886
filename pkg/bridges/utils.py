from __future__ import annotations

import math
from typing import Tuple

import numpy as np
from scipy.integrate import quad

from basis import BasisContext
from basis.utils import IndexLike
from poisson import AffineRate, ExpRate, SuperpositionRate
from schemas import DomainError

from .models import (
    BridgeModel,
    DriftModel,
    EstimatorConfig,
    EstimatorVariant,
    LinearModel,
    LogisticModel,
    SineModel,
)


# Points this far outside S_k still count as inside it.
_SUPPORT_SLACK = 1e-12


def lamperti(model: LogisticModel, y: float) -> float:
    """x = -log(y) / beta."""

    return model.transform(y)


def velocities(ctx: BasisContext, decay: float = 1.0) -> np.ndarray:
    """Velocity magnitudes decay^i for every coefficient at level i."""

    if not math.isfinite(decay) or decay <= 0.0:
        raise DomainError(f"velocity decay must be positive, got {decay}")
    return decay ** ctx.level.astype(float)


# ----------------------------------------------------------------------
# Linear drift: exact affine rates
# ----------------------------------------------------------------------


def linear_coefficients_at(
    ctx: BasisContext, model: LinearModel, p: int, xi: np.ndarray, theta: np.ndarray
) -> Tuple[float, float]:
    """(c0, c1) with d_k psi(xi + t theta) = c0 + c1 t, k at array position p."""

    nb = ctx.neighbors[p]
    gram = ctx.gram[p]
    beta2 = model.beta**2
    path = (
        ctx.start_integral[p] * ctx.u
        + ctx.pinned_integral[p] * ctx.v / ctx.sqrt_T
        + float(gram @ xi[nb])
    )
    c0 = beta2 * path + model.alpha * model.beta * ctx.phi_integral[p] + xi[p]
    c1 = beta2 * float(gram @ theta[nb]) + theta[p]
    return float(c0), float(c1)


def linear_rate_at(
    ctx: BasisContext, model: LinearModel, p: int, xi: np.ndarray, theta: np.ndarray
) -> AffineRate:
    c0, c1 = linear_coefficients_at(ctx, model, p, xi, theta)
    return AffineRate(theta[p] * c0, theta[p] * c1)


def linear_rate(
    ctx: BasisContext, model: LinearModel, k: IndexLike, xi: np.ndarray, theta: np.ndarray
) -> AffineRate:
    """Exact rate (theta_k (c0 + c1 t))^+ of coefficient k under a linear drift."""

    return linear_rate_at(ctx, model, ctx.index(k), np.asarray(xi, float), np.asarray(theta, float))


# ----------------------------------------------------------------------
# Subsampling estimator
# ----------------------------------------------------------------------


def draw_points(
    ctx: BasisContext, p: int, cfg: EstimatorConfig, rng: np.random.Generator
) -> np.ndarray:
    """Random evaluation points U_k in S_k for the configured estimator."""

    width = float(ctx.width[p])
    count = cfg.replication(width, ctx.grid_step)
    if cfg.variant is EstimatorVariant.V2:
        return ctx.left[p] + (np.arange(count) + rng.random(count)) * (width / count)
    return ctx.left[p] + width * rng.random(count)


def _check_points(ctx: BasisContext, p: int, U: np.ndarray, cfg: EstimatorConfig) -> None:
    slack = _SUPPORT_SLACK * ctx.T
    if U.size == 0:
        raise DomainError("estimator needs at least one evaluation point")
    if np.any(U < ctx.left[p] - slack) or np.any(U > ctx.right[p] + slack):
        raise DomainError(f"evaluation point outside S_k = [{ctx.left[p]}, {ctx.right[p]}]")
    if cfg.variant is EstimatorVariant.SINGLE and U.size != 1:
        raise DomainError(f"single estimator takes one point, got {U.size}")
    if cfg.variant is EstimatorVariant.V2:
        edges = ctx.left[p] + ctx.width[p] * np.arange(U.size + 1) / U.size
        if np.any(U < edges[:-1] - slack) or np.any(U > edges[1:] + slack):
            raise DomainError("stratified estimator needs one point per stratum, in order")


def estimate_at(
    ctx: BasisContext, model: DriftModel, p: int, xi: np.ndarray, U: np.ndarray
) -> float:
    """1/2 |S_k| mean_r phi_k(U_r) (2bb' + b'')(X_{U_r}) + xi_k.

    Reads xi only on the chain of indices whose support contains each U_r.
    """

    U = np.atleast_1d(np.asarray(U, dtype=float))
    path = ctx.expand_many(xi, U)
    h = ctx.hat(p, U) * model.girsanov_integrand(path)
    return float(0.5 * ctx.width[p] * np.mean(h) + xi[p])


def gradient_estimate(
    ctx: BasisContext,
    model: BridgeModel,
    k: IndexLike,
    xi: np.ndarray,
    U,
    cfg: EstimatorConfig = EstimatorConfig(),
) -> float:
    """Unbiased estimate of d_k psi(xi) from evaluation point(s) U in S_k."""

    p = ctx.index(k)
    U = np.atleast_1d(np.asarray(U, dtype=float))
    _check_points(ctx, p, U, cfg)
    return estimate_at(ctx, model, p, np.asarray(xi, dtype=float), U)


def estimator_chain(ctx: BasisContext, p: int, U: np.ndarray) -> np.ndarray:
    """Coordinates an estimate at points U reads: k and every chain through U."""

    return np.union1d(ctx.chain(np.atleast_1d(U)).ravel(), [p])


# ----------------------------------------------------------------------
# Bounds
# ----------------------------------------------------------------------


def support_envelope(
    ctx: BasisContext, p: int, xi: np.ndarray, theta: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Path X_s and velocity V_s at the finest-grid breakpoints of S_k.

    Both are piecewise linear between the breakpoints, so their extrema
    over S_k are extrema of these arrays.
    """

    s, values = ctx.support_grid(p)
    nb = ctx.neighbors[p]
    return ctx.baseline(s) + values @ xi[nb], values @ theta[nb]


def sine_bound_constant(ctx: BasisContext, model: SineModel, k: IndexLike) -> float:
    """a1 = peak_k |S_k| (alpha^2 + alpha) / 2, proportional to T^{3/2} 2^{-3i/2}."""

    p = ctx.index(k)
    return float(ctx.peak[p] * ctx.width[p] * model.integrand_bound / 2.0)


def sine_bound_at(
    ctx: BasisContext, model: SineModel, p: int, xi: np.ndarray, theta: np.ndarray
) -> SuperpositionRate:
    a1 = float(ctx.peak[p] * ctx.width[p] * model.integrand_bound / 2.0)
    return SuperpositionRate(
        (AffineRate(abs(theta[p]) * a1, 0.0), AffineRate(theta[p] * xi[p], theta[p] ** 2))
    )


def sine_bound(
    ctx: BasisContext, model: SineModel, k: IndexLike, xi: np.ndarray, theta: np.ndarray
) -> SuperpositionRate:
    """|theta_k| a1 + (theta_k (xi_k + theta_k t))^+, depending on coordinate k only."""

    return sine_bound_at(ctx, model, ctx.index(k), np.asarray(xi, float), np.asarray(theta, float))


def logistic_envelope_at(
    ctx: BasisContext, p: int, xi: np.ndarray, theta: np.ndarray
) -> Tuple[float, float]:
    """(b1, b2): infima over S_k of the path and of its velocity."""

    path, velocity = support_envelope(ctx, p, xi, theta)
    return float(path.min()), float(velocity.min())


def logistic_bound_at(
    ctx: BasisContext, model: LogisticModel, p: int, xi: np.ndarray, theta: np.ndarray
) -> SuperpositionRate:
    b1, b2 = logistic_envelope_at(ctx, p, xi, theta)
    beta_star = -model.beta * b2
    scale = 0.5 * float(ctx.peak[p] * ctx.width[p])
    z1 = model.a1 * math.exp(-model.beta * b1)
    z2 = model.a2 * math.exp(-2.0 * model.beta * b1)
    return SuperpositionRate(
        (
            AffineRate(theta[p] * xi[p], theta[p] ** 2),
            ExpRate(theta[p] * scale * z1, beta_star),
            ExpRate(-theta[p] * scale * z2, 2.0 * beta_star),
        )
    )


def logistic_bound(
    ctx: BasisContext, model: LogisticModel, k: IndexLike, xi: np.ndarray, theta: np.ndarray
) -> SuperpositionRate:
    """Affine part plus two exponentials; the sign of theta_k switches one of them off.

    Uses the envelope X_s(t) >= b1 + b2 t on S_k, so
    exp(-beta X_s(t)) <= exp(-beta b1) exp(beta* t) with beta* = -beta b2.
    """

    return logistic_bound_at(ctx, model, ctx.index(k), np.asarray(xi, float), np.asarray(theta, float))


def linear_bound_at(
    ctx: BasisContext, model: LinearModel, p: int, xi: np.ndarray, theta: np.ndarray
) -> SuperpositionRate:
    path, velocity = support_envelope(ctx, p, xi, theta)
    scale = float(ctx.peak[p] * ctx.width[p])
    A = scale * abs(model.beta) * (abs(model.alpha) + abs(model.beta) * float(np.abs(path).max()))
    B = scale * model.beta**2 * float(np.abs(velocity).max())
    return SuperpositionRate(
        (AffineRate(theta[p] * xi[p], theta[p] ** 2), AffineRate(abs(theta[p]) * A, abs(theta[p]) * B))
    )


def linear_bound(
    ctx: BasisContext, model: LinearModel, k: IndexLike, xi: np.ndarray, theta: np.ndarray
) -> SuperpositionRate:
    """Bound for subsampling a linear drift: (theta_k xi_k(t))^+ + |theta_k| (A + B t)."""

    return linear_bound_at(ctx, model, ctx.index(k), np.asarray(xi, float), np.asarray(theta, float))


# ----------------------------------------------------------------------
# Energies
# ----------------------------------------------------------------------


def partial_energy(ctx: BasisContext, model: BridgeModel, k: IndexLike, xi: np.ndarray) -> float:
    """d_k psi(xi) by adaptive quadrature over S_k (breakpoints passed to quad)."""

    p = ctx.index(k)
    xi = np.asarray(xi, dtype=float)
    s, _ = ctx.support_grid(p)

    def integrand(t: float) -> float:
        return float(ctx.hat(p, t) * model.girsanov_integrand(ctx.expand(xi, t)))

    inner = list(s[1:-1])
    value, _ = quad(
        integrand, ctx.left[p], ctx.right[p],
        points=inner or None, limit=50 + 4 * len(inner), epsabs=1e-13, epsrel=1e-12,
    )
    return 0.5 * value + float(xi[p])


def _trapezoid_weights(ctx: BasisContext) -> np.ndarray:
    w = np.full(ctx.grid.size, ctx.grid_step)
    w[[0, -1]] *= 0.5
    return w


def grid_energy(ctx: BasisContext, model: BridgeModel, xi: np.ndarray) -> np.ndarray:
    """Energy with the path integral replaced by the trapezoid rule on the dyadic grid."""

    xi = np.asarray(xi, dtype=float)
    path = ctx.expand_grid(xi)
    integral = model.girsanov_potential(path) @ _trapezoid_weights(ctx)
    return 0.5 * integral + 0.5 * np.sum(xi * xi, axis=-1)


def grid_gradient(ctx: BasisContext, model: BridgeModel, xi: np.ndarray) -> np.ndarray:
    """Exact gradient of grid_energy."""

    xi = np.asarray(xi, dtype=float)
    path = ctx.expand_grid(xi)
    weighted = model.girsanov_integrand(path) * _trapezoid_weights(ctx)
    return 0.5 * weighted @ ctx.grid_basis().T + xi
