"""Beliefs, best responses and equilibrium thresholds for the linear-benefit game."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import BracketError, NumericalInconsistencyError
from .game import GameParams, PolicyProfile
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    bisect,
    gaussian_expectation,
    std_normal_cdf,
)

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-12
BR_MAX_ITER = 10_000
BR_STEP_TOL = 1e-12
BR_AGREEMENT_TOL = 1e-6


@dataclass(frozen=True)
class NeSolution:
    """Symmetric equilibrium threshold and its diagnostics.

    ``tau_star`` always comes from direct root finding; the best-response
    iteration is run as a cross-check and reported alongside.
    """

    tau_star: float
    iterations: int
    residual: float
    method: str
    br_tau: float
    br_iterations: int
    br_converged: bool

    @property
    def agreement(self) -> float:
        return abs(self.br_tau - self.tau_star)

    @property
    def methods_agree(self) -> bool:
        return self.br_converged and self.agreement <= BR_AGREEMENT_TOL


def mmse_estimate(y, params: GameParams):
    return params.alpha() * y


def belief_pi(xi: float, tau: float, params: GameParams,
              quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Probability that another agent with threshold ``tau`` engages, seen from signal ``xi``.

    E[Phi((tau - sigma_tilde W - alpha xi) / sigma_z)] with W standard normal.
    """
    params.require_noisy()
    a = params.alpha()
    st = math.sqrt(params.sigma_tilde_sq())
    sz = params.sigma_z
    centre = (tau - a * xi) / sz
    return gaussian_expectation(lambda w: std_normal_cdf(centre - (st / sz) * w), quad)


def belief_pair(tau_j: float, y_i: float, params: GameParams,
                quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """P(Y_j <= tau_j | Y_i = y_i), integrating over V ~ N(0, sigma_tilde^2)."""
    params.require_noisy()
    a = params.alpha()
    sd_v = math.sqrt(params.sigma_tilde_sq())
    sz = params.sigma_z

    def integrand(w):
        v = sd_v * w
        return std_normal_cdf((tau_j - v - a * y_i) / sz)

    return gaussian_expectation(integrand, quad)


def _solve_on_bracket(g, upper: float, params: GameParams) -> tuple[float, int]:
    try:
        return bisect(g, 0.0, upper, ROOT_TOL)
    except BracketError as err:
        raise NumericalInconsistencyError(
            f"no sign change on [0, {upper!r}] for {params!r}: "
            f"g(0)={err.f_lo!r}, g(upper)={err.f_hi!r}"
        ) from err


def best_response_threshold(tau: float, params: GameParams,
                            quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Best-response signal threshold when every other agent uses ``tau``.

    Root of br_coeff * pi(xi; tau) - alpha * xi on [0, br_coeff / alpha];
    the left side is strictly decreasing so the root is unique.
    """
    params.require_noisy()
    k, a = params.br_coeff(), params.alpha()
    xi, _ = _solve_on_bracket(lambda xi: k * belief_pi(xi, tau, params, quad) - a * xi, k / a, params)
    return xi


def fixed_point_residual(tau: float, params: GameParams,
                         quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    return params.br_coeff() * belief_pi(tau, tau, params, quad) - params.alpha() * tau


def ne_threshold(params: GameParams, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> NeSolution:
    """Symmetric Bayesian-Nash threshold.

    Bisection on g(tau) = br_coeff * pi(tau; tau) - alpha * tau over
    [0, br_coeff / alpha], cross-checked by iterating the best-response map
    from br_coeff / (2 alpha).
    """
    params.require_noisy()
    k, a = params.br_coeff(), params.alpha()
    tau_star, iters = _solve_on_bracket(lambda t: fixed_point_residual(t, params, quad), k / a, params)
    residual = abs(fixed_point_residual(tau_star, params, quad))

    tau = k / (2.0 * a)
    converged = False
    br_iters = 0
    for br_iters in range(1, BR_MAX_ITER + 1):
        nxt = best_response_threshold(tau, params, quad)
        step = abs(nxt - tau)
        tau = nxt
        if step <= BR_STEP_TOL * max(1.0, abs(tau)):
            converged = True
            break
    if not converged:
        logger.warning("best-response iteration did not converge in %d steps for %r",
                       BR_MAX_ITER, params)
    return NeSolution(tau_star, iters, residual, "direct_root", tau, br_iters, converged)


def br_map_heterogeneous(taus: PolicyProfile, params: GameParams,
                         quad: QuadratureSpec = DEFAULT_QUADRATURE) -> PolicyProfile:
    """Apply the best-response map to a vector of thresholds.

    Component i is the zero of (lam/N) * sum_{j != i} P(Y_j <= tau_j | Y_i = xi) - alpha xi.
    """
    params.require_noisy()
    params.require_finite_n()
    n = params.n_agents
    if len(taus) != n:
        raise ValueError(f"profile has {len(taus)} thresholds but the game has {n} agents")
    a = params.alpha()
    scale = params.lam / n
    upper = params.lam * (n - 1) / (n * a)
    out = []
    for i in range(n):
        others = [t for j, t in enumerate(taus.thresholds) if j != i]

        def g(xi, others=others):
            return scale * sum(belief_pair(t, xi, params, quad) for t in others) - a * xi

        out.append(_solve_on_bracket(g, upper, params)[0])
    return PolicyProfile(tuple(out))


def oracle_threshold(params: GameParams) -> float:
    """Perfect-information threshold lam/2 * (1 - 1/N) (lam/2 in the mean-field limit)."""
    if params.is_mean_field:
        return params.lam / 2.0
    return params.lam / 2.0 * (1.0 - 1.0 / params.n_agents)


def ce_threshold(params: GameParams) -> float:
    """Signal threshold of the certainty-equivalent policy (oracle rule on the MMSE estimate)."""
    return (1.0 + params.sigma_z_sq / params.sigma_x_sq) * oracle_threshold(params)


def best_response_curve(tau_grid, params: GameParams,
                        quad: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    return np.array([best_response_threshold(float(t), params, quad) for t in tau_grid])
