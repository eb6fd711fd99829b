"""Coordination efficiency, expected utility and the Fano upper bound."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .game import GameParams, PolicyProfile
from .numerics import (
    QuadratureSpec,
    binary_entropy,
    differential_entropy,
    gaussian_expectation,
    gaussian_pdf,
    inverse_binary_entropy,
    simpson_on_grid,
    std_normal_cdf,
)

logger = logging.getLogger(__name__)

STATE_NODES = 4001
HALF_WIDTH_SIGMAS = 8.0
ENTROPY_NODES = 4001


@dataclass(frozen=True)
class EfficiencyReport:
    rho: float
    miscoordination_integral: float
    oracle_tau: float
    policy_tau: float
    method: str = "quadrature"
    std_error: float = 0.0


@dataclass(frozen=True)
class FanoReport:
    """Entropy terms (bits) behind the bound rho <= 1 - h^-1(H(A* | Y))."""

    h_astar: float
    h_y: float
    h_y_given_astar: float
    h_astar_given_y: float
    h_astar_given_y_unclamped: float
    rho_upper_bound: float
    p_astar_one: float


def miscoordination_prob_given_x(x, tau: float, tau_oracle: float, params: GameParams):
    """P(agent action differs from the oracle action | X = x). Vectorised in ``x``."""
    params.require_noisy()
    x_arr = np.asarray(x, dtype=float)
    engage = std_normal_cdf((tau - x_arr) / params.sigma_z)
    out = np.where(x_arr <= tau_oracle, 1.0 - engage, engage)
    return float(out) if out.ndim == 0 else out


def _odd(n: int) -> int:
    return max(3, n if n % 2 else n + 1)


def _state_pieces(params: GameParams, split: float, node_count: int):
    """Simpson grids covering +-8 sigma_x, broken at ``split`` when it falls inside."""
    half = HALF_WIDTH_SIGMAS * params.sigma_x
    lo, hi = -half, half
    if not lo < split < hi:
        return [np.linspace(lo, hi, _odd(node_count))]
    n_left = _odd(int(round(node_count * (split - lo) / (hi - lo))))
    n_right = _odd(node_count - n_left + 1)
    return [np.linspace(lo, split, n_left), np.linspace(split, hi, n_right)]


def coordination_efficiency(tau: float, tau_oracle: float, params: GameParams,
                            node_count: int = STATE_NODES) -> EfficiencyReport:
    """Probability that a threshold-``tau`` agent matches the oracle action.

    The state grid is split at ``tau_oracle`` so each piece integrates a
    smooth branch of the miscoordination probability.
    """
    params.require_noisy()
    sz = params.sigma_z
    total = 0.0
    for grid in _state_pieces(params, tau_oracle, node_count):
        engage = std_normal_cdf((tau - grid) / sz)
        below = grid[-1] <= tau_oracle
        miss = (1.0 - engage) if below else engage
        total += simpson_on_grid(miss * gaussian_pdf(grid, params.sigma_x_sq), grid)
    total = min(max(total, 0.0), 1.0)
    return EfficiencyReport(1.0 - total, total, tau_oracle, tau)


def coordination_efficiency_profile(profile: PolicyProfile, tau_oracle: float,
                                    params: GameParams,
                                    node_count: int = STATE_NODES) -> EfficiencyReport:
    """Agent-averaged efficiency for a heterogeneous threshold profile."""
    reports = [coordination_efficiency(t, tau_oracle, params, node_count) for t in profile.thresholds]
    miss = float(np.mean([r.miscoordination_integral for r in reports]))
    return EfficiencyReport(1.0 - miss, miss, tau_oracle, float(np.mean(profile.thresholds)))


def expected_utility(tau: float, params: GameParams, node_count: int = STATE_NODES) -> float:
    """Expected payoff of one agent when every agent uses threshold ``tau``.

    Given X = x the actions are independent Bernoulli(p(x)), p(x) = Phi((tau - x)/sigma_z),
    so the payoff integrand is br_coeff * p^2 - x * p.
    """
    params.require_noisy()
    total = 0.0
    # split at tau: p(x) is nearly a step there when sigma_z is small
    for grid in _state_pieces(params, tau, node_count):
        p = std_normal_cdf((tau - grid) / params.sigma_z)
        integrand = (params.br_coeff() * p * p - grid * p) * gaussian_pdf(grid, params.sigma_x_sq)
        total += simpson_on_grid(integrand, grid)
    return total


def _side_sign(side: str) -> float:
    if side == "below":
        return 1.0
    if side == "above":
        return -1.0
    raise ValueError(f"side must be 'below' or 'above', got {side!r}")


def cond_density_y_given_side(y, side: str, tau_oracle: float, params: GameParams):
    """Density of a signal given X <= tau_oracle ("below") or X > tau_oracle ("above").

    Uses X | Y=y ~ N(alpha y, sigma_tilde^2), so the density is
    f_Y(y) * P(side | Y=y) / P(side).
    """
    params.require_noisy()
    sign = _side_sign(side)
    y_arr = np.asarray(y, dtype=float)
    a = params.alpha()
    st = math.sqrt(params.sigma_tilde_sq())
    var_y = params.sigma_x_sq + params.sigma_z_sq
    log_post = special.log_ndtr(sign * (tau_oracle - a * y_arr) / st)
    log_side = special.log_ndtr(sign * tau_oracle / params.sigma_x)
    log_fy = -0.5 * y_arr * y_arr / var_y - 0.5 * math.log(2.0 * math.pi * var_y)
    out = np.exp(log_fy + log_post - log_side)
    return float(out) if out.ndim == 0 else out


def gaussian_entropy_bits(var: float) -> float:
    return 0.5 * math.log2(2.0 * math.pi * math.e * var)


def fano_bound(tau_oracle: float, params: GameParams,
               node_count: int = ENTROPY_NODES) -> FanoReport:
    """Upper bound on the coordination efficiency of any homogeneous policy.

    H(A*|Y) is assembled as H(A*) - H(Y) + H(Y|A*), with the last term
    integrated numerically on +-8 combined standard deviations.
    """
    params.require_noisy()
    p1 = std_normal_cdf(tau_oracle / params.sigma_x)
    h_astar = binary_entropy(p1)
    var_y = params.sigma_x_sq + params.sigma_z_sq
    h_y = gaussian_entropy_bits(var_y)
    half = HALF_WIDTH_SIGMAS * math.sqrt(var_y)

    h_y_given = 0.0
    for side, weight in (("below", p1), ("above", 1.0 - p1)):
        if weight <= 0.0:
            continue
        h_side = differential_entropy(
            lambda y, side=side: cond_density_y_given_side(y, side, tau_oracle, params),
            -half, half, node_count,
        )
        h_y_given += weight * h_side

    raw = h_astar - h_y + h_y_given
    clamped = min(max(raw, 0.0), h_astar)
    if clamped != raw:
        logger.debug("clamped H(A*|Y) from %r to %r", raw, clamped)
    bound = 1.0 - inverse_binary_entropy(clamped)
    return FanoReport(h_astar, h_y, h_y_given, clamped, raw, bound, p1)


def conditional_entropy_direct(tau_oracle: float, params: GameParams,
                               quad: QuadratureSpec | None = None) -> float:
    """H(A*|Y) as E_Y[h(P(X <= tau_oracle | Y))], an independent route to the same quantity."""
    params.require_noisy()
    if quad is None:
        quad = QuadratureSpec(node_count=4001, kind="trapezoid_truncated", truncation_sigmas=8.0)
    a = params.alpha()
    st = math.sqrt(params.sigma_tilde_sq())
    sd_y = math.sqrt(params.sigma_x_sq + params.sigma_z_sq)
    return gaussian_expectation(
        lambda w: binary_entropy(std_normal_cdf((tau_oracle - a * sd_y * w) / st)), quad
    )


def is_unimodal(values: Sequence[float], atol: float = 1e-12) -> bool:
    """True if ``values`` rise (weakly) to a single peak and then fall."""
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    signs = np.sign(np.where(np.abs(d) <= atol, 0.0, d))
    signs = signs[signs != 0]
    return not np.any(np.diff(signs) > 0)


def efficiency_curve(tau_grid: Sequence[float], tau_oracle: float,
                     params: GameParams) -> np.ndarray:
    """rho over a threshold grid; logs (does not raise) when the curve is not unimodal."""
    rho = np.array([coordination_efficiency(float(t), tau_oracle, params).rho for t in tau_grid])
    if not is_unimodal(rho):
        logger.warning("efficiency curve is not unimodal for %r", params)
    return rho
