"""Seeded forward simulation of the game.

Random numbers come from numpy's PCG64 bit generator. Draws are produced in
fixed-size blocks; block ``k`` is seeded with ``SeedSequence(seed,
spawn_key=(k,))``, so results depend only on ``(seed, n_samples)`` and not on
how blocks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import InvalidArgumentError
from .game import BenefitSpec, GameParams, PolicyProfile, utility_batch

BLOCK_SIZE = 1 << 16
RNG_ALGORITHM = "numpy PCG64; block k seeded by SeedSequence(seed, spawn_key=(k,)); block size 65536"


@dataclass(frozen=True)
class SimConfig:
    n_samples: int = 100_000
    n_agents_effective: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise InvalidArgumentError(f"n_samples must be a positive integer, got {self.n_samples!r}")
        if int(self.n_agents_effective) != self.n_agents_effective or self.n_agents_effective < 2:
            raise InvalidArgumentError("n_agents_effective must be an integer >= 2")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True)
class SimReport:
    empirical_rho: float
    rho_std_error: float
    empirical_utility: float
    utility_std_error: float
    n_samples: int
    seed: int
    rng: str = RNG_ALGORITHM


@dataclass
class Draws:
    """Per-draw quantities for agent 1 (index 0)."""

    x: np.ndarray
    y: np.ndarray
    action: np.ndarray
    others_engaged: np.ndarray
    benefit: np.ndarray
    utility: np.ndarray
    coordinated: np.ndarray


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(block,))))


def _resolve(profile, params: GameParams, cfg: SimConfig):
    """Return (agent count, scalar tau or None, threshold vector or None)."""
    if isinstance(profile, PolicyProfile):
        if params.is_mean_field:
            if not profile.is_homogeneous:
                raise InvalidArgumentError("heterogeneous profiles need a finite number of agents")
            return cfg.n_agents_effective, profile.thresholds[0], None
        if len(profile) != params.n_agents:
            raise InvalidArgumentError(
                f"profile has {len(profile)} thresholds but the game has {params.n_agents} agents"
            )
        if profile.is_homogeneous:
            return params.n_agents, profile.thresholds[0], None
        return params.n_agents, None, profile.as_array()
    tau = float(profile)
    n = cfg.n_agents_effective if params.is_mean_field else params.n_agents
    return n, tau, None


def _simulate_block(block: int, size: int, n_agents: int, tau, taus, tau_oracle: float,
                    params: GameParams, cfg: SimConfig, benefit) -> Draws:
    rng = _block_rng(cfg.seed, block)
    x = params.sigma_x * rng.standard_normal(size)
    if taus is None:
        y = x + params.sigma_z * rng.standard_normal(size)
        action = y <= tau
        # opponents are conditionally iid given X: draw their engagement count directly
        p = special.ndtr((tau - x) / params.sigma_z)
        others = rng.binomial(n_agents - 1, p)
    else:
        y_all = x[:, None] + params.sigma_z * rng.standard_normal((size, n_agents))
        engaged = y_all <= taus[None, :]
        y, action = y_all[:, 0], engaged[:, 0]
        others = engaged[:, 1:].sum(axis=1)
    b = benefit(others.astype(float))
    u = utility_batch(action, others, x, benefit)
    coordinated = action == (x <= tau_oracle)
    return Draws(x, y, action, others, b, u, coordinated)


def simulate_draws(profile, tau_oracle: float, params: GameParams, cfg: SimConfig,
                   n_workers: int = 1) -> Draws:
    """Raw per-draw arrays; :func:`simulate` summarises them."""
    params.require_noisy()
    n_agents, tau, taus = _resolve(profile, params, cfg)
    if params.is_mean_field:
        lam = params.lam
        benefit = lambda k: lam * k / n_agents  # noqa: E731
    else:
        benefit = BenefitSpec.from_params(params)

    n_blocks = math.ceil(cfg.n_samples / BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, cfg.n_samples - k * BLOCK_SIZE) for k in range(n_blocks)]

    def run(k):
        return _simulate_block(k, sizes[k], n_agents, tau, taus, tau_oracle, params, cfg, benefit)

    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            blocks = list(pool.map(run, range(n_blocks)))
    else:
        blocks = [run(k) for k in range(n_blocks)]
    fields = Draws.__dataclass_fields__
    return Draws(**{f: np.concatenate([getattr(b, f) for b in blocks]) for f in fields})


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    mean = float(np.mean(values))
    if n < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(n))


def simulate(profile, tau_oracle: float, params: GameParams, cfg: SimConfig,
             n_workers: int = 1) -> SimReport:
    """Monte Carlo estimate of agent 1's coordination rate and expected utility.

    ``profile`` is a :class:`PolicyProfile` or a scalar threshold shared by
    all agents. In the mean-field case ``cfg.n_agents_effective`` agents are
    simulated.
    """
    d = simulate_draws(profile, tau_oracle, params, cfg, n_workers)
    rho, rho_se = _mean_se(d.coordinated.astype(float))
    util, util_se = _mean_se(d.utility)
    return SimReport(rho, rho_se, util, util_se, cfg.n_samples, int(cfg.seed))
