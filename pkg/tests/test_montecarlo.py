import math

import numpy as np
import pytest

from coordgame.analysis import coordination_efficiency, expected_utility
from coordgame.equilibrium import ne_threshold, oracle_threshold
from coordgame.exceptions import InvalidArgumentError, NoiselessDegenerateError
from coordgame.game import BenefitSpec, GameParams, PolicyProfile
from coordgame.montecarlo import BLOCK_SIZE, SimConfig, simulate, simulate_draws

# Regression constants: N=10, lam=1, unit variances, tau = NE, 1e6 samples, seed 42
SEED42_RHO = 0.772759
SEED42_UTILITY = 0.8241080844171617

BASE = GameParams(10, 1.0, 1.0, 1.0)


def test_config_invariants():
    for kwargs in ({"n_samples": 0}, {"n_agents_effective": 1}, {"seed": -1}, {"seed": 2**64}):
        with pytest.raises(InvalidArgumentError):
            SimConfig(**kwargs)


def test_determinism():
    cfg = SimConfig(n_samples=150_000, seed=7)
    a = simulate(0.9, 0.45, BASE, cfg)
    b = simulate(0.9, 0.45, BASE, cfg)
    assert a == b
    assert simulate(0.9, 0.45, BASE, SimConfig(n_samples=150_000, seed=8)) != a


def test_worker_count_does_not_change_results():
    cfg = SimConfig(n_samples=3 * BLOCK_SIZE + 17, seed=3)
    assert simulate(0.9, 0.45, BASE, cfg) == simulate(0.9, 0.45, BASE, cfg, n_workers=4)


def test_prefix_stability():
    # block k depends only on (seed, k), so a longer run extends a shorter one
    short = simulate_draws(0.9, 0.45, BASE, SimConfig(n_samples=BLOCK_SIZE, seed=5))
    long = simulate_draws(0.9, 0.45, BASE, SimConfig(n_samples=2 * BLOCK_SIZE, seed=5))
    assert np.array_equal(short.x, long.x[:BLOCK_SIZE])


def test_never_engage_gives_zero_utility():
    rep = simulate(-1e6, 0.45, BASE, SimConfig(n_samples=50_000))
    assert rep.empirical_utility == 0.0
    assert rep.utility_std_error == 0.0


def test_noiseless_alignment():
    p = BASE.replace(sigma_z_sq=1e-10)
    tau_o = oracle_threshold(p)
    rep = simulate(tau_o, tau_o, p, SimConfig(n_samples=200_000, seed=1))
    assert abs(rep.empirical_rho - 1.0) <= max(3 * rep.rho_std_error, 1e-4)


def test_requires_noise():
    with pytest.raises(NoiselessDegenerateError):
        simulate(0.0, 0.0, BASE.replace(sigma_z_sq=0.0), SimConfig(n_samples=10))


def test_standard_errors():
    d = simulate_draws(0.9, 0.45, BASE, SimConfig(n_samples=40_000, seed=11))
    rep = simulate(0.9, 0.45, BASE, SimConfig(n_samples=40_000, seed=11))
    n = d.utility.size
    assert rep.utility_std_error == pytest.approx(np.std(d.utility, ddof=1) / math.sqrt(n), rel=1e-12)
    c = d.coordinated.astype(float)
    assert rep.rho_std_error == pytest.approx(np.std(c, ddof=1) / math.sqrt(n), rel=1e-12)


def test_draws_consistent_with_game():
    d = simulate_draws(0.7, 0.45, BASE, SimConfig(n_samples=20_000, seed=2))
    assert np.array_equal(d.action, d.y <= 0.7)
    assert np.all((d.others_engaged >= 0) & (d.others_engaged <= 9))
    b = BenefitSpec.from_params(BASE)
    expected = np.where(d.action, b(d.others_engaged.astype(float)) - d.x, 0.0)
    assert np.allclose(d.utility, expected, atol=1e-12, rtol=0)
    assert np.array_equal(d.coordinated, d.action == (d.x <= 0.45))


def test_seed42_regression_and_quadrature_agreement():
    tau = ne_threshold(BASE).tau_star
    tau_o = oracle_threshold(BASE)
    rep = simulate(tau, tau_o, BASE, SimConfig(n_samples=1_000_000, seed=42))
    assert rep.empirical_rho == SEED42_RHO
    assert rep.empirical_utility == pytest.approx(SEED42_UTILITY, abs=1e-12)
    assert abs(rep.empirical_rho - coordination_efficiency(tau, tau_o, BASE).rho) <= 3 * rep.rho_std_error
    assert abs(rep.empirical_utility - expected_utility(tau, BASE)) <= 3 * rep.utility_std_error
    assert "PCG64" in rep.rng


def test_mean_field_agreement():
    p = GameParams("inf", 1.0, 1.0, 1.0)
    tau = ne_threshold(p).tau_star
    rep = simulate(tau, 0.5, p, SimConfig(n_samples=400_000, seed=9))
    assert abs(rep.empirical_rho - coordination_efficiency(tau, 0.5, p).rho) <= 3 * rep.rho_std_error
    assert abs(rep.empirical_utility - expected_utility(tau, p)) <= 3 * rep.utility_std_error


def test_heterogeneous_profile():
    p = GameParams(4, 1.0, 1.0, 0.5)
    prof = PolicyProfile((0.2, 0.5, 0.8, 1.1))
    rep = simulate(prof, oracle_threshold(p), p, SimConfig(n_samples=200_000, seed=4))
    rho = coordination_efficiency(0.2, oracle_threshold(p), p).rho
    assert abs(rep.empirical_rho - rho) <= 3 * rep.rho_std_error
    hom = simulate(PolicyProfile.homogeneous(0.5, 4), 0.375, p, SimConfig(n_samples=1000))
    assert hom == simulate(0.5, 0.375, p, SimConfig(n_samples=1000))


def test_profile_validation():
    with pytest.raises(InvalidArgumentError):
        simulate(PolicyProfile((0.1, 0.2)), 0.45, BASE, SimConfig(n_samples=10))
    with pytest.raises(InvalidArgumentError):
        simulate(PolicyProfile((0.1, 0.2)), 0.5, BASE.replace(n_agents="inf"), SimConfig(n_samples=10))


def test_expected_benefit_decreases_with_signal():
    d = simulate_draws(1.25, 0.45, BASE, SimConfig(n_samples=400_000, seed=13))
    edges = np.quantile(d.y, np.linspace(0, 1, 21))
    idx = np.clip(np.searchsorted(edges, d.y, side="right") - 1, 0, 19)
    means, ses = [], []
    for k in range(20):
        v = d.benefit[idx == k]
        means.append(v.mean())
        ses.append(v.std(ddof=1) / math.sqrt(v.size))
    for k in range(19):
        slack = 2 * math.hypot(ses[k], ses[k + 1])
        assert means[k + 1] <= means[k] + slack
