import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from coordgame.analysis import coordination_efficiency
from coordgame.equilibrium import ce_threshold, ne_threshold
from coordgame.estimators import (
    CertaintyEquivalentPolicy,
    NashThresholdPolicy,
    OraclePolicy,
    ThresholdPolicy,
    oracle_actions,
)
from coordgame.game import GameParams
from coordgame.montecarlo import SimConfig, simulate_draws


def test_get_params_and_clone():
    est = NashThresholdPolicy(n_agents=10, sigma_z_sq=0.5)
    params = est.get_params()
    assert params["n_agents"] == 10 and params["sigma_z_sq"] == 0.5
    twin = clone(est)
    assert twin.get_params() == params
    assert not hasattr(twin, "threshold_")


@pytest.mark.parametrize("cls, expected", [
    (NashThresholdPolicy, lambda p: ne_threshold(p).tau_star),
    (CertaintyEquivalentPolicy, ce_threshold),
    (OraclePolicy, lambda p: 0.45),
])
def test_fit_resolves_threshold(cls, expected):
    est = cls(n_agents=10).fit()
    assert est.threshold_ == pytest.approx(expected(GameParams(10, 1.0, 1.0, 1.0)), abs=1e-12)
    assert est.oracle_threshold_ == pytest.approx(0.45)
    assert list(est.classes_) == [0, 1]


def test_predict_and_decision_function():
    est = ThresholdPolicy(tau=0.5).fit()
    y = np.array([-1.0, 0.5, 0.51, 3.0])
    assert est.predict(y).tolist() == [1, 1, 0, 0]
    assert est.decision_function(y.reshape(-1, 1)) == pytest.approx([1.5, 0.0, -0.01, -2.5])
    with pytest.raises(ValueError):
        est.predict(np.ones((3, 2)))


def test_not_fitted():
    with pytest.raises(NotFittedError):
        ThresholdPolicy().predict([0.0])


def test_invalid_params_raise_on_fit():
    with pytest.raises(ValueError):
        ThresholdPolicy(sigma_x_sq=-1.0).fit()


def test_score_tracks_efficiency():
    params = GameParams("inf", 1.0, 1.0, 1.0)
    d = simulate_draws(0.0, 0.5, params, SimConfig(n_samples=200_000, seed=21))
    est = CertaintyEquivalentPolicy().fit(d.y)
    score = est.score(d.y, oracle_actions(d.x, params))
    rho = est.efficiency().rho
    assert rho == pytest.approx(coordination_efficiency(1.0, 0.5, params).rho, abs=1e-14)
    se = np.sqrt(rho * (1 - rho) / d.y.size)
    assert abs(score - rho) <= 4 * se


def test_expected_utility_method():
    est = NashThresholdPolicy().fit()
    assert est.expected_utility() > CertaintyEquivalentPolicy().fit().expected_utility()
