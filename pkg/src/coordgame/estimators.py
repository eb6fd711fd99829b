"""scikit-learn compatible threshold policies.

Each estimator maps scalar signals to binary actions (1 = engage). The game
parameters are constructor arguments, so ``fit`` only validates them and
resolves ``threshold_``; signals passed to ``fit`` are checked but unused.
``score(Y, a_star)`` is the fraction of signals whose action matches the
oracle action ``a_star``, i.e. an empirical coordination efficiency.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import analysis, equilibrium
from .game import GameParams
from .numerics import QuadratureSpec


def _as_signals(Y) -> np.ndarray:
    arr = check_array(Y, ensure_2d=False, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected one signal per row, got shape {arr.shape}")
        arr = arr[:, 0]
    return arr


class ThresholdPolicy(ClassifierMixin, BaseEstimator):
    """Engage iff the signal is at or below a fixed threshold ``tau``."""

    def __init__(self, tau=0.0, n_agents="inf", lam=1.0, sigma_x_sq=1.0, sigma_z_sq=1.0):
        self.tau = tau
        self.n_agents = n_agents
        self.lam = lam
        self.sigma_x_sq = sigma_x_sq
        self.sigma_z_sq = sigma_z_sq

    def _game(self) -> GameParams:
        return GameParams(self.n_agents, self.lam, self.sigma_x_sq, self.sigma_z_sq)

    def _resolve_threshold(self, params: GameParams) -> float:
        return float(self.tau)

    def fit(self, Y=None, y=None):
        if Y is not None:
            _as_signals(Y)
        self.params_ = self._game()
        self.threshold_ = self._resolve_threshold(self.params_)
        self.oracle_threshold_ = equilibrium.oracle_threshold(self.params_)
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, Y) -> np.ndarray:
        """Signed margin ``threshold_ - y``; nonnegative means engage."""
        check_is_fitted(self, "threshold_")
        return self.threshold_ - _as_signals(Y)

    def predict(self, Y) -> np.ndarray:
        return (self.decision_function(Y) >= 0).astype(int)

    def efficiency(self) -> analysis.EfficiencyReport:
        """Quadrature coordination efficiency of this policy against the oracle."""
        check_is_fitted(self, "threshold_")
        return analysis.coordination_efficiency(self.threshold_, self.oracle_threshold_, self.params_)

    def expected_utility(self) -> float:
        check_is_fitted(self, "threshold_")
        return analysis.expected_utility(self.threshold_, self.params_)


class NashThresholdPolicy(ThresholdPolicy):
    """Symmetric Bayesian-Nash equilibrium threshold."""

    def __init__(self, n_agents="inf", lam=1.0, sigma_x_sq=1.0, sigma_z_sq=1.0,
                 quadrature_nodes=96):
        self.n_agents = n_agents
        self.lam = lam
        self.sigma_x_sq = sigma_x_sq
        self.sigma_z_sq = sigma_z_sq
        self.quadrature_nodes = quadrature_nodes

    def _resolve_threshold(self, params):
        self.solution_ = equilibrium.ne_threshold(params, QuadratureSpec(self.quadrature_nodes))
        return self.solution_.tau_star


class CertaintyEquivalentPolicy(ThresholdPolicy):
    """Oracle rule applied to the MMSE estimate of the state."""

    def __init__(self, n_agents="inf", lam=1.0, sigma_x_sq=1.0, sigma_z_sq=1.0):
        self.n_agents = n_agents
        self.lam = lam
        self.sigma_x_sq = sigma_x_sq
        self.sigma_z_sq = sigma_z_sq

    def _resolve_threshold(self, params):
        return equilibrium.ce_threshold(params)


class OraclePolicy(ThresholdPolicy):
    """Perfect-information threshold applied directly to the signal."""

    def __init__(self, n_agents="inf", lam=1.0, sigma_x_sq=1.0, sigma_z_sq=1.0):
        self.n_agents = n_agents
        self.lam = lam
        self.sigma_x_sq = sigma_x_sq
        self.sigma_z_sq = sigma_z_sq

    def _resolve_threshold(self, params):
        return equilibrium.oracle_threshold(params)


def oracle_actions(x, params: GameParams) -> np.ndarray:
    """Oracle action 1(x <= oracle threshold) for an array of states."""
    return (np.asarray(x, dtype=float) <= equilibrium.oracle_threshold(params)).astype(int)
