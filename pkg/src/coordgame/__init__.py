"""Numerical engine for Gaussian global coordination games."""

from .analysis import (
    EfficiencyReport,
    FanoReport,
    coordination_efficiency,
    expected_utility,
    fano_bound,
)
from .equilibrium import (
    NeSolution,
    belief_pi,
    best_response_threshold,
    ce_threshold,
    ne_threshold,
    oracle_threshold,
)
from .estimators import (
    CertaintyEquivalentPolicy,
    NashThresholdPolicy,
    OraclePolicy,
    ThresholdPolicy,
)
from .game import INFINITE, BenefitSpec, GameParams, PolicyProfile
from .montecarlo import SimConfig, SimReport, simulate

__all__ = [
    "INFINITE",
    "BenefitSpec",
    "CertaintyEquivalentPolicy",
    "EfficiencyReport",
    "FanoReport",
    "GameParams",
    "NashThresholdPolicy",
    "NeSolution",
    "OraclePolicy",
    "PolicyProfile",
    "SimConfig",
    "SimReport",
    "ThresholdPolicy",
    "belief_pi",
    "best_response_threshold",
    "ce_threshold",
    "coordination_efficiency",
    "expected_utility",
    "fano_bound",
    "ne_threshold",
    "oracle_threshold",
    "simulate",
]

__version__ = "0.1.0"
