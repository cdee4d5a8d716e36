"""State-vector simulation of query-optimal pure-state closeness estimators."""

from .amp_est import EstimationResult, amp_est, amplify, sqrt_amp_est
from .closeness import (
    ClosenessReport,
    estimate_squared_fidelity,
    estimate_sqrt_fidelity,
    estimate_trace_distance,
    exact_closeness,
    folklore_query_estimators,
    folklore_sample_estimators,
    optimal_estimators,
)
from .estimators import ClosenessEstimator
from .oracles import CountingOracle, PreparedPair, QueryCircuit
from .phase_est import PhaseEstimateConfig, run_phase_estimation
from .qlin import StateVector, UnitaryOp

__all__ = [
    "ClosenessEstimator", "ClosenessReport", "CountingOracle", "EstimationResult",
    "PhaseEstimateConfig", "PreparedPair", "QueryCircuit", "StateVector", "UnitaryOp",
    "amp_est", "amplify", "estimate_squared_fidelity", "estimate_sqrt_fidelity",
    "estimate_trace_distance", "exact_closeness", "folklore_query_estimators",
    "folklore_sample_estimators", "optimal_estimators", "run_phase_estimation",
    "sqrt_amp_est",
]
__version__ = "0.1.0"
