"""Pure-state trace distance and fidelity estimators.

Optimal estimators run square-root amplitude estimation on W or W' and cost
O(1/eps) queries. The SWAP-test baselines estimate F^2 first and take square
roots afterwards, which costs O(1/eps^2) queries or O(1/eps^4) samples for
T and F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .amp_est import EstimationResult, amp_est, sqrt_amp_est
from .oracles import PreparedPair, QueryCircuit, build_w, build_w_prime
from .qlin import (
    H,
    MeasurementDistribution,
    StateVector,
    UnitaryOp,
    apply,
    compose,
    controlled,
    identity,
    marginal_distribution,
    rng_from,
    swap_registers,
    tensor,
)

METHODS = ("optimal", "folklore_query", "folklore_sample", "exact")
QUANTITIES = ("td", "f", "f2")


@dataclass(frozen=True)
class ClosenessReport:
    trace_distance: float
    sqrt_fidelity: float
    squared_fidelity: float
    method: str
    queries_or_samples: int = 0
    # cost of each quantity when they were estimated separately
    costs: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def helstrom_error(self) -> float:
        """Minimum error of discriminating the two states with equal priors."""
        return 0.5 - self.trace_distance / 2

    def as_dict(self) -> dict:
        return {
            "trace_distance": self.trace_distance,
            "sqrt_fidelity": self.sqrt_fidelity,
            "squared_fidelity": self.squared_fidelity,
            "helstrom_error": self.helstrom_error,
            "method": self.method,
            "queries_or_samples": self.queries_or_samples,
            "costs": dict(self.costs),
        }


def _check_eps(eps):
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def exact_closeness(pair: PreparedPair) -> ClosenessReport:
    """Ground truth from the state vectors; uses no queries."""
    phi, psi = pair.states()
    ov = np.vdot(phi.amplitudes, psi.amplitudes)
    f = min(1.0, abs(ov))
    f2 = f * f
    # norm of the part of psi orthogonal to phi; avoids sqrt(1 - f^2) cancellation near f = 1
    t = min(1.0, float(np.linalg.norm(psi.amplitudes - ov * phi.amplitudes)))
    return ClosenessReport(
        trace_distance=t,
        sqrt_fidelity=f,
        squared_fidelity=f2,
        method="exact",
    )


def exact_value(pair: PreparedPair, quantity: str) -> float:
    rep = exact_closeness(pair)
    return {"td": rep.trace_distance, "f": rep.sqrt_fidelity, "f2": rep.squared_fidelity}[quantity]


# -- optimal estimators ------------------------------------------------------

def estimate_trace_distance(pair: PreparedPair, eps: float, seed=None, **kwargs) -> EstimationResult:
    _check_eps(eps)
    return sqrt_amp_est(build_w(pair), eps, seed, **kwargs)


def estimate_sqrt_fidelity(pair: PreparedPair, eps: float, seed=None, **kwargs) -> EstimationResult:
    _check_eps(eps)
    return sqrt_amp_est(build_w_prime(pair), eps, seed, **kwargs)


def estimate_squared_fidelity(pair: PreparedPair, eps: float, seed=None, **kwargs) -> EstimationResult:
    """1 - x^2 for an eps/2 estimate x of the trace distance."""
    _check_eps(eps)
    inner = estimate_trace_distance(pair, eps / 2, seed, **kwargs)
    return EstimationResult(
        estimate=1.0 - inner.estimate ** 2,
        queries_used=inner.queries_used,
        raw_outcomes=inner.raw_outcomes,
        phases=inner.phases,
    )


def optimal_estimators(pair: PreparedPair, eps: float, seed=None) -> ClosenessReport:
    rng = rng_from(seed)
    td = estimate_trace_distance(pair, eps, rng)
    f = estimate_sqrt_fidelity(pair, eps, rng)
    f2 = estimate_squared_fidelity(pair, eps, rng)
    costs = {"td": td.queries_used, "f": f.queries_used, "f2": f2.queries_used}
    return ClosenessReport(td.estimate, f.estimate, f2.estimate, "optimal",
                           sum(costs.values()), costs)


# -- SWAP test -----------------------------------------------------------------

def swap_test_circuit(k: int) -> UnitaryOp:
    """H - controlled-SWAP - H on an ancilla and two k-qubit registers."""
    h_anc = tensor(H, identity(2 * k))
    return compose(h_anc, controlled(swap_registers(k)), h_anc)


def swap_test_distribution(pair: PreparedPair) -> MeasurementDistribution:
    """Exact ancilla distribution of the SWAP test on |0>|phi>|psi>."""
    phi, psi = pair.states()
    start = StateVector(np.kron([1.0, 0.0], np.kron(phi.amplitudes, psi.amplitudes)))
    out = apply(swap_test_circuit(pair.num_qubits), start)
    return marginal_distribution(out, [0])


def swap_test_shot(pair: PreparedPair, seed=None) -> int:
    """One SWAP-test measurement; consumes one copy of each state."""
    p0 = swap_test_distribution(pair)[0]
    return 0 if rng_from(seed).random() < p0 else 1


def hoeffding_shots(err: float) -> int:
    """Shots so that 2*freq - 1 is within ``err`` of F^2 with probability >= 2/3.

    Hoeffding on the frequency at error err/2: N = ceil(ln 6 / (2 (err/2)^2)).
    """
    return math.ceil(math.log(6) / (2 * (err / 2) ** 2))


def _sampled_f2(pair: PreparedPair, err: float, rng) -> tuple[float, int]:
    shots = hoeffding_shots(err)
    p0 = swap_test_distribution(pair)[0]
    # a sum of independent shots is binomial; draw it in one go
    zeros = rng.binomial(shots, min(1.0, p0))
    return float(np.clip(2 * zeros / shots - 1, 0.0, 1.0)), shots


def folklore_sample_f2(pair, eps, seed=None) -> EstimationResult:
    _check_eps(eps)
    est, shots = _sampled_f2(pair, eps, rng_from(seed))
    return EstimationResult(est, 0, raw_outcomes=(est,), samples_used=shots)


def folklore_sample_f(pair, eps, seed=None) -> EstimationResult:
    _check_eps(eps)
    f2, shots = _sampled_f2(pair, eps ** 2, rng_from(seed))
    return EstimationResult(math.sqrt(f2), 0, raw_outcomes=(f2,), samples_used=shots)


def folklore_sample_td(pair, eps, seed=None) -> EstimationResult:
    _check_eps(eps)
    f2, shots = _sampled_f2(pair, eps ** 2, rng_from(seed))
    return EstimationResult(math.sqrt(1.0 - f2), 0, raw_outcomes=(f2,), samples_used=shots)


def folklore_sample_estimators(pair: PreparedPair, eps: float, seed=None) -> ClosenessReport:
    """F^2 at error eps; T and F from one F^2 estimate at error eps^2."""
    _check_eps(eps)
    rng = rng_from(seed)
    f2, n_f2 = _sampled_f2(pair, eps, rng)
    fine, n_fine = _sampled_f2(pair, eps ** 2, rng)
    costs = {"f2": n_f2, "f": n_fine, "td": n_fine}
    return ClosenessReport(math.sqrt(1.0 - fine), math.sqrt(fine), f2, "folklore_sample",
                           n_f2 + n_fine, costs)


def swap_test_oracle_circuit(pair: PreparedPair) -> QueryCircuit:
    """The SWAP test with U_phi (x) U_psi in front; Pr[A=0] = (1 + F^2)/2."""
    k = pair.num_qubits
    prep = tensor(identity(1), pair.u_phi.op, pair.u_psi.op)
    op = compose(swap_test_circuit(k), prep)
    return QueryCircuit(op, ((pair.u_phi, 1), (pair.u_psi, 1)))


def _queried_f2(pair: PreparedPair, err: float, rng, **kwargs) -> EstimationResult:
    inner = amp_est(swap_test_oracle_circuit(pair), err / 2, rng, **kwargs)
    est = min(1.0, max(0.0, 2 * inner.estimate - 1))
    return EstimationResult(est, inner.queries_used, raw_outcomes=inner.raw_outcomes,
                            phases=inner.phases)


def folklore_query_f2(pair, eps, seed=None, **kwargs) -> EstimationResult:
    _check_eps(eps)
    return _queried_f2(pair, eps, rng_from(seed), **kwargs)


def folklore_query_f(pair, eps, seed=None, **kwargs) -> EstimationResult:
    _check_eps(eps)
    r = _queried_f2(pair, eps ** 2, rng_from(seed), **kwargs)
    return EstimationResult(math.sqrt(r.estimate), r.queries_used, raw_outcomes=(r.estimate,),
                            phases=r.phases)


def folklore_query_td(pair, eps, seed=None, **kwargs) -> EstimationResult:
    _check_eps(eps)
    r = _queried_f2(pair, eps ** 2, rng_from(seed), **kwargs)
    return EstimationResult(math.sqrt(1.0 - r.estimate), r.queries_used,
                            raw_outcomes=(r.estimate,), phases=r.phases)


def folklore_query_estimators(pair: PreparedPair, eps: float, seed=None) -> ClosenessReport:
    _check_eps(eps)
    rng = rng_from(seed)
    f2 = _queried_f2(pair, eps, rng)
    fine = _queried_f2(pair, eps ** 2, rng)
    costs = {"f2": f2.queries_used, "f": fine.queries_used, "td": fine.queries_used}
    return ClosenessReport(math.sqrt(1.0 - fine.estimate), math.sqrt(fine.estimate),
                           f2.estimate, "folklore_query",
                           f2.queries_used + fine.queries_used, costs)


ESTIMATORS = {
    ("optimal", "td"): estimate_trace_distance,
    ("optimal", "f"): estimate_sqrt_fidelity,
    ("optimal", "f2"): estimate_squared_fidelity,
    ("folklore_query", "td"): folklore_query_td,
    ("folklore_query", "f"): folklore_query_f,
    ("folklore_query", "f2"): folklore_query_f2,
    ("folklore_sample", "td"): folklore_sample_td,
    ("folklore_sample", "f"): folklore_sample_f,
    ("folklore_sample", "f2"): folklore_sample_f2,
}


def get_estimator(method: str, quantity: str):
    try:
        return ESTIMATORS[(method, quantity)]
    except KeyError:
        raise ValueError(f"no estimator for method={method!r}, quantity={quantity!r}") from None
