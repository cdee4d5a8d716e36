"""Square-root amplitude estimation and the amplitude estimation it reproduces.

For U|0>_A|0>_B = sqrt(p)|0>|phi_0> + sqrt(1-p)|1>|phi_1>, phase estimation
of the Grover iterate on U|0>|0> returns a phase near theta/pi or
1 - theta/pi, theta = arcsin(sqrt(p)). Both branches give |sin(pi phi)|
within pi*delta of sqrt(p), so the register resolution is delta/pi.

One run uses U once to prepare U|0>|0> and the Grover iterate 2^t - 1 times,
i.e. 2^(t+1) - 1 applications of U in total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .oracles import as_circuit, build_grover_iterate
from .phase_est import PhaseEstimateConfig, PhaseOutcome, run_phase_estimation
from .qlin import DimensionError, StateVector, rng_from


@dataclass(frozen=True)
class EstimationResult:
    estimate: float
    queries_used: int
    repetitions: int = 1
    raw_outcomes: tuple[float, ...] = ()
    phases: tuple[PhaseOutcome, ...] = field(default=(), repr=False)
    # sample-based estimators report copies consumed here and zero queries
    samples_used: int = 0

    def __post_init__(self):
        if not 0.0 <= self.estimate <= 1.0:
            raise ValueError(f"estimate {self.estimate} outside [0, 1]")


def sqrt_amp_config(delta: float, epsilon_fail: float = 1 / 3) -> PhaseEstimateConfig:
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return PhaseEstimateConfig(delta / math.pi, epsilon_fail)


def sqrt_amp_queries(delta: float, epsilon_fail: float = 1 / 3) -> int:
    """Applications of U made by one ``sqrt_amp_est`` run."""
    return (1 << (sqrt_amp_config(delta, epsilon_fail).num_ancillas + 1)) - 1


def _prepare(circuit) -> StateVector:
    if circuit.num_qubits < 1:
        raise DimensionError("block encoding needs a one-qubit A register")
    return circuit.apply(StateVector.basis(0, circuit.num_qubits))


def sqrt_amp_est(u, delta: float, seed=None, epsilon_fail: float = 1 / 3,
                 backend: str = "auto") -> EstimationResult:
    """Estimate sqrt(p) to within ``delta`` with probability >= 1 - epsilon_fail.

    ``u`` is a CountingOracle or QueryCircuit whose qubit 0 is the A register.
    ``queries_used`` sums the counter increments of every underlying oracle.
    """
    cfg = sqrt_amp_config(delta, epsilon_fail)
    circuit = as_circuit(u)
    before = circuit.total_queries()
    start = _prepare(circuit)
    q = build_grover_iterate(circuit)
    outcome = run_phase_estimation(q, start, cfg, rng_from(seed), backend=backend)
    estimate = min(1.0, abs(math.sin(math.pi * outcome.phi_tilde)))
    return EstimationResult(
        estimate=estimate,
        queries_used=circuit.total_queries() - before,
        raw_outcomes=(estimate,),
        phases=(outcome,),
    )


def amp_est(u, delta: float, seed=None, epsilon_fail: float = 1 / 3,
            backend: str = "auto") -> EstimationResult:
    """Estimate p by squaring a delta/2 estimate of sqrt(p)."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    inner = sqrt_amp_est(u, delta / 2, seed, epsilon_fail, backend)
    return EstimationResult(
        estimate=inner.estimate ** 2,
        queries_used=inner.queries_used,
        raw_outcomes=inner.raw_outcomes,
        phases=inner.phases,
    )


def amplify(estimator: Callable[[np.random.Generator], EstimationResult], rounds: int,
            seed=None) -> EstimationResult:
    """Median of ``rounds`` independent runs of ``estimator``.

    If each run succeeds with probability >= 2/3, the median fails with
    probability <= exp(-rounds/18).
    """
    if rounds < 1 or rounds % 2 == 0:
        raise ValueError("rounds must be a positive odd integer")
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(2**63))
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(rounds)
    results = [estimator(np.random.default_rng(c)) for c in children]
    values = [r.estimate for r in results]
    return EstimationResult(
        estimate=float(np.median(values)),
        queries_used=sum(r.queries_used for r in results),
        repetitions=rounds,
        raw_outcomes=tuple(values),
        phases=tuple(p for r in results for p in r.phases),
        samples_used=sum(r.samples_used for r in results),
    )


def rounds_for_confidence(target: float, base: float = 2 / 3) -> int:
    """Smallest odd number of median rounds reaching success ``target``."""
    from scipy.stats import binom

    r = 1
    while binom.sf(r // 2, r, base) < target:
        r += 2
    return r


def sqrt_stability_check(x: float, x_tilde: float, eps: float) -> bool:
    """Whether |sqrt(x) - sqrt(x_tilde)| < sqrt(eps), given |x - x_tilde| <= eps.

    The bound is strict whenever |x - x_tilde| < eps; at x = 0, x_tilde = eps it
    becomes an equality and the check returns False.
    """
    if x < 0 or x_tilde < 0 or eps <= 0:
        raise ValueError("need x, x_tilde >= 0 and eps > 0")
    if abs(x - x_tilde) > eps:
        raise ValueError(f"|x - x_tilde| = {abs(x - x_tilde)} exceeds eps = {eps}")
    return abs(math.sqrt(x) - math.sqrt(x_tilde)) < math.sqrt(eps)


def sin_error_bound(phi_tilde: float, p: float) -> float:
    """pi times the distance from phi_tilde to the nearer of theta/pi, 1 - theta/pi."""
    theta = math.asin(math.sqrt(p))
    d_plus = abs(phi_tilde - theta / math.pi)
    d_minus = abs(phi_tilde - (1 - theta / math.pi))
    return math.pi * min(d_plus, 1 - d_plus, d_minus, 1 - d_minus)
