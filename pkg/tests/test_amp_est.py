import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from qcloseness.amp_est import (
    EstimationResult,
    amp_est,
    amplify,
    rounds_for_confidence,
    sin_error_bound,
    sqrt_amp_config,
    sqrt_amp_est,
    sqrt_amp_queries,
    sqrt_stability_check,
)
from qcloseness.oracles import CountingOracle, bernoulli_oracle, build_grover_iterate
from qcloseness.phase_est import outcome_distribution
from qcloseness.qlin import DimensionError, StateVector, identity

from conftest import SQRT_HALF, binomial_floor


def oracle(p, seed=0):
    return CountingOracle(bernoulli_oracle(p, b_qubits=1, seed=seed))


def estimate_distribution(p, delta, seed=0):
    """(estimates, probabilities) over every register outcome of one run."""
    u = oracle(p, seed)
    cfg = sqrt_amp_config(delta)
    start = StateVector(u.op.matrix[:, 0])
    probs = outcome_distribution(build_grover_iterate(u), start, cfg).probabilities
    phis = np.arange(probs.size) / probs.size
    return np.minimum(1.0, np.abs(np.sin(np.pi * phis))), probs, phis


def test_result_validation():
    with pytest.raises(ValueError):
        EstimationResult(1.5, 3)
    assert EstimationResult(0.2, 3).repetitions == 1


def test_p_zero_is_exact():
    for s in range(5):
        assert sqrt_amp_est(oracle(0.0), 0.1, s).estimate == pytest.approx(0.0, abs=1e-12)
        assert amp_est(oracle(0.0), 0.1, s).estimate == pytest.approx(0.0, abs=1e-12)


def test_p_one():
    hits = [abs(sqrt_amp_est(oracle(1.0), 0.1, s).estimate - 1) < 1e-12 for s in range(30)]
    assert np.mean(hits) >= 2 / 3


def test_p_half_exact():
    for s in range(5):
        assert sqrt_amp_est(oracle(0.5), 0.05, s).estimate == pytest.approx(SQRT_HALF, abs=1e-12)


@pytest.mark.parametrize("delta, queries", [(0.2, 127), (0.1, 255), (0.05, 511), (0.025, 1023),
                                            (0.0125, 2047)])
def test_query_count_closed_form(delta, queries):
    u = oracle(0.3)
    res = sqrt_amp_est(u, delta, 0)
    assert res.queries_used == queries == u.query_count == sqrt_amp_queries(delta)


def test_query_law_ratio():
    grid = [0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625]
    counts = [sqrt_amp_queries(d) for d in grid]
    for coarse, fine in zip(counts, counts[1:]):
        assert 1.8 <= fine / coarse <= 2.2
    assert counts == [127, 255, 511, 1023, 2047, 4095]


def test_amp_est_uses_half_delta():
    u = oracle(0.3)
    res = amp_est(u, 0.1, 0)
    assert res.queries_used == sqrt_amp_queries(0.05)


def test_malformed_block():
    with pytest.raises(DimensionError):
        sqrt_amp_est(identity(0), 0.1)
    with pytest.raises(ValueError):
        sqrt_amp_est(oracle(0.2), 1.5)


def test_amp_est_calibration_sampled():
    hits = [abs(amp_est(oracle(0.5), 0.05, s).estimate - 0.5) < 0.05 for s in range(500)]
    assert np.mean(hits) >= binomial_floor(500)


@pytest.mark.parametrize("p", [0.01, 0.1, 0.25, 0.5, 0.75, 0.9])
@pytest.mark.parametrize("delta", [0.1, 0.05, 0.02])
def test_success_probability_exact(p, delta):
    est, probs, _ = estimate_distribution(p, delta)
    assert probs[np.abs(est - math.sqrt(p)) < delta].sum() >= 2 / 3


@pytest.mark.parametrize("p", [0.05, 0.3, 0.6, 0.95])
def test_lipschitz_chain(p):
    est, probs, phis = estimate_distribution(p, 0.05)
    for e, phi in zip(est[probs > 1e-12], phis[probs > 1e-12]):
        assert abs(e - math.sqrt(p)) <= sin_error_bound(phi, p) + 1e-12


@pytest.mark.parametrize("p", [0.1, 0.4, 0.8])
def test_both_eigenvectors(p):
    # outcomes in the lower half sit near theta/pi, upper half near 1 - theta/pi
    delta = 0.05
    est, probs, phis = estimate_distribution(p, delta)
    ok = np.abs(est - math.sqrt(p)) < delta
    lower, upper = phis < 0.5, phis >= 0.5
    assert probs[lower].sum() == pytest.approx(0.5, abs=0.05)
    assert probs[lower & ok].sum() / probs[lower].sum() >= 2 / 3
    assert probs[upper & ok].sum() / probs[upper].sum() >= 2 / 3


@settings(max_examples=60, deadline=None)
@given(p=st.floats(0, 1), seed=st.integers(0, 2**31))
def test_reduction_bound(p, seed):
    res = sqrt_amp_est(oracle(p), 0.05, seed)
    x = res.estimate
    assert abs(x * x - p) <= 2 * abs(x - math.sqrt(p)) + 1e-12


def test_amplify_single_round_is_single_shot():
    child = np.random.SeedSequence(4).spawn(1)[0]
    single = sqrt_amp_est(oracle(0.3), 0.05, np.random.default_rng(child))
    amped = amplify(lambda rng: sqrt_amp_est(oracle(0.3), 0.05, rng), 1, 4)
    assert amped.estimate == single.estimate
    assert amped.queries_used == single.queries_used


def test_amplify_median_and_cost():
    values = iter([0.1, 0.9, 0.2])
    res = amplify(lambda rng: EstimationResult(next(values), 10), 3, 0)
    assert res.estimate == 0.2
    assert res.queries_used == 30
    assert res.repetitions == 3
    assert res.raw_outcomes == (0.1, 0.9, 0.2)


@pytest.mark.parametrize("rounds", [0, 2, -1])
def test_amplify_needs_odd_rounds(rounds):
    with pytest.raises(ValueError):
        amplify(lambda rng: EstimationResult(0.1, 1), rounds)


def test_amplify_fifteen_rounds():
    # single shots drawn from the exact register distribution of one run
    est, probs, _ = estimate_distribution(0.3, 0.05)

    def shot(rng):
        return EstimationResult(float(est[rng.choice(probs.size, p=probs)]), 0)

    hits = [abs(amplify(shot, 15, s).estimate - math.sqrt(0.3)) < 0.05 for s in range(1000)]
    assert np.mean(hits) >= 0.95


def test_amplify_fifteen_rounds_end_to_end():
    hits = []
    for s in range(60):
        res = amplify(lambda rng: sqrt_amp_est(oracle(0.3), 0.05, rng), 15, s)
        hits.append(abs(res.estimate - math.sqrt(0.3)) < 0.05)
        assert res.queries_used == 15 * sqrt_amp_queries(0.05)
    assert np.mean(hits) >= 0.9


def test_rounds_for_confidence():
    assert rounds_for_confidence(8 / 9) == 13
    assert binom.sf(2, 5, 2 / 3) < 8 / 9
    assert binom.sf(6, 13, 2 / 3) >= 8 / 9
    assert rounds_for_confidence(2 / 3) == 1


def test_amplify_tail_bound():
    for r in (1, 5, 15, 31):
        assert binom.cdf(r // 2, r, 2 / 3) <= math.exp(-r / 18)


def test_sqrt_stability_examples():
    eps = 0.04
    assert not sqrt_stability_check(0.0, eps, eps)
    assert sqrt_stability_check(0.0, 0.999 * eps, eps)
    assert sqrt_stability_check(0.3, 0.3, eps)
    assert sqrt_stability_check(0.25, 0.26, 0.011)
    with pytest.raises(ValueError):
        sqrt_stability_check(0.1, 0.5, 0.1)
    with pytest.raises(ValueError):
        sqrt_stability_check(-0.1, 0.0, 0.1)


@settings(max_examples=300, deadline=None)
@given(x=st.floats(0, 1), frac=st.floats(-0.999, 0.999), eps=st.floats(1e-6, 1))
def test_sqrt_stability_property(x, frac, eps):
    x_tilde = max(0.0, x + frac * eps)
    assert sqrt_stability_check(x, x_tilde, eps)
