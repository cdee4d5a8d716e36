"""Acceptance criteria, each printed as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the status lines are written
straight to the terminal.
"""

import math
import time

import numpy as np
import pytest

from qcloseness.amp_est import sqrt_amp_est, sqrt_stability_check
from qcloseness.closeness import estimate_trace_distance, exact_closeness, swap_test_distribution
from qcloseness.experiments import (
    DEFAULT_EPS_GRID,
    fit_scaling,
    haar_pairs,
    run_distinguishing,
    sweep,
)
from qcloseness.oracles import (
    CountingOracle,
    PreparedPair,
    bernoulli_oracle,
    build_grover_iterate,
    build_w,
    build_w_prime,
)
from qcloseness.qlin import StateVector, marginal_distribution, sample


@pytest.fixture
def report(capsys):
    def emit(number, name, ok, detail, started):
        with capsys.disabled():
            status = "PASS" if ok else "FAIL"
            print(f"\n[{status}] criterion {number} {name}: {detail} ({time.time() - started:.1f}s)")
        assert ok, detail
    return emit


def three_sigma_floor(trials, target=2 / 3):
    return target - 3 * math.sqrt(target * (1 - target) / trials)


def test_criterion_1_scaling(report):
    t0 = time.time()
    opt = sweep(haar_pairs(3), "optimal_td", DEFAULT_EPS_GRID, trials=100, seed=1)
    folk = sweep(haar_pairs(3), "folklore_query_td", DEFAULT_EPS_GRID, trials=100, seed=1)
    e_opt, e_folk = fit_scaling(opt), fit_scaling(folk)
    ok = 0.8 <= e_opt <= 1.2 and 1.8 <= e_folk <= 2.2 and time.time() - t0 < 60
    report(1, "query scaling", ok,
           f"optimal exponent {e_opt:.4f} in [0.8, 1.2], folklore_query exponent "
           f"{e_folk:.4f} in [1.8, 2.2]", t0)


def test_criterion_2_calibration(report):
    t0 = time.time()
    trials = 500
    worst = (1.0, None)
    ok = True
    for pi, p in enumerate((0.01, 0.1, 0.25, 0.5, 0.75, 0.9)):
        for di, delta in enumerate((0.1, 0.05)):
            u = bernoulli_oracle(p, b_qubits=2, seed=pi)
            seeds = np.random.SeedSequence([2, pi, di]).spawn(trials)
            hits = [abs(sqrt_amp_est(CountingOracle(u), delta, np.random.default_rng(s)).estimate
                        - math.sqrt(p)) < delta for s in seeds]
            rate = float(np.mean(hits))
            floor = three_sigma_floor(trials)
            ok &= rate >= floor
            if rate < worst[0]:
                worst = (rate, (p, delta))
    ok &= time.time() - t0 < 300
    report(2, "success calibration", ok,
           f"12 (p, delta) points x {trials} trials, lowest rate {worst[0]:.3f} at "
           f"p={worst[1][0]}, delta={worst[1][1]} (floor {three_sigma_floor(trials):.3f})", t0)


def test_criterion_3_exact_identities(report):
    t0 = time.time()
    worst_exact, worst_w = 0.0, 0.0
    for i in range(100):
        pair = PreparedPair.haar(1 + i % 5, 300 + i)
        r = exact_closeness(pair)
        ov = pair.overlap()
        worst_exact = max(worst_exact, abs(r.trace_distance**2 + r.squared_fidelity - 1),
                          abs(r.sqrt_fidelity - abs(ov)))
        start = StateVector.basis(0, pair.num_qubits + 1)
        p = marginal_distribution(build_w(pair).apply(start), [0])[0]
        p_prime = marginal_distribution(build_w_prime(pair).apply(start), [0])[0]
        worst_w = max(worst_w, abs(p - (1 - abs(ov) ** 2)), abs(p_prime - abs(ov) ** 2))
    ok = worst_exact < 1e-10 and worst_w < 1e-9
    report(3, "exact identities", ok,
           f"max T^2+F^2-1 / F-|<phi|psi>| error {worst_exact:.1e} (< 1e-10), "
           f"max W/W' amplitude error {worst_w:.1e} (< 1e-9)", t0)


def test_criterion_4_grover_spectrum(report):
    t0 = time.time()
    worst = 0.0
    for i in range(50):
        pair = PreparedPair.haar(1 + i % 4, 500 + i)
        w = build_w(pair)
        q = build_grover_iterate(w).op.matrix
        start = w.op.matrix[:, 0]
        p = float(np.sum(np.abs(start[: start.size // 2]) ** 2))
        basis, _ = np.linalg.qr(np.column_stack([start, q @ start]))
        restricted = basis.conj().T @ q @ basis
        phases = np.sort(np.angle(np.linalg.eigvals(restricted)))
        theta = math.asin(math.sqrt(p))
        worst = max(worst, float(np.max(np.abs(phases - [-2 * theta, 2 * theta]))))
    report(4, "Grover spectrum", worst < 1e-8,
           f"max eigenphase error {worst:.1e} over 50 pairs (< 1e-8)", t0)


def test_criterion_5_distinguishing(report):
    t0 = time.time()
    td, _ = run_distinguishing("td", 0.1, 8, trials=300, seed=5)
    f2, _ = run_distinguishing("f2", 0.1, 8, trials=300, seed=5)
    ok = td.passes() and f2.passes() and time.time() - t0 < 120
    report(5, "distinguishing reductions", ok,
           f"td success {td.success_rate:.3f}, f2 success {f2.success_rate:.3f} "
           f"(need >= 2/3 - 3 sigma over 600 runs each)", t0)


def test_criterion_6_swap_test(report):
    t0 = time.time()
    shots = 10_000
    worst_exact, worst_z = 0.0, 0.0
    for i in range(100):
        pair = PreparedPair.haar(1 + i % 3, 700 + i)
        d = swap_test_distribution(pair)
        f2 = exact_closeness(pair).squared_fidelity
        worst_exact = max(worst_exact, abs(d[0] - (1 + f2) / 2))
        freq = float(np.mean(sample(d, 900 + i, size=shots) == 0))
        sigma = math.sqrt(d[0] * (1 - d[0]) / shots)
        worst_z = max(worst_z, abs(freq - d[0]) / sigma if sigma > 0 else 0.0)
    ok = worst_exact < 1e-10 and worst_z <= 3
    report(6, "SWAP-test law", ok,
           f"max |Pr[0] - (1+F^2)/2| {worst_exact:.1e} (< 1e-10), largest sampled deviation "
           f"{worst_z:.2f} sigma at {shots} shots (<= 3)", t0)


def test_criterion_7_sqrt_stability(report):
    t0 = time.time()
    rng = np.random.default_rng(7)
    eps = rng.uniform(1e-6, 1, 10_000)
    x = rng.uniform(0, 1, 10_000)
    x_tilde = np.maximum(0.0, x + rng.uniform(-1, 1, 10_000) * eps * (1 - 1e-9))
    assert np.all(np.abs(x - x_tilde) < eps)
    held = np.array([sqrt_stability_check(a, b, e) for a, b, e in zip(x, x_tilde, eps)])
    # at x = 0, x_tilde = eps the bound is attained, so the strict check is False
    boundary = max(abs(abs(math.sqrt(0) - math.sqrt(e)) - math.sqrt(e)) for e in eps[:100])
    at_boundary = [sqrt_stability_check(0.0, float(e), float(e)) for e in eps[:100]]
    ok = bool(held.all()) and boundary <= 1e-12 and not any(at_boundary)
    report(7, "square-root stability", ok,
           f"{int(held.sum())}/10000 triples satisfy the bound, boundary equality error "
           f"{boundary:.1e} (<= 1e-12)", t0)


def test_criterion_8_reduction_identity(report):
    t0 = time.time()
    checked, violations = 0, 0
    for i, p in enumerate(np.linspace(0, 1, 21)):
        u = bernoulli_oracle(float(p), b_qubits=1, seed=i)
        for s in range(25):
            res = sqrt_amp_est(CountingOracle(u), 0.05, s)
            for x in res.raw_outcomes:
                checked += 1
                violations += abs(x * x - p) > 2 * abs(x - math.sqrt(p)) + 1e-15
    for i in range(100):
        pair = PreparedPair.haar(2, 1100 + i)
        t = exact_closeness(pair).trace_distance
        for x in estimate_trace_distance(pair, 0.05, i).raw_outcomes:
            checked += 1
            violations += abs(x * x - t * t) > 2 * abs(x - t) + 1e-15
    report(8, "reduction identity", violations == 0,
           f"{checked} raw outcomes checked, {violations} violations", t0)
