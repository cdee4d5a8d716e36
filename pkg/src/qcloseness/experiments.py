"""Seeded experiment harness: eps sweeps, scaling fits and distinguishing runs.

Every trial draws its own generator from ``SeedSequence(seed).spawn``, so
results are identical whether trials run serially or on a thread pool.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .amp_est import amplify, rounds_for_confidence
from .closeness import (
    estimate_squared_fidelity,
    estimate_trace_distance,
    exact_value,
    get_estimator,
)
from .oracles import CountingOracle, PreparedPair, build_distribution_oracle, pad_distribution
from .qlin import StateVector, UnitaryOp, complete_to_unitary, haar_unitary, rng_from

SCHEMA_VERSION = 1
DEFAULT_EPS_GRID = (0.1, 0.05, 0.025, 0.0125)
DEFAULT_N = 8
CSV_HEADER = ("schema", "method", "eps", "trials", "success_rate", "mean_queries",
              "exact_value", "seed")
# median rounds lifting a 2/3 estimator to the 8/9 the F^2 distinguisher needs
F2_DISTINGUISH_ROUNDS = rounds_for_confidence(8 / 9)

METHODS = {
    f"{family}_{q}": (family, q)
    for family in ("optimal", "folklore_query", "folklore_sample")
    for q in ("td", "f", "f2")
}


# -- distributions and states used by the lower-bound reductions --------------

def pm_distribution(eps: float, n: int, sign: int = +1) -> np.ndarray:
    """p(j) = (1 + sign * (-1)^j * 2 eps) / n for j = 0..n-1."""
    if n < 2 or n % 2:
        raise ValueError("n must be an even integer >= 2")
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    j = np.arange(n)
    return (1 + sign * (-1.0) ** j * 2 * eps) / n


def comb_state(n: int) -> StateVector:
    """sqrt(2/n) * sum_j |2j>, zero-padded to a power-of-two dimension."""
    if n < 2 or n % 2:
        raise ValueError("n must be an even integer >= 2")
    amps = np.zeros(n)
    amps[::2] = math.sqrt(2 / n)
    return StateVector(np.sqrt(pad_distribution(amps ** 2)))


def hellinger(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"support sizes differ: {p.shape} vs {q.shape}")
    return float(math.sqrt(max(0.0, 0.5 * np.sum((np.sqrt(p) - np.sqrt(q)) ** 2))))


# -- sweeps ----------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentRecord:
    method: str
    eps: float
    trials: int
    success_rate: float
    mean_queries: float
    exact_value: float
    seed: int
    schema: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0.0 <= self.success_rate <= 1.0:
            raise ValueError("success_rate must lie in [0, 1]")

    def as_row(self) -> dict:
        return {k: getattr(self, k) for k in CSV_HEADER}


PairFamily = Callable[[np.random.Generator], PreparedPair]


def haar_pairs(num_qubits: int) -> PairFamily:
    """A fresh Haar-random pair per trial."""
    return lambda rng: PreparedPair.haar(num_qubits, rng)


def fixed_pair(phi: UnitaryOp, psi: UnitaryOp) -> PairFamily:
    """The same two states every trial, with fresh counters."""
    return lambda rng: PreparedPair.from_unitaries(phi, psi)


def _trial_rngs(seed, count):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _run_trials(fn, rngs, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, rngs))
    return [fn(r) for r in rngs]


def sweep(pair_family: PairFamily, method: str, eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
          trials: int = 100, seed: int = 0, jobs: int = 1) -> list[ExperimentRecord]:
    """One record per eps: success rate of |estimate - exact| < eps and mean cost.

    Cost is queries for query methods and samples for ``folklore_sample_*``.
    ``exact_value`` is the mean ground truth over the trial pairs.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    if not eps_grid or any(not 0 < e < 1 for e in eps_grid):
        raise ValueError("eps values must lie in (0, 1)")
    if trials < 100:
        raise ValueError("sweeps need at least 100 trials")
    family, quantity = METHODS[method]
    estimator = get_estimator(family, quantity)
    records = []
    for i, eps in enumerate(eps_grid):
        def trial(rng, eps=eps):
            pair = pair_family(rng)
            truth = exact_value(pair, quantity)
            res = estimator(pair, eps, rng)
            cost = res.samples_used if family == "folklore_sample" else res.queries_used
            return abs(res.estimate - truth) < eps, cost, truth

        outcomes = _run_trials(trial, _trial_rngs([seed, i], trials), jobs)
        ok, cost, truth = zip(*outcomes)
        records.append(ExperimentRecord(
            method=method,
            eps=float(eps),
            trials=trials,
            success_rate=float(np.mean(ok)),
            mean_queries=float(np.mean(cost)),
            exact_value=float(np.mean(truth)),
            seed=seed,
        ))
    return records


def fit_scaling(records: Sequence[ExperimentRecord]) -> float:
    """Least-squares slope of log(mean_queries) against log(1/eps)."""
    eps = np.array([r.eps for r in records], dtype=float)
    cost = np.array([r.mean_queries for r in records], dtype=float)
    if np.unique(eps).size < 3:
        raise ValueError("need at least three distinct eps values")
    if np.any(cost <= 0):
        raise ValueError("mean_queries must be positive")
    slope, _ = np.polyfit(np.log(1 / eps), np.log(cost), 1)
    return float(slope)


def binomial_guard(success_rate: float, trials: int, target: float = 2 / 3) -> bool:
    """success_rate >= target - 3 sigma, sigma the binomial std of the rate."""
    sigma = math.sqrt(success_rate * (1 - success_rate) / trials)
    return success_rate >= target - 3 * sigma


def records_to_csv(records: Sequence[ExperimentRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_HEADER, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.as_row().items()})
    return buf.getvalue()


def records_to_json(records: Sequence[ExperimentRecord]) -> str:
    return json.dumps({"schema": SCHEMA_VERSION, "records": [asdict(r) for r in records]})


# -- distinguishing p+ from p- -------------------------------------------------

@dataclass(frozen=True)
class DistinguishOutcome:
    verdict: str
    statistic_d: float
    queries: int
    truth: str | None = None

    @property
    def correct(self) -> bool:
        return self.truth == self.verdict


def distribution_oracle(eps: float, n: int, sign: int) -> CountingOracle:
    name = "U_p+" if sign > 0 else "U_p-"
    return CountingOracle(build_distribution_oracle(pm_distribution(eps, n, sign), n), name)


def distinguish_td(u_unknown: CountingOracle, eps: float, n: int = DEFAULT_N,
                   seed=None) -> DistinguishOutcome:
    """Say p+ iff the trace distance to U_{p+}|0> is estimated below eps."""
    reference = distribution_oracle(eps, n, +1)
    before = u_unknown.query_count
    res = estimate_trace_distance(PreparedPair(u_unknown, reference), eps, seed)
    verdict = "p_plus" if res.estimate < eps else "p_minus"
    return DistinguishOutcome(verdict, res.estimate, u_unknown.query_count - before)


def distinguish_f2(u_unknown: CountingOracle, eps: float, n: int = DEFAULT_N, seed=None,
                   rounds: int = F2_DISTINGUISH_ROUNDS) -> DistinguishOutcome:
    """Say p+ iff F^2 with the comb state is estimated above 1/2.

    The F^2 estimate is the median of ``rounds`` runs at error eps.
    """
    comb = CountingOracle(complete_to_unitary(comb_state(n).amplitudes), "U_comb")
    pair = PreparedPair(u_unknown, comb)
    before = u_unknown.query_count
    res = amplify(lambda rng: estimate_squared_fidelity(pair, eps, rng), rounds, seed)
    verdict = "p_plus" if res.estimate > 0.5 else "p_minus"
    return DistinguishOutcome(verdict, res.estimate, u_unknown.query_count - before)


@dataclass(frozen=True)
class DistinguishSummary:
    which: str
    eps: float
    n: int
    trials_per_truth: int
    success_plus: float
    success_minus: float
    mean_queries: float
    seed: int

    @property
    def success_rate(self) -> float:
        return (self.success_plus + self.success_minus) / 2

    @property
    def sigma(self) -> float:
        total = 2 * self.trials_per_truth
        s = self.success_rate
        return math.sqrt(s * (1 - s) / total)

    def passes(self) -> bool:
        return binomial_guard(self.success_rate, 2 * self.trials_per_truth)


def run_distinguishing(which: str, eps: float = 0.1, n: int = DEFAULT_N, trials: int = 300,
                       seed: int = 0, jobs: int = 1, rounds: int = F2_DISTINGUISH_ROUNDS
                       ) -> tuple[DistinguishSummary, list[DistinguishOutcome]]:
    """Run ``trials`` distinguishing experiments for each ground truth.

    The ground truth stays in the harness; the distinguisher sees only a fresh
    counting oracle for U_{p+} or U_{p-}.
    """
    if which not in ("td", "f2"):
        raise ValueError("which must be 'td' or 'f2'")
    outcomes = []
    rates = {}
    for i, (truth, sign) in enumerate((("p_plus", +1), ("p_minus", -1))):
        def trial(rng, sign=sign, truth=truth):
            oracle = distribution_oracle(eps, n, sign)
            if which == "td":
                out = distinguish_td(oracle, eps, n, rng)
            else:
                out = distinguish_f2(oracle, eps, n, rng, rounds)
            return replace(out, truth=truth)

        batch = _run_trials(trial, _trial_rngs([seed, i], trials), jobs)
        rates[truth] = float(np.mean([o.correct for o in batch]))
        outcomes.extend(batch)
    summary = DistinguishSummary(
        which=which, eps=eps, n=n, trials_per_truth=trials,
        success_plus=rates["p_plus"], success_minus=rates["p_minus"],
        mean_queries=float(np.mean([o.queries for o in outcomes])), seed=seed,
    )
    return summary, outcomes


# -- named state families -------------------------------------------------------

def family_oracle(name: str, **params) -> UnitaryOp:
    """State-preparation unitary for a named family.

    basis(k, index=0), hadamard(k), haar(k, seed), pplus(eps, n), pminus(eps, n),
    comb(n). ``k`` is a qubit count.
    """
    if name == "basis":
        k = int(params.pop("k", 1))
        index = int(params.pop("index", 0))
        if not 0 <= index < (1 << k):
            raise ValueError(f"basis index {index} out of range for {k} qubits")
        state = StateVector.basis(index, k).amplitudes
        op = complete_to_unitary(state)
    elif name == "hadamard":
        k = int(params.pop("k", 1))
        op = complete_to_unitary(np.full(1 << k, 2 ** (-k / 2)))
    elif name == "haar":
        k = int(params.pop("k", 1))
        op = haar_unitary(1 << k, rng_from(int(params.pop("seed", 0))))
    elif name in ("pplus", "pminus"):
        eps = float(params.pop("eps"))
        n = int(params.pop("n", DEFAULT_N))
        op = build_distribution_oracle(pm_distribution(eps, n, +1 if name == "pplus" else -1), n)
    elif name == "comb":
        op = complete_to_unitary(comb_state(int(params.pop("n", DEFAULT_N))).amplitudes)
    else:
        raise ValueError(f"unknown state family {name!r}")
    if params:
        raise ValueError(f"unexpected parameters for {name}: {sorted(params)}")
    return op
