"""Textbook phase estimation with an explicit ancilla register.

Two exact ways to get the phase-register distribution:

``statevector``
    Simulates the circuit: Hadamards on the register, controlled Q^(2^j)
    ladder, dense inverse Fourier transform, Born rule on the register.
``spectral``
    Diagonalizes Q once (complex Schur form; Q is normal so the form is
    diagonal) and mixes the closed-form register distributions of each
    eigenvector, weighted by its overlap with the input. Cost is linear in
    2^t, which keeps large registers tractable.

``auto`` simulates whenever the joint register fits in ``MAX_SIM_QUBITS``.
Either way the oracle is charged for 2^t - 1 controlled applications of Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import schur

from .oracles import as_circuit
from .qlin import (
    DimensionError,
    MeasurementDistribution,
    StateVector,
    marginal_distribution,
    rng_from,
    sample,
)

MAX_SIM_QUBITS = 14
# 2^t - 1 <= SIZING_CONSTANT / (epsilon_fail * delta) for the sizing rule below
SIZING_CONSTANT = 10.0


@dataclass(frozen=True)
class PhaseEstimateConfig:
    delta: float
    epsilon_fail: float = 1 / 3

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0 < self.epsilon_fail < 1:
            raise ValueError(f"epsilon_fail must lie in (0, 1), got {self.epsilon_fail}")

    @property
    def num_ancillas(self) -> int:
        """t = ceil(log2(1/delta)) + ceil(log2(2 + 1/(2 epsilon_fail)))."""
        precision = max(0, math.ceil(math.log2(1 / self.delta)))
        margin = math.ceil(math.log2(2 + 1 / (2 * self.epsilon_fail)))
        return max(1, precision + margin)

    @property
    def applications(self) -> int:
        """Controlled applications of the unitary per run."""
        return (1 << self.num_ancillas) - 1


@dataclass(frozen=True)
class PhaseOutcome:
    raw_index: int
    num_ancillas: int

    @property
    def phi_tilde(self) -> float:
        return self.raw_index / (1 << self.num_ancillas)


def circular_distance(a, b):
    """min(|a - b|, 1 - |a - b|) for phases in full turns."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % 1.0
    return np.minimum(d, 1.0 - d)


@lru_cache(maxsize=16)
def inverse_qft_matrix(t: int) -> np.ndarray:
    n = 1 << t
    k = np.arange(n)
    m = np.exp(-2j * np.pi * np.outer(k, k) / n) / math.sqrt(n)
    m.setflags(write=False)
    return m


def eigenphase_distribution(lam: float, t: int) -> np.ndarray:
    """Register distribution for an eigenvector with eigenvalue e^{2 pi i lam}."""
    n = 1 << t
    # amplitude at x is (1/n) sum_k e^{2 pi i k (lam - x/n)}
    amps = np.fft.fft(np.exp(2j * np.pi * lam * np.arange(n))) / n
    return np.abs(amps) ** 2


def _check_input(q_op, input_state: StateVector):
    if q_op.dim != input_state.dim:
        raise DimensionError(
            f"unitary acts on {q_op.num_qubits} qubits, input state has {input_state.num_qubits}"
        )


def _statevector_distribution(q_matrix: np.ndarray, input_state: StateVector, t: int):
    n_reg = 1 << t
    n_sys = input_state.num_qubits
    # joint amplitudes psi[sys, reg]; system on the high-order qubits
    psi = np.repeat(input_state.amplitudes[:, None], n_reg, axis=1) / math.sqrt(n_reg)
    reg = np.arange(n_reg)
    power = q_matrix
    for j in range(t):
        on = (reg >> j) & 1 == 1
        psi[:, on] = power @ psi[:, on]
        power = power @ power
    psi = psi @ inverse_qft_matrix(t).T
    joint = StateVector(psi.reshape(-1))
    return marginal_distribution(joint, range(n_sys, n_sys + t)).probabilities


def _spectral_distribution(q_matrix: np.ndarray, input_state: StateVector, t: int):
    tri, vecs = schur(q_matrix, output="complex")
    lams = (np.angle(np.diag(tri)) / (2 * np.pi)) % 1.0
    weights = np.abs(vecs.conj().T @ input_state.amplitudes) ** 2
    probs = np.zeros(1 << t)
    # group eigenvectors sharing an eigenphase so each kernel is computed once
    keys = np.round(lams, 12)
    for key in np.unique(keys[weights > 1e-15]):
        mask = keys == key
        probs += weights[mask].sum() * eigenphase_distribution(float(lams[mask][0]), t)
    return probs / probs.sum()


def outcome_distribution(q, input_state: StateVector, cfg: PhaseEstimateConfig,
                         backend: str = "auto") -> MeasurementDistribution:
    """Exact distribution of the measured register index; charges nothing."""
    op = as_circuit(q).op
    _check_input(op, input_state)
    t = cfg.num_ancillas
    if backend == "auto":
        backend = "statevector" if t + input_state.num_qubits <= MAX_SIM_QUBITS else "spectral"
    if backend == "statevector":
        probs = _statevector_distribution(op.matrix, input_state, t)
    elif backend == "spectral":
        probs = _spectral_distribution(op.matrix, input_state, t)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return MeasurementDistribution(probs)


def run_phase_estimation(q, input_state: StateVector, cfg: PhaseEstimateConfig, seed=None,
                         backend: str = "auto") -> PhaseOutcome:
    """Run phase estimation once and measure the register.

    Q^(2^j) is formed by repeated squaring, but the oracle is charged for
    2^j controlled applications of Q, i.e. 2^t - 1 in total.
    """
    circuit = as_circuit(q)
    dist = outcome_distribution(circuit, input_state, cfg, backend=backend)
    circuit.charge(cfg.applications)
    return PhaseOutcome(int(sample(dist, rng_from(seed))), cfg.num_ancillas)
