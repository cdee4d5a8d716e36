"""Query-counted oracles and the composite operators built from them.

Every application of an oracle, its inverse, or a controlled version of
either costs exactly one query. Composite operators (``QueryCircuit``) carry
the list of oracle calls one application of them makes, so simulators can
use the dense matrix while still charging the right counters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qlin import (
    I2,
    X,
    DimensionError,
    StateVector,
    UnitaryOp,
    adjoint,
    apply,
    complete_to_unitary,
    compose,
    haar_unitary,
    identity,
    projector_zero,
    rng_from,
    tensor,
)

PROB_SUM_TOL = 1e-9


class CountingOracle:
    """A unitary oracle together with a counter of how often it was queried.

    ``op`` stays inspectable for classical ground-truth computations; reading
    it is free. Anything that simulates a query must go through ``charge`` (or
    the ``apply*`` helpers, which charge for you).
    """

    def __init__(self, op: UnitaryOp, name: str = "U"):
        if not isinstance(op, UnitaryOp):
            op = UnitaryOp(op)
        self.op = op
        self.name = name
        self._count = 0

    @property
    def query_count(self) -> int:
        return self._count

    @property
    def num_qubits(self) -> int:
        return self.op.num_qubits

    def charge(self, times: int = 1) -> None:
        if times < 0:
            raise ValueError("query counts only go up")
        self._count += int(times)

    def apply(self, s: StateVector) -> StateVector:
        self.charge()
        return apply(self.op, s)

    def apply_adjoint(self, s: StateVector) -> StateVector:
        self.charge()
        return apply(adjoint(self.op), s)

    def prepared_state(self) -> StateVector:
        """``op|0>`` read off classically (no query charged)."""
        return StateVector(self.op.matrix[:, 0])

    def __repr__(self):
        return f"CountingOracle({self.name!r}, num_qubits={self.num_qubits}, queries={self._count})"


@dataclass(frozen=True, eq=False)
class QueryCircuit:
    """A unitary whose every application makes a fixed set of oracle calls."""

    op: UnitaryOp
    calls: tuple[tuple[CountingOracle, int], ...] = ()

    def __post_init__(self):
        merged: dict[int, list] = {}
        for oracle, k in self.calls:
            entry = merged.setdefault(id(oracle), [oracle, 0])
            entry[1] += k
        object.__setattr__(self, "calls", tuple((o, k) for o, k in merged.values()))

    @property
    def num_qubits(self) -> int:
        return self.op.num_qubits

    @property
    def oracles(self) -> tuple[CountingOracle, ...]:
        return tuple(o for o, _ in self.calls)

    @property
    def queries_per_application(self) -> int:
        return sum(k for _, k in self.calls)

    def charge(self, times: int = 1) -> None:
        for oracle, k in self.calls:
            oracle.charge(k * times)

    def apply(self, s: StateVector) -> StateVector:
        self.charge()
        return apply(self.op, s)

    def total_queries(self) -> int:
        """Current counter sum over the distinct underlying oracles."""
        return sum(o.query_count for o in self.oracles)


def as_circuit(u) -> QueryCircuit:
    if isinstance(u, QueryCircuit):
        return u
    if isinstance(u, CountingOracle):
        return QueryCircuit(u.op, ((u, 1),))
    if isinstance(u, UnitaryOp):
        return QueryCircuit(u)
    raise TypeError(f"cannot treat {type(u).__name__} as an oracle circuit")


@dataclass(frozen=True, eq=False)
class PreparedPair:
    """State-preparation oracles for |phi> = u_phi|0> and |psi> = u_psi|0>."""

    u_phi: CountingOracle
    u_psi: CountingOracle

    def __post_init__(self):
        if self.u_phi.num_qubits != self.u_psi.num_qubits:
            raise DimensionError(
                f"oracles act on {self.u_phi.num_qubits} and {self.u_psi.num_qubits} qubits"
            )

    @property
    def num_qubits(self) -> int:
        return self.u_phi.num_qubits

    @classmethod
    def from_states(cls, phi, psi) -> "PreparedPair":
        phi = phi if isinstance(phi, StateVector) else StateVector(phi)
        psi = psi if isinstance(psi, StateVector) else StateVector(psi)
        return cls(
            CountingOracle(state_preparation_unitary(phi), "U_phi"),
            CountingOracle(state_preparation_unitary(psi), "U_psi"),
        )

    @classmethod
    def from_unitaries(cls, a: UnitaryOp, b: UnitaryOp) -> "PreparedPair":
        return cls(CountingOracle(a, "U_phi"), CountingOracle(b, "U_psi"))

    @classmethod
    def haar(cls, num_qubits: int, seed=None) -> "PreparedPair":
        rng = rng_from(seed)
        dim = 1 << num_qubits
        return cls.from_unitaries(haar_unitary(dim, rng), haar_unitary(dim, rng))

    def states(self) -> tuple[StateVector, StateVector]:
        return self.u_phi.prepared_state(), self.u_psi.prepared_state()

    def overlap(self) -> complex:
        """<phi|psi>, computed classically."""
        phi, psi = self.states()
        return phi.inner(psi)

    def total_queries(self) -> int:
        if self.u_phi is self.u_psi:
            return self.u_phi.query_count
        return self.u_phi.query_count + self.u_psi.query_count


def state_preparation_unitary(state: StateVector) -> UnitaryOp:
    return complete_to_unitary(state.amplitudes)


def build_u(pair: PreparedPair) -> QueryCircuit:
    """U = U_phi^dag U_psi, so that <0|U|0> = <phi|psi>."""
    op = compose(adjoint(pair.u_phi.op), pair.u_psi.op)
    return QueryCircuit(op, ((pair.u_phi, 1), (pair.u_psi, 1)))


def marking_operator(k: int) -> UnitaryOp:
    """V = X_A (x) |0><0|_B + I_A (x) (I - |0><0|)_B on 1 + k qubits."""
    p0 = projector_zero(k)
    m = np.kron(X.matrix, p0) + np.kron(I2.matrix, np.eye(1 << k) - p0)
    return UnitaryOp(m, check=False)


def build_w(pair: PreparedPair) -> QueryCircuit:
    """W = V (I_A (x) U_B).

    W|0>_A|0>_B = sqrt(p)|0>|phi_0> + sqrt(1-p)|1>|phi_1> with
    sqrt(p) = T(|phi>, |psi>).
    """
    u = build_u(pair)
    op = compose(marking_operator(pair.num_qubits), tensor(I2, u.op))
    return QueryCircuit(op, u.calls)


def build_w_prime(pair: PreparedPair) -> QueryCircuit:
    """W' = (X_A (x) I_B) W; its |0>_A amplitude is F(|phi>, |psi>)."""
    w = build_w(pair)
    op = compose(tensor(X, identity(pair.num_qubits)), w.op)
    return QueryCircuit(op, w.calls)


def build_grover_iterate(u) -> QueryCircuit:
    """Q = -U (I - 2|0><0|_AB) U^dag (I - 2|0><0|_A (x) I_B).

    Qubit 0 is the one-qubit A register. One application of Q uses U once and
    U^dag once, so it charges twice what U does.
    """
    u = as_circuit(u)
    n = u.num_qubits
    if n < 1:
        raise DimensionError("Grover iterate needs at least the A qubit")
    dim = 1 << n
    reflect_zero = np.eye(dim, dtype=np.complex128)
    reflect_zero[0, 0] = -1.0
    # I - 2|0><0|_A (x) I_B flips the sign of the A=0 half
    reflect_good = np.diag(np.r_[-np.ones(dim // 2), np.ones(dim // 2)]).astype(np.complex128)
    m = u.op.matrix
    q = -(m @ reflect_zero @ m.conj().T @ reflect_good)
    return QueryCircuit(UnitaryOp(q, check=False), tuple((o, 2 * k) for o, k in u.calls))


def pad_distribution(probabilities) -> np.ndarray:
    """Validate a distribution and zero-pad it to a power-of-two length."""
    p = np.asarray(probabilities, dtype=float).reshape(-1)
    if p.size == 0:
        raise ValueError("empty distribution")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError("probabilities must be finite and non-negative")
    if abs(p.sum() - 1.0) > PROB_SUM_TOL:
        raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
    size = 1 << max(0, int(np.ceil(np.log2(p.size))))
    return np.pad(p, (0, size - p.size))


def build_distribution_oracle(probabilities, n: int | None = None) -> UnitaryOp:
    """A unitary with U|0> = sum_j sqrt(p(j)) |j>.

    ``n`` is the sample-space size; if given it must match the length of
    ``probabilities``. Lengths that are not powers of two get zero-padded.
    """
    p = np.asarray(probabilities, dtype=float).reshape(-1)
    if n is not None and n != p.size:
        raise ValueError(f"got {p.size} probabilities for a sample space of size {n}")
    return complete_to_unitary(np.sqrt(pad_distribution(p)))


def bernoulli_oracle(p: float, b_qubits: int = 1, seed=None) -> UnitaryOp:
    """A unitary with U|0>_A|0>_B = sqrt(p)|0>|phi_0> + sqrt(1-p)|1>|phi_1>.

    |phi_0> and |phi_1> are Haar-random b_qubits states.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = rng_from(seed)
    dim_b = 1 << b_qubits
    phi0 = haar_unitary(dim_b, rng).matrix[:, 0]
    phi1 = haar_unitary(dim_b, rng).matrix[:, 0]
    column = np.concatenate([np.sqrt(p) * phi0, np.sqrt(1.0 - p) * phi1])
    return complete_to_unitary(column)
