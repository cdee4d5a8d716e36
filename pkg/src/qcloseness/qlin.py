"""Dense complex linear algebra for small state-vector simulations.

Qubit ordering is big-endian: qubit 0 is the most significant bit of a basis
index, so ``tensor(a, b)`` puts ``a`` on the high-order qubits. Registers
written as |x>_A|y>_B therefore map to ``tensor(op_A, op_B)`` directly.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

NORM_TOL = 1e-10
UNITARY_TOL = 1e-9
PROB_TOL = 1e-9
FILE_NORM_TOL = 1e-6


class DimensionError(ValueError):
    """Operand shapes do not agree."""


class StateFileError(ValueError):
    """A state-vector file could not be parsed or is not normalized."""


def _num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def rng_from(seed) -> np.random.Generator:
    """Turn an int, SeedSequence, Generator or None into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class StateVector:
    """Normalized amplitude vector over ``num_qubits`` qubits. Immutable."""

    __slots__ = ("amplitudes", "num_qubits")

    def __init__(self, amplitudes, *, normalize=False):
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        num_qubits = _num_qubits(amps.size)
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 by more than {NORM_TOL}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "num_qubits", num_qubits)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @classmethod
    def basis(cls, index: int, num_qubits: int) -> "StateVector":
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        if other.dim != self.dim:
            raise DimensionError(f"dimensions {self.dim} and {other.dim} differ")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits})"


class UnitaryOp:
    """Dense unitary matrix acting on ``num_qubits`` qubits. Immutable.

    Unitarity is checked on construction unless ``check=False``; internal
    constructors that compose already-checked operators skip the check.
    """

    __slots__ = ("matrix", "num_qubits")

    def __init__(self, matrix, *, check=True):
        m = np.array(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {m.shape}")
        num_qubits = _num_qubits(m.shape[0])
        if check:
            err = unitarity_error(m)
            if err >= UNITARY_TOL:
                raise ValueError(f"matrix is not unitary (max |M^dag M - I| = {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "num_qubits", num_qubits)

    def __setattr__(self, name, value):
        raise AttributeError("UnitaryOp is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "UnitaryOp") -> "UnitaryOp":
        if not isinstance(other, UnitaryOp):
            return NotImplemented
        return compose(self, other)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"UnitaryOp(num_qubits={self.num_qubits})"


def unitarity_error(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def identity(num_qubits: int) -> UnitaryOp:
    return UnitaryOp(np.eye(1 << num_qubits), check=False)


_SQ2 = 1 / math.sqrt(2)
I2 = UnitaryOp(np.eye(2), check=False)
X = UnitaryOp([[0, 1], [1, 0]], check=False)
Y = UnitaryOp([[0, -1j], [1j, 0]], check=False)
Z = UnitaryOp([[1, 0], [0, -1]], check=False)
H = UnitaryOp([[_SQ2, _SQ2], [_SQ2, -_SQ2]], check=False)
S = UnitaryOp([[1, 0], [0, 1j]], check=False)


def phase_gate(angle: float) -> UnitaryOp:
    """diag(1, e^{i angle})."""
    return UnitaryOp(np.diag([1.0, np.exp(1j * angle)]), check=False)


def ry(angle: float) -> UnitaryOp:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return UnitaryOp([[c, -s], [s, c]], check=False)


def apply(u: UnitaryOp, s: StateVector) -> StateVector:
    if u.dim != s.dim:
        raise DimensionError(f"operator acts on {u.num_qubits} qubits, state has {s.num_qubits}")
    return StateVector(u.matrix @ s.amplitudes)


def compose(*ops: UnitaryOp) -> UnitaryOp:
    """Matrix product ``ops[0] @ ops[1] @ ...`` (rightmost acts first)."""
    if not ops:
        raise ValueError("compose needs at least one operator")
    dim = ops[0].dim
    m = ops[0].matrix
    for op in ops[1:]:
        if op.dim != dim:
            raise DimensionError(f"cannot compose dimensions {dim} and {op.dim}")
        m = m @ op.matrix
    return UnitaryOp(m, check=False)


def tensor(*ops: UnitaryOp) -> UnitaryOp:
    """Kronecker product; the first operand acts on the most significant qubits."""
    m = np.ones((1, 1), dtype=np.complex128)
    for op in ops:
        m = np.kron(m, op.matrix)
    return UnitaryOp(m, check=False)


def adjoint(u: UnitaryOp) -> UnitaryOp:
    return UnitaryOp(u.matrix.conj().T, check=False)


def controlled(u: UnitaryOp, num_controls: int = 1) -> UnitaryOp:
    """Controls sit above the target; ``u`` fires only when all controls are 1."""
    if num_controls < 1:
        raise ValueError("num_controls must be >= 1")
    total = u.dim << num_controls
    m = np.eye(total, dtype=np.complex128)
    m[total - u.dim:, total - u.dim:] = u.matrix
    return UnitaryOp(m, check=False)


def projector_zero(num_qubits: int) -> np.ndarray:
    """|0...0><0...0| as a dense matrix."""
    p = np.zeros((1 << num_qubits, 1 << num_qubits), dtype=np.complex128)
    p[0, 0] = 1.0
    return p


@lru_cache(maxsize=8)
def _swap_permutation(k: int) -> np.ndarray:
    d = 1 << k
    idx = np.arange(d * d)
    return (idx % d) * d + idx // d


def swap_registers(k: int) -> UnitaryOp:
    """SWAP of two k-qubit registers, |x>|y> -> |y>|x>."""
    perm = _swap_permutation(k)
    m = np.zeros((perm.size, perm.size), dtype=np.complex128)
    m[perm, np.arange(perm.size)] = 1.0
    return UnitaryOp(m, check=False)


def haar_unitary(dim: int, seed=None) -> UnitaryOp:
    """Haar-random unitary from the QR decomposition of a complex Ginibre matrix."""
    rng = rng_from(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return UnitaryOp(q, check=False)


def complete_to_unitary(column) -> UnitaryOp:
    """A unitary whose first column is ``column``.

    The remaining columns come from Gram-Schmidt against e_0, e_1, ... in that
    order (two passes for stability), so the result is deterministic.
    """
    v = np.array(column, dtype=np.complex128).reshape(-1)
    dim = v.size
    _num_qubits(dim)
    nv = np.linalg.norm(v)
    if abs(nv - 1.0) > NORM_TOL:
        raise ValueError(f"first column has norm {nv!r}, expected 1")
    basis = np.zeros((dim, dim), dtype=np.complex128)
    basis[:, 0] = v / nv
    filled = 1
    for i in range(dim):
        if filled == dim:
            break
        w = np.zeros(dim, dtype=np.complex128)
        w[i] = 1.0
        for _ in range(2):
            w = w - basis[:, :filled] @ (basis[:, :filled].conj().T @ w)
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            basis[:, filled] = w / nw
            filled += 1
    return UnitaryOp(basis)


@dataclass(frozen=True)
class MeasurementDistribution:
    """Born-rule distribution over computational-basis outcomes of ``qubits``."""

    probabilities: np.ndarray
    qubits: tuple[int, ...] = ()

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < -PROB_TOL) or np.any(p > 1 + PROB_TOL):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def from_mapping(cls, mapping: dict[int, float], size: int | None = None):
        size = size or (max(mapping) + 1)
        p = np.zeros(size)
        for k, v in mapping.items():
            p[k] = v
        return cls(p)

    def __getitem__(self, index: int) -> float:
        return float(self.probabilities[index])

    def __len__(self):
        return self.probabilities.size

    def as_dict(self, tol: float = 0.0) -> dict[int, float]:
        return {int(i): float(v) for i, v in enumerate(self.probabilities) if v > tol}


def marginal_distribution(s: StateVector, qubits: Sequence[int]) -> MeasurementDistribution:
    """Probabilities of measuring ``qubits`` (first listed = most significant bit)."""
    qubits = tuple(int(q) for q in qubits)
    n = s.num_qubits
    if len(set(qubits)) != len(qubits) or any(q < 0 or q >= n for q in qubits):
        raise IndexError(f"invalid qubit indices {qubits} for a {n}-qubit state")
    probs = np.abs(s.amplitudes.reshape((2,) * n)) ** 2 if n else np.abs(s.amplitudes) ** 2
    rest = tuple(q for q in range(n) if q not in qubits)
    marg = probs.sum(axis=rest) if rest else probs
    # remaining axes are in ascending qubit order; reorder to the requested order
    order = sorted(qubits)
    marg = np.transpose(marg, [order.index(q) for q in qubits]).reshape(-1)
    return MeasurementDistribution(marg / marg.sum(), qubits)


def sample(d: MeasurementDistribution, seed=None, size: int | None = None):
    """Draw outcome indices from ``d``; reproducible for a fixed seed."""
    rng = rng_from(seed)
    return rng.choice(len(d), size=size, p=d.probabilities)


def read_state(path, renormalize: bool = False) -> tuple[StateVector, bool]:
    """Load a JSON ``[[re, im], ...]`` state file.

    Returns ``(state, warned)``. A norm off by more than ``FILE_NORM_TOL`` is
    rejected unless ``renormalize`` is set, in which case the vector is
    rescaled and ``warned`` is True. Smaller drift is rescaled silently.
    """
    try:
        raw = json.loads(Path(path).read_text())
        arr = np.array(raw, dtype=float)
    except (OSError, ValueError, TypeError) as exc:
        raise StateFileError(f"cannot read state file {path}: {exc}") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise StateFileError(f"{path}: expected a list of [re, im] pairs")
    amps = arr[:, 0] + 1j * arr[:, 1]
    try:
        _num_qubits(amps.size)
    except DimensionError as exc:
        raise StateFileError(f"{path}: {exc}") from exc
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise StateFileError(f"{path}: zero vector")
    warned = abs(norm - 1.0) > FILE_NORM_TOL
    if warned and not renormalize:
        raise StateFileError(f"{path}: norm {norm:.9g} deviates from 1 by more than {FILE_NORM_TOL}")
    if warned:
        warnings.warn(f"{path}: state renormalized from norm {norm:.9g}", stacklevel=2)
    return StateVector(amps, normalize=True), warned


def write_state(s: StateVector, path) -> None:
    pairs = [[float(a.real), float(a.imag)] for a in s.amplitudes]
    Path(path).write_text(json.dumps(pairs))
