import numpy as np
import pytest

from qcloseness.oracles import PreparedPair
from qcloseness.qlin import H, X, identity

SQRT_HALF = 0.7071067811865476


def binomial_floor(trials: int, target: float = 2 / 3) -> float:
    """target - 3 sigma at the target rate."""
    return target - 3 * np.sqrt(target * (1 - target) / trials)


@pytest.fixture
def zero_plus_pair():
    """|phi> = |0>, |psi> = H|0>."""
    return PreparedPair.from_unitaries(identity(1), H)


@pytest.fixture
def orthogonal_pair():
    return PreparedPair.from_unitaries(identity(1), X)


@pytest.fixture
def same_pair():
    return PreparedPair.from_unitaries(H, H)
