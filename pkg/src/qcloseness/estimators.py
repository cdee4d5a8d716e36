"""scikit-learn style front end for the closeness estimators.

``X`` is a batch of state pairs with shape (n_pairs, 2, dim). The estimator
builds state-preparation oracles for each pair, so every estimate is paid
for in oracle queries (or SWAP-test samples) exactly as in the library API.

>>> est = ClosenessEstimator(quantity="td", eps=0.05, random_state=0)
>>> est.fit_transform(X)          # doctest: +SKIP
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .amp_est import amplify
from .closeness import exact_value, get_estimator
from .oracles import PreparedPair
from .validation import check_eps, check_pairs


class ClosenessEstimator(TransformerMixin, BaseEstimator):
    """Estimate trace distance, square-root fidelity or squared fidelity per pair.

    Parameters
    ----------
    quantity : {"td", "f", "f2"}
    method : {"optimal", "folklore_query", "folklore_sample"}
    eps : float
        Target additive error.
    rounds : int
        Odd number of median-of-rounds repetitions; 1 means a single shot.
    random_state : int, Generator or None

    Attributes set by ``transform``
    -------------------------------
    queries_ : ndarray of int
        Oracle queries per pair (zero for the sample-based method).
    samples_ : ndarray of int
        SWAP-test shots per pair (zero for query methods).
    """

    def __init__(self, quantity="td", method="optimal", eps=0.05, rounds=1,
                 renormalize=False, random_state=None):
        self.quantity = quantity
        self.method = method
        self.eps = eps
        self.rounds = rounds
        self.renormalize = renormalize
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_pairs(X, renormalize=self.renormalize)
        check_eps(self.eps)
        self._estimator = get_estimator(self.method, self.quantity)
        if self.rounds < 1 or self.rounds % 2 == 0:
            raise ValueError("rounds must be a positive odd integer")
        self.n_qubits_ = int(X.shape[2]).bit_length() - 1
        return self

    def _check_fitted(self, X):
        if not hasattr(self, "n_qubits_"):
            raise NotFittedError("call fit before transform")
        X = check_pairs(X, renormalize=self.renormalize)
        if X.shape[2] != 1 << self.n_qubits_:
            raise ValueError(f"fitted on {self.n_qubits_}-qubit states, got dimension {X.shape[2]}")
        return X

    def estimate(self, X):
        """Full ``EstimationResult`` per pair."""
        X = self._check_fitted(X)
        rs = self.random_state
        if isinstance(rs, np.random.Generator):
            rs = int(rs.integers(2**63))
        seeds = np.random.SeedSequence(rs).spawn(len(X))
        results = []
        for (phi, psi), ss in zip(X, seeds):
            pair = PreparedPair.from_states(phi, psi)
            if self.rounds == 1:
                results.append(self._estimator(pair, self.eps, np.random.default_rng(ss)))
            else:
                results.append(amplify(lambda rng, pair=pair: self._estimator(pair, self.eps, rng),
                                       self.rounds, ss))
        self.queries_ = np.array([r.queries_used for r in results])
        self.samples_ = np.array([r.samples_used for r in results])
        return results

    def transform(self, X):
        return np.array([r.estimate for r in self.estimate(X)])

    def predict(self, X):
        return self.transform(X)

    def score(self, X, y=None):
        """Fraction of pairs whose estimate lands within eps of ``y``.

        ``y`` defaults to the exact values computed from the state vectors.
        """
        est = self.transform(X)
        if y is None:
            y = exact_values(X, self.quantity)
        return float(np.mean(np.abs(est - np.asarray(y, dtype=float)) < self.eps))


def exact_values(X, quantity: str = "td") -> np.ndarray:
    X = check_pairs(X)
    return np.array([exact_value(PreparedPair.from_states(a, b), quantity) for a, b in X])
