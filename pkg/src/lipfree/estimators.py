"""Estimator-style wrappers: ``fit`` on a space, then ``transform`` / ``predict`` in batch.

The space plays the role of training data. Hyperparameters are constructor
arguments, so ``get_params`` / ``set_params`` / ``clone`` work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .classify import delta_ball_test, delta_slice_test
from .elements import FreeElement
from .exceptions import DomainError, MetricStructureError
from .freespace import free_norm
from .metric import EmbeddedPointSet, FiniteMetricSpace, trivial_segment_pairs, validate_metric


def check_space(space, tol=None):
    """Coerce to a validated :class:`FiniteMetricSpace`.

    Accepts a space, an :class:`EmbeddedPointSet` or a square distance matrix
    (base point 0).
    """
    if isinstance(space, EmbeddedPointSet):
        space = space.to_metric()
    elif not isinstance(space, FiniteMetricSpace):
        D = np.asarray(space, dtype=float)
        space = FiniteMetricSpace([str(i) for i in range(len(D))], D, 0)
    rep = validate_metric(space, tol)
    if not rep.ok:
        v = rep.violations[0]
        raise MetricStructureError(f"not a metric: {v.kind} {v.detail}")
    return space


def check_pairs(space, pairs):
    """Array of shape (m, 2) of point indices; names are resolved, ``x == y`` rejected."""
    rows = [(space.index(a), space.index(b)) for a, b in pairs]
    out = np.array(rows, dtype=int).reshape(-1, 2)
    if np.any(out[:, 0] == out[:, 1]):
        raise DomainError("pairs need two distinct points")
    return out


class FreeNormTransformer(BaseEstimator):
    """Free norms of coefficient vectors.

    Parameters
    ----------
    method : {"lp", "transport"}
    tol : Tolerances, optional
    """

    def __init__(self, method="lp", tol=None):
        self.method = method
        self.tol = tol

    def fit(self, space, y=None):
        self.space_ = check_space(space, self.tol)
        self.n_features_in_ = self.space_.n
        return self

    def transform(self, X):
        """``X`` of shape (m, n) holds coefficients on every point; returns (m,) norms."""
        check_is_fitted(self)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features_in_:
            raise DomainError(f"expected {self.n_features_in_} coefficients per row, "
                              f"got {X.shape[1]}")
        base = self.space_.base
        return np.array([free_norm(self.space_, FreeElement.from_vector(row, base),
                                   self.method, tol=self.tol).value for row in X])


class DaugavetMoleculeClassifier(BaseEstimator):
    """Predicts whether ``m_{x,y}`` passes the Daugavet criterion for molecules.

    Parameters
    ----------
    eta, h : float, optional
        Segment slack and pair cutoff for the denting witnesses; default to
        the space resolution.
    """

    def __init__(self, eta=None, h=None, tol=None):
        self.eta = eta
        self.h = h
        self.tol = tol

    def fit(self, space, y=None):
        self.space_ = check_space(space, self.tol)
        r = self.space_.resolution
        eta = r if self.eta is None else self.eta
        h = r if self.h is None else self.h
        self.witness_pairs_ = np.array(trivial_segment_pairs(self.space_, eta, h, self.tol),
                                       dtype=int).reshape(-1, 2)
        return self

    def decision_function(self, pairs):
        """Worst margin ``min(rhs) - lhs`` over the witnesses; ``+inf`` with none."""
        check_is_fitted(self)
        P = check_pairs(self.space_, pairs)
        D = self.space_.dist
        W = self.witness_pairs_
        if len(W) == 0:
            return np.full(len(P), np.inf)
        x, y = P[:, 0][:, None], P[:, 1][:, None]
        u, v = W[:, 0][None, :], W[:, 1][None, :]
        lhs = D[x, y] + D[u, v]
        rhs = np.minimum(D[x, u] + D[y, v], D[x, v] + D[y, u])
        return (rhs - lhs).min(axis=1)

    def predict(self, pairs):
        tau = 1e-9 if self.tol is None else self.tol.tau
        return self.decision_function(pairs) >= -tau


class DeltaPointClassifier(BaseEstimator):
    """Predicts ``True`` when ``m_{x,y}`` survives the lens test and the built-in slice test.

    ``False`` means refuted; ``True`` only means unrefuted at ``scale``.
    """

    def __init__(self, scale=None, alpha=0.1, n_random=2, seed=0, tol=None):
        self.scale = scale
        self.alpha = alpha
        self.n_random = n_random
        self.seed = seed
        self.tol = tol

    def fit(self, space, y=None):
        self.space_ = check_space(space, self.tol)
        return self

    def predict(self, pairs):
        check_is_fitted(self)
        out = []
        for x, y in check_pairs(self.space_, pairs):
            ok = delta_ball_test(self.space_, x, y, tol=self.tol).positive
            if ok:
                ok = delta_slice_test(self.space_, x, y, scale=self.scale, alpha=self.alpha,
                                      n_random=self.n_random, seed=self.seed,
                                      tol=self.tol).positive
            out.append(ok)
        return np.array(out, dtype=bool)
